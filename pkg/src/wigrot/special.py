"""Semi-normalized associated Legendre functions and scalar recursion coefficients.

Q_n^m(x) = sqrt((n-m)!/(n+m)!) * P_n^m(x), Condon-Shortley phase included, so
P_1^1(x) = -sqrt(1 - x^2).  With this scaling |Q_n^m| <= 1 everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from wigrot._kernels import legendre_rows


@dataclass(frozen=True)
class LegendreTable:
    """Q_n^m(x) for 0 <= m <= n <= n_max, stored row-major at n(n+1)/2 + m."""

    n_max: int
    x: float
    values: np.ndarray

    def get(self, n: int, m: int) -> float:
        if not 0 <= m <= n <= self.n_max:
            raise IndexError(f"(n={n}, m={m}) outside table with n_max={self.n_max}")
        return float(self.values[n * (n + 1) // 2 + m])

    def row(self, n: int) -> np.ndarray:
        """Q_n^m for m = 0..n (a read-only view)."""
        if not 0 <= n <= self.n_max:
            raise IndexError(f"degree {n} outside table with n_max={self.n_max}")
        start = n * (n + 1) // 2
        return self.values[start:start + n + 1]


def _check_abscissa(x: float) -> None:
    if not (-1.0 <= x <= 1.0):
        raise ValueError(f"abscissa must lie in [-1, 1], got {x!r}")


def seminorm_legendre_table(n_max: int, x: float, s: float | None = None) -> LegendreTable:
    """Table of Q_n^m(x).

    ``s`` may supply sqrt(1 - x^2) directly (e.g. sin(beta) when x = cos(beta)),
    which keeps full relative accuracy near the poles.
    """
    if n_max < 0:
        raise ValueError(f"n_max must be non-negative, got {n_max}")
    x = float(x)
    _check_abscissa(x)
    if s is None:
        s = math.sqrt((1.0 - x) * (1.0 + x))
    _, _, tri = legendre_rows(int(n_max), x, float(abs(s)), True)
    tri.setflags(write=False)
    return LegendreTable(int(n_max), x, tri)


def legendre_rows_pair(n: int, x: float, s: float) -> tuple[np.ndarray, np.ndarray]:
    """Rows Q_{n-1}^m and Q_n^m without storing the full table."""
    prev, last, _ = legendre_rows(int(n), float(x), float(abs(s)), False)
    return prev, last


def log_legendre_at_zero(n: int, m: int) -> tuple[int, float]:
    """(sign, ln|P_n^m(0)|) for 0 <= m <= n; sign is 0 when n + m is odd."""
    if m < 0 or m > n:
        raise ValueError(f"need 0 <= m <= n, got n={n}, m={m}")
    if (n + m) % 2:
        return 0, -math.inf
    sign = -1 if ((n + m) // 2) % 2 else 1
    log_mag = (m * math.log(2.0) - 0.5 * math.log(math.pi)
               + math.lgamma((n + m + 1) / 2.0) - math.lgamma((n - m) / 2.0 + 1.0))
    return sign, log_mag


def legendre_at_zero(n: int, m: int) -> float:
    """Unnormalized P_n^m(0), Condon-Shortley phase included.

    P_n^m(0) = 2^m / sqrt(pi) * cos(pi (n+m)/2) * Gamma((n+m+1)/2) / Gamma((n-m)/2 + 1),
    evaluated through log-gamma; exactly zero when n + m is odd.
    """
    sign, log_mag = log_legendre_at_zero(n, m)
    return sign * math.exp(log_mag) if sign else 0.0


def log_factorial_ratio(n: int, m: int) -> float:
    """ln((n-m)!/(n+m)!) for 0 <= |m| <= n."""
    return math.lgamma(n - m + 1.0) - math.lgamma(n + m + 1.0)


def sgn(m: int) -> int:
    """Sign with sgn(0) = 1."""
    return -1 if m < 0 else 1


def epsilon(m: int) -> int:
    """(-1)^m for m >= 0, 1 for m < 0."""
    if m < 0:
        return 1
    return -1 if m % 2 else 1


def coeff_ab(n: int, m: int) -> tuple[float, float]:
    """Coefficients of the degree-raising recursion; zero outside n >= |m|."""
    if n < abs(m):
        return 0.0, 0.0
    a = math.sqrt((n + 1 + m) * (n + 1 - m) / ((2 * n + 1) * (2 * n + 3)))
    num = (n - m - 1) * (n - m)
    b = sgn(m) * math.sqrt(num / ((2 * n - 1) * (2 * n + 1))) if num else 0.0
    return a, b


def coeff_d(n: int, m: int) -> float:
    """Same-degree recursion coefficient sgn(m)/2 sqrt((n-m)(n+m+1)); zero off -n-1..n."""
    if m < -n - 1 or m > n:
        return 0.0
    return 0.5 * sgn(m) * math.sqrt((n - m) * (n + m + 1))


def coeff_d_array(n: int) -> np.ndarray:
    """coeff_d(n, k) for k = -n-1..n; entry k lives at index k + n + 1."""
    k = np.arange(-n - 1, n + 1, dtype=np.float64)
    sign = np.where(k < 0, -1.0, 1.0)
    return 0.5 * sign * np.sqrt((n - k) * (n + k + 1))

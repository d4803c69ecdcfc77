"""Reference values that do not share code with the recursion.

``h_direct`` sums Wigner's closed formula term by term.  Each term's rational
prefactor is formed exactly from integer factorials and rounded once, so the
only floating-point error left is in the trigonometric powers and the final
compensated sum.  The alternating terms still cancel, by a factor of roughly
10^4 at degree 20; in double precision the sum is reliable to 1e-12 only up
to degree 16 and is refused beyond degree 32.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from wigrot.recursion import CoeffTriangle, full_matrix, triangle_order
from wigrot.special import epsilon

RELIABLE_DEGREE = 16
MAX_DEGREE = 32


class OracleAccuracyWarning(UserWarning):
    """The direct sum was asked for a degree where cancellation eats the digits."""


@dataclass(frozen=True)
class DirectSumTerm:
    sigma: int
    log_magnitude: float
    sign: int


def sigma_range(n: int, m_prime: int, m: int) -> range:
    """Indices with all factorial arguments non-negative."""
    return range(max(0, -(m_prime + m)), min(n - m_prime, n - m) + 1)


@lru_cache(maxsize=None)
def _prefactors(n: int, m_prime: int, m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Signed prefactors and (cos, sin) half-angle exponents for every term."""
    f = math.factorial
    rho_sq = f(n + m) * f(n - m) * f(n + m_prime) * f(n - m_prime)
    sigmas = sigma_range(n, m_prime, m)
    coef = np.empty(len(sigmas))
    for i, s in enumerate(sigmas):
        den = f(s) * f(n - m_prime - s) * f(n - m - s) * f(m_prime + m + s)
        sign = -1.0 if (n - s) % 2 else 1.0
        coef[i] = sign * math.sqrt(Fraction(rho_sq, den * den))
    sig = np.arange(sigmas.start, sigmas.stop)
    pow_cos = 2 * sig + m + m_prime
    pow_sin = 2 * n - 2 * sig - m - m_prime
    return coef, pow_cos, pow_sin


def _check_indices(n: int, m_prime: int, m: int) -> None:
    if n < 0 or abs(m) > n or abs(m_prime) > n:
        raise ValueError(f"indices out of range: n={n}, m'={m_prime}, m={m}")
    if n > MAX_DEGREE:
        raise ValueError(f"direct summation refused above degree {MAX_DEGREE}, got {n}")
    if n > RELIABLE_DEGREE:
        warnings.warn(f"direct sum at degree {n} is not accurate to 1e-12",
                      OracleAccuracyWarning, stacklevel=3)


def _reduce(beta: float) -> tuple[float, bool]:
    b = math.remainder(float(beta), 2.0 * math.pi)
    return (-b, True) if b < 0.0 else (b, False)


def _half_angle(beta: float) -> tuple[float, float]:
    if beta == math.pi:
        return 0.0, 1.0
    return math.cos(0.5 * beta), math.sin(0.5 * beta)


def _sum_terms(n: int, m_prime: int, m: int, c: float, s: float) -> float:
    coef, pc, ps = _prefactors(n, m_prime, m)
    terms = coef * np.power(c, pc) * np.power(s, ps)
    return epsilon(m_prime) * epsilon(m) * math.fsum(terms)


def h_direct(n: int, m_prime: int, m: int, beta: float) -> float:
    """H_n^{m'm}(beta) from the explicit finite sum; any real beta."""
    _check_indices(n, m_prime, m)
    b, negate = _reduce(beta)
    c, s = _half_angle(b)
    value = _sum_terms(n, m_prime, m, c, s)
    if negate and (m_prime + m) % 2:
        value = -value
    return value


@lru_cache(maxsize=64)
def _dense_prefactors(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Per-entry prefactors stacked row-major over (m', m), zero-padded to a common length."""
    width = n + 1
    size = (2 * n + 1) ** 2
    coef = np.zeros((size, width))
    pc = np.zeros((size, width), dtype=np.int64)
    ps = np.zeros((size, width), dtype=np.int64)
    eps = np.empty(size)
    row = 0
    for mp in range(-n, n + 1):
        for m in range(-n, n + 1):
            k, a, b = _prefactors(n, mp, m)
            coef[row, :k.size], pc[row, :k.size], ps[row, :k.size] = k, a, b
            eps[row] = epsilon(mp) * epsilon(m)
            row += 1
    return coef, pc, ps, eps


def h_direct_dense(n: int, beta: float) -> np.ndarray:
    """Full (2n+1)^2 matrix of direct sums, rows m', columns m."""
    _check_indices(n, 0, 0)
    b, negate = _reduce(beta)
    c, s = _half_angle(b)
    coef, pc, ps, eps = _dense_prefactors(n)
    terms = coef * np.power(c, pc) * np.power(s, ps)
    out = eps * np.array([math.fsum(row) for row in terms.tolist()])
    out = out.reshape(2 * n + 1, 2 * n + 1)
    if negate:
        k = np.arange(-n, n + 1)
        out = np.where((k[:, None] + k[None, :]) % 2 == 0, out, -out)
    return out


def h_direct_triangle(n: int, beta: float) -> CoeffTriangle:
    dense = h_direct_dense(n, beta)
    mp, m = triangle_order(n)
    return CoeffTriangle(n, float(beta), dense[mp + n, m + n])


def direct_sum_terms(n: int, m_prime: int, m: int, beta: float) -> list[DirectSumTerm]:
    """Individual summands (without the outer epsilon signs), for inspection."""
    _check_indices(n, m_prime, m)
    c, s = _half_angle(_reduce(beta)[0])
    coef, pc, ps = _prefactors(n, m_prime, m)
    out = []
    for sigma, k, i, j in zip(sigma_range(n, m_prime, m), coef, pc, ps):
        t = k * c ** int(i) * s ** int(j)
        out.append(DirectSumTerm(sigma, math.log(abs(t)) if t else -math.inf, -1 if t < 0 else 1))
    return out


def last_column(n: int, m_prime: int, beta: float) -> float:
    """Closed form of H_n^{m',n}(beta)."""
    if abs(m_prime) > n:
        raise ValueError(f"|m'| must not exceed n={n}")
    log_binom = 0.5 * (math.lgamma(2 * n + 1.0) - math.lgamma(n - m_prime + 1.0)
                       - math.lgamma(n + m_prime + 1.0))
    c, s = _half_angle(beta)
    return epsilon(m_prime) * math.exp(log_binom) * c ** (n + m_prime) * s ** (n - m_prime)


def wigner_d_from_h(n: int, m_prime: int, m: int, h_value: float) -> float:
    """Classical Wigner small-d entry from the rotation coefficient."""
    if abs(m) > n or abs(m_prime) > n:
        raise ValueError(f"indices out of range: n={n}, m'={m_prime}, m={m}")
    return epsilon(m_prime) * epsilon(-m) * h_value


def wigner_d_signs(n: int) -> np.ndarray:
    """epsilon(m') * epsilon(-m) over the triangle, in storage order."""
    mp, m = triangle_order(n)
    eps_mp = np.where((mp >= 0) & (mp % 2 == 1), -1.0, 1.0)
    eps_neg_m = np.where((m <= 0) & (m % 2 == 1), -1.0, 1.0)
    return eps_mp * eps_neg_m


def flip_reconstruct_dense(h_half_pi: CoeffTriangle, n: int, beta: float) -> np.ndarray:
    """All (2n+1)^2 coefficients at ``beta`` rebuilt from those at pi/2.

    Two quarter-turn flips about the x axis sandwich a z rotation by beta;
    taking the real part leaves a cosine series in nu*beta.
    """
    if h_half_pi.n != n:
        raise ValueError(f"input has degree {h_half_pi.n}, expected {n}")
    if not math.isclose(h_half_pi.beta, 0.5 * math.pi, rel_tol=0.0, abs_tol=1e-15):
        raise ValueError(f"input must be taken at pi/2, got beta={h_half_pi.beta!r}")
    a = full_matrix(h_half_pi)
    if n == 0:
        return a.copy()
    nu = np.arange(1, n + 1)
    tail = a[:, n + 1:]
    head = a[:, n]
    cos_part = np.outer(head, head) + 2.0 * (tail * np.cos(nu * beta)) @ tail.T
    sin_part = 2.0 * (tail * np.sin(nu * beta)) @ tail.T
    # cos(nu beta + k pi/2) with k = m' + m, split by the parity of k
    k = np.arange(-n, n + 1)[:, None] + np.arange(-n, n + 1)[None, :]
    even = k % 2 == 0
    quarter = np.where(even, k // 2, (k - 1) // 2) % 2
    sign = np.where(quarter == 1, -1.0, 1.0)
    return np.where(even, sign * cos_part, -sign * sin_part)


def flip_reconstruct(h_half_pi: CoeffTriangle, n: int, beta: float) -> CoeffTriangle:
    dense = flip_reconstruct_dense(h_half_pi, n, beta)
    mp, m = triangle_order(n)
    return CoeffTriangle(n, float(beta), dense[mp + n, m + n])

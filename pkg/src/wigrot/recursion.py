"""Rotation coefficients H_n^{m'm}(beta) by recursion inside a single degree.

Only the triangle m in [0, n], m' in [-m, m] is computed and stored; every
other entry follows from H^{m'm} = H^{mm'} = H^{-m',-m}.  The work per degree is
O(n^2): one Legendre sweep seeds the layers m' = 0 and m' = 1, then a forward
sweep fills m' = 2..n and a backward sweep fills m' = -1..-n.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from wigrot import _kernels
from wigrot.special import coeff_d_array, legendre_rows_pair, seminorm_legendre_table

# Dense (2n+1)^2 float64 matrices above this size are refused by full_matrix.
DEFAULT_DENSE_BYTES = 3 * 2**30


def triangle_index(m_prime: int, m: int) -> int:
    """Flat position of (m', m) in triangle storage; requires |m'| <= m."""
    return m * m + m + m_prime


def triangle_order(n: int) -> tuple[np.ndarray, np.ndarray]:
    """(m', m) arrays in storage order: m = 0..n outer, m' = -m..m inner."""
    m = np.repeat(np.arange(n + 1), 2 * np.arange(n + 1) + 1)
    mp = np.arange((n + 1) ** 2) - m * m - m
    return mp, m


@dataclass(frozen=True)
class CoeffTriangle:
    """H_n^{m'm}(beta) on the computational triangle, (n+1)^2 values."""

    n: int
    beta: float
    data: np.ndarray

    def __post_init__(self):
        if self.data.shape != ((self.n + 1) ** 2,):
            raise ValueError(f"degree {self.n} needs {(self.n + 1) ** 2} values, got {self.data.shape}")

    def _resolve(self, m_prime: int, m: int) -> int:
        n = self.n
        if abs(m_prime) > n or abs(m) > n:
            raise IndexError(f"(m'={m_prime}, m={m}) outside degree {n}")
        if abs(m) < abs(m_prime):
            m_prime, m = m, m_prime
        if m < 0:
            m_prime, m = -m_prime, -m
        return triangle_index(m_prime, m)

    def get(self, m_prime: int, m: int) -> float:
        """Any entry with |m'|, |m| <= n, resolved through the symmetries."""
        return float(self.data[self._resolve(m_prime, m)])

    def layer(self, m_prime: int) -> np.ndarray:
        """Stored entries H^{m',m} for m = |m'|..n."""
        m = np.arange(abs(m_prime), self.n + 1)
        return self.data[m * m + m + m_prime]

    def to_dense(self, max_bytes: int = DEFAULT_DENSE_BYTES) -> np.ndarray:
        return full_matrix(self, max_bytes=max_bytes)


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not (0.0 <= beta <= math.pi):
        raise ValueError(f"beta must lie in [0, pi], got {beta!r}; reduce it with reduce_beta first")
    return beta


def _sin_cos(beta: float) -> tuple[float, float]:
    # exact values at the endpoints so beta = pi yields the exact flip pattern
    if beta == math.pi:
        return 0.0, -1.0
    return math.sin(beta), math.cos(beta)


def reduce_beta(beta: float) -> tuple[float, bool]:
    """Map any angle to [0, pi].

    Returns (beta_reduced, negate) where ``negate`` means the coefficients at
    the original angle are (-1)^{m'+m} times those at the reduced angle.
    """
    b = math.remainder(float(beta), 2.0 * math.pi)  # in [-pi, pi]
    if b < 0.0:
        return -b, True
    return b, False


def apply_negation(tri: CoeffTriangle, beta: float) -> CoeffTriangle:
    """Coefficients at -tri.beta, reported under the caller's angle ``beta``."""
    mp, m = triangle_order(tri.n)
    sign = np.where((mp + m) % 2 == 0, 1.0, -1.0)
    return CoeffTriangle(tri.n, float(beta), tri.data * sign)


def _alternate(values: np.ndarray) -> np.ndarray:
    out = values.copy()
    out[1::2] *= -1.0
    return out


def layer_m0(n: int, beta: float) -> np.ndarray:
    """H_n^{m,0}(beta) = (-1)^m Q_n^m(cos beta) for m = 0..n."""
    beta = _check_beta(beta)
    if n < 0:
        raise ValueError(f"degree must be non-negative, got {n}")
    s, c = _sin_cos(beta)
    _, row = legendre_rows_pair(n, c, s)
    return _alternate(row)


def layer_m1(n: int, beta: float, row0_next: np.ndarray) -> np.ndarray:
    """H_n^{1,m}(beta) for m = 1..n from H_{n+1}^{0,m}, m = 0..n+1."""
    beta = _check_beta(beta)
    if n < 1:
        raise ValueError("degree 0 has no m' = 1 layer")
    g = np.asarray(row0_next, dtype=np.float64)
    if g.shape != (n + 2,):
        raise ValueError(f"row0_next must have {n + 2} entries, got {g.shape}")
    s, _ = _sin_cos(beta)
    half_sin = math.sin(0.5 * beta) ** 2  # (1 - cos beta)/2 without cancellation
    half_cos = math.cos(0.5 * beta) ** 2
    m = np.arange(1, n + 1, dtype=np.float64)
    up = np.sqrt((n + m + 1) * (n + m + 2)) * half_sin * g[2:]
    down = np.sqrt((n - m + 1) * (n - m + 2)) * half_cos * g[:-2]
    mid = np.sqrt((n + 1 + m) * (n + 1 - m)) * s * g[1:-1]
    return -(up + down + mid) / math.sqrt(n * (n + 1.0))


def sweep_forward(data: np.ndarray, n: int) -> None:
    """Fill layers m' = 2..n in place; layers 0 and 1 must be present."""
    _sweep_both(data, n)


def sweep_backward(data: np.ndarray, n: int) -> None:
    """Fill layers m' = -1..-n in place; layers 0 and 1 must be present.

    Both directions only read layers 0 and 1 plus what they produce, so the
    kernel runs them back to back; calling either wrapper fills both.
    """
    _sweep_both(data, n)


def _sweep_both(data: np.ndarray, n: int) -> None:
    if data.dtype != np.float64 or not data.flags.c_contiguous:
        raise TypeError("triangle storage must be a contiguous float64 array")
    _kernels.sweep(n, data, coeff_d_array(n))


def _assemble(n: int, beta: float, row_n: np.ndarray, row_next: np.ndarray) -> CoeffTriangle:
    data = np.zeros((n + 1) ** 2)
    m = np.arange(n + 1)
    data[m * m + m] = _alternate(row_n)
    if n >= 1:
        m1 = m[1:]
        data[m1 * m1 + m1 + 1] = layer_m1(n, beta, _alternate(row_next))
        _sweep_both(data, n)
    return CoeffTriangle(n, beta, data)


def compute_subspace(n: int, beta: float) -> CoeffTriangle:
    """All H_n^{m'm}(beta) for one degree, beta in [0, pi]."""
    beta = _check_beta(beta)
    if n < 0:
        raise ValueError(f"degree must be non-negative, got {n}")
    if n == 0:
        return CoeffTriangle(0, beta, np.ones(1))
    s, c = _sin_cos(beta)
    row_n, row_next = legendre_rows_pair(n + 1, c, s)
    return _assemble(n, beta, row_n, row_next)


def compute_all(p: int, beta: float, workers: int = 1) -> list[CoeffTriangle]:
    """Triangles for degrees 0..p-1 sharing one Legendre table.

    Degrees are independent, so ``workers > 1`` spreads them over threads
    (the compiled sweep releases the GIL); the output does not depend on it.
    """
    beta = _check_beta(beta)
    if p < 1:
        raise ValueError(f"bandwidth must be at least 1, got {p}")
    s, c = _sin_cos(beta)
    table = seminorm_legendre_table(p, c, s)

    def one(n: int) -> CoeffTriangle:
        if n == 0:
            return CoeffTriangle(0, beta, np.ones(1))
        try:
            return _assemble(n, beta, table.row(n), table.row(n + 1))
        except MemoryError as exc:
            raise MemoryError(f"allocation failed for degree {n}") from exc

    if workers <= 1:
        return [one(n) for n in range(p)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(p)))


def full_matrix(tri: CoeffTriangle, max_bytes: int = DEFAULT_DENSE_BYTES) -> np.ndarray:
    """Dense matrix M[m'+n, m+n] = H_n^{m'm}; exactly symmetric."""
    n = tri.n
    need = (2 * n + 1) ** 2 * 8
    if need > max_bytes:
        raise MemoryError(f"dense degree-{n} matrix needs {need} bytes, cap is {max_bytes}")
    return _kernels.expand_rows(n, np.ascontiguousarray(tri.data), -n, n)


def dense_rows(tri: CoeffTriangle, mp_lo: int, mp_hi: int) -> np.ndarray:
    """Rows m' = mp_lo..mp_hi of the dense matrix, for blocked processing."""
    n = tri.n
    if not -n <= mp_lo <= mp_hi <= n:
        raise IndexError(f"row range [{mp_lo}, {mp_hi}] outside degree {n}")
    return _kernels.expand_rows(n, np.ascontiguousarray(tri.data), mp_lo, mp_hi)

"""Bounds, asymptotic diagnostics, error metrics and numerical experiments."""

from __future__ import annotations

import enum
import math
import time
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, xlogy

from wigrot import _kernels
from wigrot.fft import compute_subspace_fft_basic, compute_subspace_fft_modified
from wigrot.oracle import flip_reconstruct_dense
from wigrot.recursion import CoeffTriangle, compute_subspace, full_matrix, triangle_order
from wigrot.special import coeff_d, coeff_d_array

ENGINES: dict[str, Callable[[int, float], CoeffTriangle]] = {
    "recursive": compute_subspace,
    "fft-basic": compute_subspace_fft_basic,
    "fft-modified": compute_subspace_fft_modified,
}


# ---------------------------------------------------------------- bounds

def _reduce_indices(m_prime: int, m: int) -> tuple[int, int]:
    """Representative with m >= 0 and |m'| <= m; |H| is unchanged."""
    if abs(m) < abs(m_prime):
        m_prime, m = m, m_prime
    if m < 0:
        m_prime, m = -m_prime, -m
    return m_prime, m


def _log_term(n: int, mp: int, m: int, s: int, c: float, sn: float) -> float:
    """ln of rho * h for summation index s (the largest-term estimate without n-m+1)."""
    lg = math.lgamma
    log_rho = 0.5 * (lg(n + m + 1.0) + lg(n - m + 1.0) + lg(n + mp + 1.0) + lg(n - mp + 1.0))
    log_den = lg(s + 1.0) + lg(n - mp - s + 1.0) + lg(n - m - s + 1.0) + lg(mp + m + s + 1.0)
    pc = 2 * s + m + mp
    ps = 2 * n - 2 * s - m - mp
    out = log_rho - log_den
    # 0 * log(0) = 0 so that vanishing powers of a zero half-angle drop out
    return float(out + xlogy(pc, c) + xlogy(ps, sn))


def bound_b12(n: int, m_prime: int, m: int, beta: float) -> float:
    """Upper bound on |H_n^{m'm}(beta)| from the largest term of the direct sum."""
    if abs(m) > n or abs(m_prime) > n:
        raise ValueError(f"indices out of range: n={n}, m'={m_prime}, m={m}")
    b = math.remainder(float(beta), 2.0 * math.pi)
    b = abs(b)
    if b > 0.5 * math.pi:
        b = math.pi - b
        m_prime = -m_prime
    mp, m = _reduce_indices(m_prime, m)
    half = 0.5 * b
    c, s = math.cos(half), math.sin(half)
    t2 = (s / c) ** 2
    # smallest root of (1-t^2) x^2 - B x + C = 0 in cancellation-free form
    big_b = (2 * n - m - mp) + t2 * (m + mp + 2)
    big_c = (n - mp) * (n - m) - t2 * (m + mp + 1)
    disc = max(big_b * big_b - 4.0 * (1.0 - t2) * big_c, 0.0)
    root = 2.0 * big_c / (big_b + math.sqrt(disc)) if big_b > 0.0 else 0.0
    top = n - m
    if root < 0.0:
        candidates = [0]
    else:
        # the terms rise while their ratio exceeds 1, so the peak is at
        # floor(root) or the next index
        lo = min(int(math.floor(root)), top)
        candidates = sorted({lo, min(lo + 1, top)})
    best = max(_log_term(n, mp, m, k, c, s) for k in candidates)
    value = math.log(top + 1.0) + best
    return 1.0 if value >= 0.0 else math.exp(value)


def bound_table(n: int, beta: float) -> np.ndarray:
    """bound_b12 over the triangle, in storage order (vectorized)."""
    if n < 0:
        raise ValueError(f"degree must be non-negative, got {n}")
    mp, m = (a.astype(np.float64) for a in triangle_order(n))
    b = abs(math.remainder(float(beta), 2.0 * math.pi))
    if b > 0.5 * math.pi:
        b = math.pi - b
        mp = -mp
    swap = np.abs(m) < np.abs(mp)
    mp, m = np.where(swap, m, mp), np.where(swap, mp, m)
    flip = m < 0
    mp, m = np.where(flip, -mp, mp), np.where(flip, -m, m)
    half = 0.5 * b
    c, s = math.cos(half), math.sin(half)
    t2 = (s / c) ** 2
    big_b = (2 * n - m - mp) + t2 * (m + mp + 2)
    big_c = (n - mp) * (n - m) - t2 * (m + mp + 1)
    disc = np.maximum(big_b * big_b - 4.0 * (1.0 - t2) * big_c, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        root = np.where(big_b > 0.0, 2.0 * big_c / (big_b + np.sqrt(disc)), 0.0)
    top = n - m
    lo = np.where(root < 0.0, 0.0, np.minimum(np.floor(root), top))
    hi = np.where(root < 0.0, 0.0, np.minimum(lo + 1.0, top))
    log_rho = 0.5 * (gammaln(n + m + 1.0) + gammaln(n - m + 1.0)
                     + gammaln(n + mp + 1.0) + gammaln(n - mp + 1.0))

    def log_term(k):
        den = gammaln(k + 1.0) + gammaln(n - mp - k + 1.0) + gammaln(n - m - k + 1.0) + gammaln(mp + m + k + 1.0)
        return log_rho - den + xlogy(2 * k + m + mp, c) + xlogy(2 * n - 2 * k - m - mp, s)

    value = np.log(top + 1.0) + np.maximum(log_term(lo), log_term(hi))
    return np.where(value >= 0.0, 1.0, np.exp(np.minimum(value, 0.0)))


# ---------------------------------------------------------------- asymptotics

def _reduce_fractions(mu: float, mu_prime: float, beta: float) -> tuple[float, float, float]:
    b = abs(math.remainder(float(beta), 2.0 * math.pi))
    if b > 0.5 * math.pi:
        b = math.pi - b
        mu_prime = -mu_prime
    if abs(mu) < abs(mu_prime):
        mu, mu_prime = mu_prime, mu
    if mu < 0.0:
        mu, mu_prime = -mu, -mu_prime
    return mu, mu_prime, b


def lambda_exponent(mu: float, mu_prime: float, beta: float) -> float:
    """Exponential rate of the bound in n at fixed index fractions m/n, m'/n.

    Negative values mark the region where the coefficients decay like exp(lambda n).
    """
    mu, mp, b = _reduce_fractions(float(mu), float(mu_prime), beta)
    if not (0.0 <= mu <= 1.0 and -mu <= mp <= mu):
        raise ValueError(f"fractions out of range: mu={mu}, mu'={mp}")
    half = 0.5 * b
    cos_h, sin_h = math.cos(half), math.sin(half)
    t2 = (sin_h / cos_h) ** 2
    u = 1.0 - t2
    lead = 2.0 - u * (mu + mp)
    disc = max(lead * lead - 4.0 * u * (1.0 - mu) * (1.0 - mp), 0.0)
    denom = lead + math.sqrt(disc)
    xi = 2.0 * (1.0 - mu) * (1.0 - mp) / denom if denom > 0.0 else 0.0
    xi = min(max(xi, 0.0), 1.0 - mu)

    def xlx(v: float) -> float:
        return float(xlogy(v, v)) if v > 0.0 else 0.0

    lam = 0.5 * (xlx(1.0 - mu) + xlx(1.0 - mp) + xlx(1.0 + mu) + xlx(1.0 + mp))
    lam -= xlx(xi) + xlx(mu + mp + xi) + xlx(1.0 - mu - xi) + xlx(1.0 - mp - xi)
    lam += float(xlogy(mu + mp + 2.0 * xi, cos_h))
    lam += float(xlogy(2.0 - mu - mp - 2.0 * xi, sin_h))
    return lam


class Region(str, enum.Enum):
    INSIDE = "inside"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


def ellipse_value(mu: float, mu_prime: float, beta: float) -> float:
    """Left side of the turning-point ellipse; 1 on the curve itself."""
    cos2 = math.cos(0.5 * beta) ** 2
    sin2 = math.sin(0.5 * beta) ** 2
    plus = (mu + mu_prime) ** 2
    minus = (mu - mu_prime) ** 2
    a = plus / (4.0 * cos2) if cos2 > 0.0 else (0.0 if plus == 0.0 else math.inf)
    b = minus / (4.0 * sin2) if sin2 > 0.0 else (0.0 if minus == 0.0 else math.inf)
    return a + b


def ellipse_contains(mu: float, mu_prime: float, beta: float, tol: float = 1e-12) -> Region:
    v = ellipse_value(mu, mu_prime, beta)
    if abs(v - 1.0) <= tol:
        return Region.BOUNDARY
    return Region.INSIDE if v < 1.0 else Region.OUTSIDE


def k_coeff(n: int, m: int) -> float:
    return 0.5 * (coeff_d(n, m - 1) + coeff_d(n, m))


def cfl_speed(n: int, m: int, m_prime: int) -> float:
    """Propagation speed of the same-degree recursion when marching in m'."""
    denom = k_coeff(n, m_prime)
    if denom == 0.0:
        raise ZeroDivisionError(f"speed undefined at m'={m_prime} (zero coefficient)")
    return k_coeff(n, m) / denom


# ---------------------------------------------------------------- error metrics

def _as_dense_or_triangle(obj) -> tuple[int, np.ndarray | None, CoeffTriangle | None]:
    if isinstance(obj, CoeffTriangle):
        return obj.n, None, obj
    arr = np.asarray(obj, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] % 2 == 0:
        raise ValueError(f"expected a square (2n+1)x(2n+1) matrix, got {arr.shape}")
    return (arr.shape[0] - 1) // 2, arr, None


def unitarity_error(obj, n: int | None = None, block: int = 512) -> float:
    """max |sum_nu H^{m' nu} H^{nu m} - delta_{m'm}| over all indices.

    For a triangle the square is symmetric and invariant under
    (m', m) -> (-m', -m), and so is its product with itself; only rows
    m' >= 0 and columns at or right of the diagonal are formed.  Rows are
    processed in blocks to bound the temporary memory.
    """
    deg, dense, tri = _as_dense_or_triangle(obj)
    if n is not None and n != deg:
        raise ValueError(f"degree mismatch: object has {deg}, expected {n}")
    first = 0
    symmetric = dense is None
    if symmetric:
        dense = full_matrix(tri)
        first = deg
    worst = 0.0
    size = 2 * deg + 1
    for lo in range(first, size, block):
        hi = min(lo + block, size)
        if symmetric:
            # the square equals its transpose; a row slice keeps the product contiguous
            left = lo
            prod = dense[lo:hi] @ dense[lo:].T
        else:
            left = 0
            prod = dense[lo:hi] @ dense
        idx = np.arange(lo, hi)
        prod[idx - lo, idx - left] -= 1.0
        worst = max(worst, float(np.abs(prod).max()))
    return worst


def cross_error(a: CoeffTriangle, b: CoeffTriangle, beta_tol: float = 1e-14) -> float:
    """Max elementwise difference over the full square.

    Every square entry is some triangle entry, so the triangle maximum is
    the square maximum.
    """
    if a.n != b.n:
        raise ValueError(f"degree mismatch: {a.n} vs {b.n}")
    if abs(a.beta - b.beta) > beta_tol:
        raise ValueError(f"angle mismatch: {a.beta!r} vs {b.beta!r}")
    return float(np.abs(a.data - b.data).max())


def kronecker_error(tri: CoeffTriangle) -> float:
    """Distance from the beta = 0 pattern (-1)^{m'} delta_{m'm}."""
    mp, m = triangle_order(tri.n)
    target = np.where(mp == m, np.where(m % 2 == 0, 1.0, -1.0), 0.0)
    return float(np.abs(tri.data - target).max())


def symmetry_errors(n: int, beta: float,
                    engine: Callable[[int, float], CoeffTriangle] = compute_subspace) -> dict[str, float]:
    """Worst violation of each coefficient symmetry for one (n, beta).

    The first two relations are checked on a full-square rebuild from the
    engine's pi/2 output, which does not impose them; the third compares runs
    at beta and pi - beta, the fourth a rebuild at -beta against the engine.
    """
    tri = engine(n, beta)
    half = engine(n, 0.5 * math.pi)
    square = flip_reconstruct_dense(half, n, beta)
    swap = float(np.abs(square - square.T).max())
    negate = float(np.abs(square - square[::-1, ::-1]).max())

    mp, m = triangle_order(n)
    other = engine(n, math.pi - beta)
    sign = np.where((n + mp + m) % 2 == 0, 1.0, -1.0)
    mirrored = full_matrix(tri)[n - mp, n + m]
    supplement = float(np.abs(other.data - sign * mirrored).max())

    neg = flip_reconstruct_dense(half, n, -beta)
    parity = np.where((mp + m) % 2 == 0, 1.0, -1.0)
    reflect = float(np.abs(neg[mp + n, m + n] - parity * tri.data).max())
    return {"swap": swap, "negate": negate, "supplement": supplement, "reflect": reflect}


# ---------------------------------------------------------------- experiments

@dataclass(frozen=True)
class ExperimentRecord:
    n: int
    beta: float | None
    metric: str
    value: float
    wall_seconds: float
    seed: int | None = None

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"non-finite value for {self.metric} at n={self.n}")


@dataclass(frozen=True)
class NoiseModel:
    kind: str
    seed: int = 0
    trials: int = 10

    def __post_init__(self):
        if self.kind not in ("uniform", "coherent"):
            raise ValueError(f"unknown noise model {self.kind!r}")
        if self.trials < 1:
            raise ValueError("need at least one trial")


def _noise_seed(model: NoiseModel, n: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([model.seed, n])


def noise_triangle(n: int, kind: str, rng: np.random.Generator) -> tuple[np.ndarray, float]:
    """Propagate random initial layers through both sweeps; returns (triangle, initial max)."""
    data = np.zeros((n + 1) ** 2)
    m0 = np.arange(n + 1)
    m1 = np.arange(1, n + 1)
    if kind == "uniform":
        layer0 = rng.uniform(-1.0, 1.0, n + 1)
        layer1 = rng.uniform(-1.0, 1.0, n)
    else:
        layer0 = rng.uniform(0.0, 1.0, n + 1)
        layer1 = rng.uniform(0.0, 1.0, n) * np.where(m1 % 2 == 0, 1.0, -1.0)
    data[m0 * m0 + m0] = layer0
    data[m1 * m1 + m1 + 1] = layer1
    initial = max(float(np.abs(layer0).max()), float(np.abs(layer1).max()))
    _kernels.sweep(n, data, coeff_d_array(n))
    return data, initial


def noise_amplification(n: int, model: NoiseModel) -> float:
    """Worst growth of O(1) noise through the sweeps, over the model's trials."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    worst = 0.0
    for child in _noise_seed(model, n).spawn(model.trials):
        data, initial = noise_triangle(n, model.kind, np.random.default_rng(child))
        worst = max(worst, float(np.abs(data).max()) / initial)
    return worst


def noise_grid(n: int, model: NoiseModel) -> np.ndarray:
    """|eta| over the full (2n+1)^2 square for the first realization."""
    child = _noise_seed(model, n).spawn(1)[0]
    data, _ = noise_triangle(n, model.kind, np.random.default_rng(child))
    return np.abs(_kernels.expand_rows(n, data, -n, n))


def fit_power_law(points: Iterable[tuple[float, float]]) -> float:
    """Least-squares slope of log(value) against log(n)."""
    pts = np.asarray(list(points), dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise ValueError("need at least two (n, value) points")
    if np.any(pts <= 0.0):
        raise ValueError("power-law fit needs positive n and values")
    return float(np.polyfit(np.log(pts[:, 0]), np.log(pts[:, 1]), 1)[0])


def benchmark(engine: str, n_list: Sequence[int], beta: float, repeats: int = 3) -> list[ExperimentRecord]:
    """Median wall time per degree; outputs are checksummed then dropped."""
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; choose from {sorted(ENGINES)}")
    if repeats < 1:
        raise ValueError("need at least one repeat")
    fn = ENGINES[engine]
    fn(2, beta)  # compile and warm caches outside the timed region
    records = []
    for n in n_list:
        times = []
        checksum = None
        for _ in range(repeats):
            t0 = time.perf_counter()
            tri = fn(n, beta)
            times.append(time.perf_counter() - t0)
            digest = float(np.sum(tri.data))
            if checksum is not None and digest != checksum:
                raise RuntimeError(f"{engine} is not deterministic at n={n}")
            checksum = digest
        records.append(ExperimentRecord(n, beta, f"seconds:{engine}", float(np.median(times)),
                                        float(np.sum(times))))
    return records


# ---------------------------------------------------------------- decay maps

@dataclass(frozen=True)
class DecayCell:
    mu_prime: float
    mu: float
    log10_abs: float
    lam: float
    region: Region
    m_prime: int = field(default=0)
    m: int = field(default=0)


def decay_map(n: int, beta: float, grid: int, tri: CoeffTriangle | None = None) -> list[DecayCell]:
    """Magnitude, decay exponent and ellipse region on a grid over the index square."""
    if grid < 3 or grid % 2 == 0:
        raise ValueError(f"grid size must be odd and at least 3, got {grid}")
    if tri is None:
        b = abs(math.remainder(float(beta), 2.0 * math.pi))
        tri = compute_subspace(n, b)
    fractions = np.linspace(-1.0, 1.0, grid)
    idx = np.rint(fractions * n).astype(int)
    cells = []
    for mu, m in zip(fractions, idx):
        for mu_p, mp in zip(fractions, idx):
            h = abs(tri.get(int(mp), int(m)))
            cells.append(DecayCell(float(mu_p), float(mu), math.log10(max(h, 5e-324)),
                                   lambda_exponent(m / n, mp / n, beta),
                                   ellipse_contains(m / n, mp / n, beta), int(mp), int(m)))
    return cells


__all__ = [
    "ENGINES", "ExperimentRecord", "NoiseModel", "Region", "DecayCell",
    "bound_b12", "bound_table", "lambda_exponent", "ellipse_value", "ellipse_contains",
    "k_coeff", "cfl_speed", "unitarity_error", "cross_error", "kronecker_error",
    "symmetry_errors", "noise_triangle", "noise_amplification", "noise_grid",
    "fit_power_law", "benchmark", "decay_map",
]

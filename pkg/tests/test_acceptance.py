import math
import time
import warnings

import numpy as np
import pytest

from wigrot.analysis import (
    NoiseModel,
    benchmark,
    bound_table,
    cross_error,
    ellipse_value,
    fit_power_law,
    kronecker_error,
    lambda_exponent,
    noise_amplification,
    symmetry_errors,
    unitarity_error,
)
from wigrot.fft import FFTAccuracyWarning, compute_subspace_fft_modified
from wigrot.oracle import flip_reconstruct, h_direct_dense
from wigrot.recursion import compute_subspace, triangle_order
from wigrot.rotation import RotationAngles, SHExpansion, rotate_expansion

QUARTER, HALF, THREE_QUARTER = 0.25 * math.pi, 0.5 * math.pi, 0.75 * math.pi
ORACLE_BETAS = (0.1, QUARTER, HALF, THREE_QUARTER, math.pi - 0.1)
UNITARITY_BETAS = (0.0, QUARTER, HALF, THREE_QUARTER, math.pi)


def fft_modified(n, beta):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FFTAccuracyWarning)
        return compute_subspace_fft_modified(n, beta)


def test_oracle_equivalence(criterion):
    for beta in ORACLE_BETAS:  # build the oracle's per-degree tables outside the timed region
        h_direct_dense(1, beta)
    [h_direct_dense(n, 0.3) for n in range(17)]
    t0 = time.perf_counter()
    worst = max(float(np.abs(compute_subspace(n, beta).to_dense() - h_direct_dense(n, beta)).max())
                for beta in ORACLE_BETAS for n in range(17))
    elapsed = time.perf_counter() - t0
    ok = criterion(1, worst <= 1e-12 and elapsed < 1.0,
                   f"oracle max {worst:.2e} (<= 1e-12), {elapsed:.3f} s for 85 cases")
    assert ok


@pytest.mark.slow
def test_recursive_unitarity(criterion):
    low = max(unitarity_error(compute_subspace(n, b)) for b in UNITARITY_BETAS for n in range(65))
    high = max(unitarity_error(compute_subspace(n, b)) for b in UNITARITY_BETAS for n in range(65, 1025))
    ok = criterion(2, low <= 1e-12 and high <= 1e-10,
                   f"n<=64 max {low:.2e} (<= 1e-12), 64<n<=1024 max {high:.2e} (<= 1e-10)")
    assert ok


@pytest.mark.slow
def test_fft_unitarity(criterion):
    worst = max(unitarity_error(fft_modified(n, QUARTER)) for n in range(1, 1025))
    ok = criterion(3, worst <= 1e-7, f"fft-modified n<=1024 at pi/4 max {worst:.2e} (<= 1e-7)")
    assert ok


@pytest.mark.slow
def test_cross_validation(criterion):
    worst = max(cross_error(compute_subspace(n, b), fft_modified(n, b))
                for b in (QUARTER, HALF, THREE_QUARTER) for n in range(1, 513))
    ok = criterion(4, worst <= 1e-7, f"recursive vs fft-modified n<=512 max {worst:.2e} (<= 1e-7)")
    assert ok


def test_flip_reconstruction(criterion):
    worst = 0.0
    for n in range(129):
        half = compute_subspace(n, HALF)
        for beta in (0.1, QUARTER, HALF, 2.0, THREE_QUARTER, math.pi - 0.1):
            worst = max(worst, cross_error(compute_subspace(n, beta), flip_reconstruct(half, n, beta)))
    ok = criterion(5, worst <= 1e-10, f"rebuild from pi/2, n<=128 max {worst:.2e} (<= 1e-10)")
    assert ok


@pytest.mark.slow
def test_symmetry_suite(criterion):
    worst = {}
    for beta in (0.7, 2.2):
        for n in range(257):
            for name, err in symmetry_errors(n, beta).items():
                worst[name] = max(worst.get(name, 0.0), err)
    identity = max(kronecker_error(compute_subspace(n, 0.0)) for n in range(257))
    ok = criterion(6, max(worst.values()) <= 1e-10 and identity <= 1e-13,
                   ", ".join(f"{k} {v:.1e}" for k, v in sorted(worst.items()))
                   + f" (<= 1e-10), identity {identity:.1e} (<= 1e-13)")
    assert ok


def test_bound_compliance(criterion):
    excess, gap = 0.0, 0.0
    for beta in ORACLE_BETAS:
        for n in range(129):
            h = np.abs(compute_subspace(n, beta).data)
            bound = bound_table(n, beta)
            excess = max(excess, float(np.max(h - np.minimum(1.0, bound))))
            gap = max(gap, float(np.max(np.abs(bound[n * n:] - h[n * n:]))))
    ok = criterion(7, excess <= 1e-12 and gap <= 1e-12,
                   f"max excess {excess:.1e} (<= 1e-12), m=n equality gap {gap:.1e} (<= 1e-12)")
    assert ok


def test_noise_trend(criterion):
    degrees = (64, 128, 256, 512, 1024)
    growth = {kind: [noise_amplification(n, NoiseModel(kind, seed=0, trials=10)) for n in degrees]
              for kind in ("uniform", "coherent")}
    exponent = {kind: fit_power_law(zip(degrees, g)) for kind, g in growth.items()}
    capped = all(g <= 10.0 * n ** 0.7 for gs in growth.values() for n, g in zip(degrees, gs))
    ok = criterion(8, 0.3 <= exponent["coherent"] <= 0.7
                   and exponent["uniform"] <= exponent["coherent"] and capped,
                   f"coherent exponent {exponent['coherent']:.3f} in [0.3, 0.7], "
                   f"uniform {exponent['uniform']:.3f}, growth within 10 n^0.7: {capped}")
    assert ok


def test_decay_region(criterion):
    n, beta = 100, QUARTER
    h = np.abs(compute_subspace(n, beta).data)
    mp, m = triangle_order(n)
    mu, mu_p = m / n, mp / n
    lam = np.array([lambda_exponent(a, b, beta) for a, b in zip(mu, mu_p)])
    inside = np.array([ellipse_value(a, b, beta) <= 1.0 for a, b in zip(mu, mu_p)])
    violations = int(np.count_nonzero((lam <= -0.2) & (h >= 1e-6)))
    # mass of every stored entry with |H| >= 1e-6, weighted by |H|^2
    mass = np.where(h >= 1e-6, h * h, 0.0)
    fraction = float(mass[inside].sum() / mass.sum())
    by_count = float(np.count_nonzero(inside & (h >= 1e-6)) / np.count_nonzero(h >= 1e-6))
    ok = criterion(9, violations == 0 and fraction >= 0.99,
                   f"{violations} decay violations (0), interior mass fraction {fraction:.4f} (>= 0.99), "
                   f"by count {by_count:.4f}")
    assert ok


@pytest.mark.slow
def test_performance_scaling(criterion):
    t = {r.n: r.value for r in benchmark("recursive", [1024, 2048, 4096], QUARTER, repeats=5)}
    ratios = (t[2048] / t[1024], t[4096] / t[2048])
    t0 = time.perf_counter()
    big = compute_subspace(8192, QUARTER)
    t_big = time.perf_counter() - t0
    err = unitarity_error(big)
    ok = criterion(10, all(3.0 <= r <= 6.0 for r in ratios) and t[4096] <= 10.0 and err <= 1e-9,
                   f"ratios {ratios[0]:.2f}, {ratios[1]:.2f} in [3, 6], n=4096 {t[4096]:.2f} s (<= 10), "
                   f"n=8192 {t_big:.2f} s unitarity {err:.1e} (<= 1e-9)")
    assert ok


def test_rotation_application(criterion):
    rng = np.random.default_rng(2024)
    norm_err, inverse_err = 0.0, 0.0
    for p in range(1, 65):
        f = SHExpansion(p, rng.normal(size=p * p) + 1j * rng.normal(size=p * p))
        angles = RotationAngles(rng.uniform(-math.pi, math.pi), rng.uniform(0.0, math.pi),
                                rng.uniform(-math.pi, math.pi))
        out = rotate_expansion(f, angles)
        for n in range(p):
            a, b = np.linalg.norm(out.degree(n)), np.linalg.norm(f.degree(n))
            norm_err = max(norm_err, abs(a - b) / b)
        back = rotate_expansion(out, angles.inverse())
        inverse_err = max(inverse_err, float(np.abs(back.coeffs - f.coeffs).max()))
    ok = criterion(11, norm_err <= 1e-10 and inverse_err <= 1e-10,
                   f"p<=64 norm {norm_err:.1e}, inverse {inverse_err:.1e} (<= 1e-10)")
    assert ok

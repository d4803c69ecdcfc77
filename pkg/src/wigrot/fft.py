"""Rotation coefficients from the Fourier spectrum of rotated spherical harmonics.

Rotating Y_n^m by beta and restricting it to a circle of constant polar angle
gives a trigonometric polynomial of degree n in the azimuth.  Its 2n + 1
Fourier coefficients are H_n^{m'm}(beta) times known scale factors, so any
uniform sampling with at least 2n + 1 nodes recovers them exactly.

Two samplings are offered.  The basic one uses a circle slightly off the
equator.  The modified one stays on the equator and adds a multiple of the
polar derivative, which fills in the orders whose Legendre value vanishes there.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.fft

from wigrot._kernels import legendre_degree
from wigrot.recursion import CoeffTriangle, _check_beta, layer_m0
from wigrot.special import log_factorial_ratio, log_legendre_at_zero

UNDERFLOW_LIMIT = 1e-250
RELIABLE_DEGREE = 2000


class FFTAccuracyWarning(UserWarning):
    """The spectral method is known to lose accuracy at this degree."""


@dataclass(frozen=True)
class RotatedAngles:
    theta: float
    phi: float


@dataclass(frozen=True)
class SpectrumLine:
    """Fourier coefficients for one column m, indexed m' = -n..n."""

    n: int
    m: int
    values: np.ndarray


def _rotate_cartesian(beta: float, theta_hat: float, phi_hat):
    sb, cb = math.sin(beta), math.cos(beta)
    st, ct = math.sin(theta_hat), math.cos(theta_hat)
    cp, sp = np.cos(phi_hat), np.sin(phi_hat)
    x = -cb * st * cp + sb * ct
    y = -st * sp
    z = sb * st * cp + cb * ct
    return x, y, z


def rotate_point(beta: float, theta_hat: float, phi_hat: float) -> RotatedAngles:
    """Spherical angles of the image of (theta_hat, phi_hat) under the rotation."""
    _check_beta(beta)
    x, y, z = _rotate_cartesian(beta, theta_hat, phi_hat)
    rho = math.hypot(float(x), float(y))
    theta = math.atan2(rho, float(z))
    if rho < 1e-300:
        return RotatedAngles(theta, 0.0)
    phi = math.atan2(float(y), float(x)) % (2.0 * math.pi)
    # a tiny negative angle rounds up to exactly 2 pi
    return RotatedAngles(theta, 0.0 if phi >= 2.0 * math.pi else phi)


def default_length(n: int) -> int:
    return scipy.fft.next_fast_len(2 * n + 2)


def _nodes(length: int) -> np.ndarray:
    return 2.0 * math.pi * np.arange(length) / length


def _exact_trig(length: int) -> tuple[np.ndarray, np.ndarray]:
    """cos and sin at the uniform nodes, with exact zeros on the axes."""
    phi = _nodes(length)
    c, s = np.cos(phi), np.sin(phi)
    j = np.arange(length)
    s[(2 * j) % length == 0] = 0.0
    c[(4 * j == length) | (4 * j == 3 * length)] = 0.0
    return c, s


def _spectrum(samples: np.ndarray, n: int) -> np.ndarray:
    """Rows m' = -n..n of the normalized forward transform along axis 0."""
    length = samples.shape[0]
    coeffs = scipy.fft.fft(samples, axis=0) / length
    return coeffs[np.arange(-n, n + 1) % length]


def _phase_powers(e1: np.ndarray, n: int) -> np.ndarray:
    """e1**m for m = 0..n as columns, from the unit phase e1."""
    phi = np.angle(e1)
    m = np.arange(n + 1)
    return np.exp(1j * np.outer(phi, m))


def _triangle_from_columns(n: int, beta: float, cols: np.ndarray) -> CoeffTriangle:
    """Assemble from m = 0 closed form plus columns H[m'+n, m-1], m = 1..n."""
    data = np.empty((n + 1) ** 2)
    data[0] = layer_m0(n, beta)[0] if n else 1.0
    for m in range(1, n + 1):
        start = m * m
        data[start:start + 2 * m + 1] = cols[n - m:n + m + 1, m - 1]
    return CoeffTriangle(n, beta, data)


def default_theta_hat(n: int) -> float:
    """Polar angle of the sampling circle for the basic variant."""
    theta = 0.5 * math.pi - 0.55 / max(n, 1)
    for _ in range(16):
        q = legendre_degree(n, np.array([math.cos(theta)]), np.array([math.sin(theta)]))[0]
        if np.min(np.abs(q)) >= UNDERFLOW_LIMIT:
            return theta
        theta -= 0.1 / max(n, 1)
    raise ArithmeticError(f"no well-conditioned sampling circle found for degree {n}")


def basic_complex(n: int, beta: float, theta_hat: float | None = None,
                  length: int | None = None) -> np.ndarray:
    """Complex estimates of H^{m'm}: rows m' = -n..n, columns m = 1..n."""
    beta = _check_beta(beta)
    if theta_hat is None:
        theta_hat = default_theta_hat(n)
    length = default_length(n) if length is None else length
    if length < 2 * n + 1:
        raise ValueError(f"need at least {2 * n + 1} samples, got {length}")
    divisor = legendre_degree(n, np.array([math.cos(theta_hat)]), np.array([math.sin(theta_hat)]))[0]
    if np.min(np.abs(divisor)) < UNDERFLOW_LIMIT:
        raise ArithmeticError(f"theta_hat={theta_hat!r} puts a Legendre divisor below {UNDERFLOW_LIMIT}")
    x, y, z = _rotate_cartesian(beta, theta_hat, _nodes(length))
    rho = np.hypot(x, y)
    q = legendre_degree(n, np.clip(z, -1.0, 1.0), rho)
    e1 = np.where(rho > 1e-300, (x + 1j * y) / np.where(rho > 1e-300, rho, 1.0), 1.0)
    samples = q[:, 1:] * _phase_powers(e1, n)[:, 1:]
    coeffs = _spectrum(samples, n)
    mp = np.arange(-n, n + 1)
    m = np.arange(1, n + 1)
    sign = np.where((mp[:, None] + m[None, :]) % 2 == 0, 1.0, -1.0)
    return sign * coeffs / divisor[np.abs(mp)][:, None]


def compute_subspace_fft_basic(n: int, beta: float, theta_hat: float | None = None,
                               length: int | None = None) -> CoeffTriangle:
    beta = _check_beta(beta)
    if n == 0:
        return CoeffTriangle(0, beta, np.ones(1))
    return _triangle_from_columns(n, beta, basic_complex(n, beta, theta_hat, length).real)


def _is_right_angle(beta: float) -> bool:
    return abs(beta - 0.5 * math.pi) <= 4.5e-16


def _modified_samples(n: int, beta: float, gamma: float, cos_phi: np.ndarray,
                      sin_phi: np.ndarray, orders: np.ndarray) -> np.ndarray:
    """g_n^m at the given azimuths for the requested orders (columns)."""
    norm = math.sqrt((2 * n + 1) / (4.0 * math.pi))
    if _is_right_angle(beta):
        return norm * _right_angle_samples(n, gamma, cos_phi, sin_phi, orders)
    sb, cb = math.sin(beta), math.cos(beta)
    x = sb * cos_phi
    s_x = np.sqrt((cb * cos_phi) ** 2 + sin_phi ** 2)
    q = legendre_degree(n, x, s_x)
    e1 = (-cb * cos_phi - 1j * sin_phi) / s_x
    phases = _phase_powers(e1, n)
    m = orders.astype(np.float64)
    q_m = q[:, orders]
    q_lo = q[:, orders - 1]
    lower = np.sqrt((n + m) * (n - m + 1)) * cb * q_lo
    bracket = q_m - gamma / s_x[:, None] * (lower - m * e1[:, None] * sb * q_m)
    sign = np.where(orders % 2 == 0, 1.0, -1.0)
    return norm * sign * phases[:, orders] * bracket


def _right_angle_samples(n: int, gamma: float, cos_phi: np.ndarray, sin_phi: np.ndarray,
                         orders: np.ndarray) -> np.ndarray:
    abs_sin = np.abs(sin_phi)
    q = legendre_degree(n, cos_phi, abs_sin)
    m = orders.astype(np.float64)
    regular = abs_sin > 0.0
    safe_sin = np.where(regular, sin_phi, 1.0)
    rot = np.where(sin_phi < 0.0, -1j, 1j)
    phase = rot[:, None] ** orders[None, :]
    out = phase * (1.0 - 1j * gamma * m[None, :] / safe_sin[:, None]) * q[:, orders]
    # removable singularity on the axis: only m = 1 survives, with limit
    # -gamma sqrt(n(n+1))/2 at cos = 1 and (-1)^n times that at cos = -1
    limit = 0.5 * gamma * math.sqrt(n * (n + 1.0))
    axis = ~regular
    out[axis, :] = 0.0
    if np.any(axis) and orders.size and orders[0] == 1:
        out[axis, 0] = np.where(cos_phi[axis] > 0.0, -limit, limit * (-1.0) ** n)
    return out


def sample_g_modified(n: int, m: int, beta: float, gamma_nm: float, phi_hat: float) -> complex:
    """One sample of the derivative-augmented rotated harmonic."""
    _check_beta(beta)
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got n={n}, m={m}")
    if gamma_nm == 0.0:
        raise ValueError("the derivative weight must be nonzero")
    phi = float(phi_hat)
    c, s = math.cos(phi), math.sin(phi)
    k = phi / math.pi
    if k == round(k):
        s = 0.0
        c = 1.0 if round(k) % 2 == 0 else -1.0
    return complex(_modified_samples(n, beta, gamma_nm, np.array([c]), np.array([s]),
                                     np.array([m]))[0, 0])


def spectrum_scale_K(n: int, m_prime: int, gamma_nm: float) -> float:
    """Ratio between the modified spectrum and H_n^{m'm}; independent of m."""
    k = abs(m_prime)
    if k > n:
        raise ValueError(f"|m'| must not exceed n={n}")
    if gamma_nm == 0.0:
        raise ValueError("the derivative weight must be nonzero")
    base = 0.5 * (math.log((2 * n + 1) / (4.0 * math.pi)) + log_factorial_ratio(n, k))
    parity = -1.0 if m_prime % 2 else 1.0
    if (n + k) % 2 == 0:
        sign, log_p = log_legendre_at_zero(n, k)
        return parity * sign * math.exp(base + log_p)
    if k == 0:
        # P_n^{-1} = -P_n^1 / (n (n+1)); the factor n (n+1) cancels
        sign, log_p = log_legendre_at_zero(n, 1)
        sign = -sign
        log_w = 0.0
    else:
        sign, log_p = log_legendre_at_zero(n, k - 1)
        log_w = math.log((n + k) * (n - k + 1.0))
    if sign == 0:
        raise ArithmeticError(f"degenerate scale factor at n={n}, m'={m_prime}")
    return -parity * sign * gamma_nm * math.exp(base + log_w + log_p)


def scale_factors(n: int, gamma: float) -> np.ndarray:
    return np.array([spectrum_scale_K(n, mp, gamma) for mp in range(-n, n + 1)])


def modified_complex(n: int, beta: float, gamma: float | None = None,
                     length: int | None = None) -> np.ndarray:
    """Complex estimates G/K of H^{m'm}: rows m' = -n..n, columns m = 1..n."""
    beta = _check_beta(beta)
    if n > RELIABLE_DEGREE:
        warnings.warn(f"spectral coefficients at degree {n} may lose accuracy",
                      FFTAccuracyWarning, stacklevel=2)
    gamma = 1.0 / n if gamma is None else gamma
    length = default_length(n) if length is None else length
    if length < 2 * n + 1:
        raise ValueError(f"need at least {2 * n + 1} samples, got {length}")
    cos_phi, sin_phi = _exact_trig(length)
    samples = _modified_samples(n, beta, gamma, cos_phi, sin_phi, np.arange(1, n + 1))
    return _spectrum(samples, n) / scale_factors(n, gamma)[:, None]


def spectrum_line(n: int, m: int, beta: float, gamma: float | None = None) -> SpectrumLine:
    """Raw modified-variant coefficients G_n^{m'm} for a single column."""
    beta = _check_beta(beta)
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got n={n}, m={m}")
    gamma = 1.0 / n if gamma is None else gamma
    cos_phi, sin_phi = _exact_trig(default_length(n))
    samples = _modified_samples(n, beta, gamma, cos_phi, sin_phi, np.array([m]))
    return SpectrumLine(n, m, _spectrum(samples, n)[:, 0])


def compute_subspace_fft_modified(n: int, beta: float, gamma: float | None = None,
                                  length: int | None = None) -> CoeffTriangle:
    beta = _check_beta(beta)
    if n == 0:
        return CoeffTriangle(0, beta, np.ones(1))
    return _triangle_from_columns(n, beta, modified_complex(n, beta, gamma, length).real)

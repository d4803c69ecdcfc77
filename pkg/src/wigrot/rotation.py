"""Applying rotation coefficients to spherical-harmonic expansions.

Angles follow the (alpha, beta, gamma) convention in which (beta, alpha) are
the spherical angles of the rotated z axis in the original frame and
(beta, gamma) those of the original z axis in the rotated frame.  The usual
z-y-z Euler angles map to it by gamma = pi - gamma_E.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from wigrot.recursion import CoeffTriangle, compute_subspace, full_matrix

TWO_PI = 2.0 * math.pi


def _wrap(angle: float) -> float:
    a = math.fmod(float(angle), TWO_PI)
    if a < 0.0:
        a += TWO_PI
    # fmod can return exactly 2*pi after the shift for tiny negative input
    return 0.0 if a >= TWO_PI else a


@dataclass(frozen=True)
class RotationAngles:
    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        if not 0.0 <= self.beta <= math.pi:
            raise ValueError(f"beta must lie in [0, pi], got {self.beta!r}")
        object.__setattr__(self, "alpha", _wrap(self.alpha))
        object.__setattr__(self, "gamma", _wrap(self.gamma))

    def inverse(self) -> "RotationAngles":
        return RotationAngles(self.gamma, self.beta, self.alpha)


def from_euler(alpha_e: float, beta_e: float, gamma_e: float) -> RotationAngles:
    """Convert z-y-z Euler angles (rotate about z, new y, new z)."""
    b = math.fmod(float(beta_e), TWO_PI)
    if b < 0.0:
        b += TWO_PI
    if b > math.pi:
        # Q_y(2 pi - b) = Q_z(pi) Q_y(b) Q_z(pi)
        b = TWO_PI - b
        alpha_e += math.pi
        gamma_e += math.pi
    return RotationAngles(alpha_e, b, math.pi - gamma_e)


def to_euler(angles: RotationAngles) -> tuple[float, float, float]:
    return angles.alpha, angles.beta, _wrap(math.pi - angles.gamma)


def q_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])


def q_y(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])


def a_matrix(gamma: float) -> np.ndarray:
    c, s = math.cos(gamma), math.sin(gamma)
    return np.array([[s, c, 0.0], [-c, s, 0.0], [0.0, 0.0, 1.0]])


def b_matrix(beta: float) -> np.ndarray:
    c, s = math.cos(beta), math.sin(beta)
    return np.array([[-1.0, 0.0, 0.0], [0.0, -c, s], [0.0, s, c]])


def rotation_matrix(angles: RotationAngles) -> np.ndarray:
    """Frame rotation A(gamma) B(beta) A(alpha)^T; its transpose swaps alpha and gamma."""
    return a_matrix(angles.gamma) @ b_matrix(angles.beta) @ a_matrix(angles.alpha).T


def t_element(n: int, m_prime: int, m: int, angles: RotationAngles, h_value: float) -> complex:
    """Full rotation matrix element from the real coefficient H_n^{m'm}(beta)."""
    if abs(m) > n or abs(m_prime) > n:
        raise ValueError(f"indices out of range: n={n}, m'={m_prime}, m={m}")
    return complex(np.exp(-1j * m_prime * angles.gamma) * h_value * np.exp(1j * m * angles.alpha))


@dataclass(frozen=True)
class SHExpansion:
    """Coefficients C_n^m, n < p, stored at n^2 + n + m."""

    p: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.p < 1:
            raise ValueError(f"bandwidth must be at least 1, got {self.p}")
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.shape != (self.p * self.p,):
            raise ValueError(f"bandwidth {self.p} needs {self.p ** 2} coefficients, got {c.shape}")
        object.__setattr__(self, "coeffs", c)

    def degree(self, n: int) -> np.ndarray:
        return self.coeffs[n * n:(n + 1) * (n + 1)]

    def get(self, n: int, m: int) -> complex:
        return complex(self.coeffs[n * n + n + m])


Provider = Callable[[int, float], CoeffTriangle]


def _triangle_for(provider, n: int, beta: float) -> CoeffTriangle:
    if callable(provider):
        tri = provider(n, beta)
    else:
        tri = provider[n]
    if tri.n != n:
        raise ValueError(f"provider returned degree {tri.n} for degree {n}")
    if not math.isclose(tri.beta, beta, rel_tol=0.0, abs_tol=1e-14):
        raise ValueError(f"provider returned beta={tri.beta!r}, expected {beta!r}")
    return tri


def rotate_expansion(f: SHExpansion, angles: RotationAngles,
                     provider: Provider | Sequence[CoeffTriangle] | None = None) -> SHExpansion:
    """Coefficients of the same function in the rotated frame.

    ``provider`` is either a callable (n, beta) -> CoeffTriangle or a
    precomputed sequence indexed by degree; the recursion is the default.
    """
    if provider is None:
        provider = compute_subspace
    if not callable(provider) and len(provider) < f.p:
        raise ValueError(f"provider holds {len(provider)} degrees, expansion needs {f.p}")
    out = np.empty_like(f.coeffs)
    for n in range(f.p):
        h = full_matrix(_triangle_for(provider, n, angles.beta))
        m = np.arange(-n, n + 1)
        col = np.exp(1j * m * angles.alpha) * f.degree(n)
        out[n * n:(n + 1) * (n + 1)] = np.exp(-1j * m * angles.gamma) * (h @ col)
    return SHExpansion(f.p, out)

"""Pure states of two spins S and L on H_s (x) H_l.

Amplitude grids are laid out with m_s on axis 0 and m_l on axis 1, both in
ascending order, so operators on the S factor multiply from the left and
operators on the L factor from the right.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .spin import SpinMagnitude, as_spin, jx_tridiagonal, jy_matrix, x_basis_transform

__all__ = [
    "SpinVector",
    "QuantumState",
    "ReducedDensity",
    "coherent_state",
    "product_state",
    "reduced_density_l",
    "reduced_density_s",
    "spin_moments",
    "spin_vector_moments",
]


@dataclass(frozen=True, eq=False)
class SpinVector:
    j: SpinMagnitude
    amps: np.ndarray

    def expect(self, op: np.ndarray) -> complex:
        return np.vdot(self.amps, op @ self.amps)


@dataclass(frozen=True, eq=False)
class QuantumState:
    s: SpinMagnitude
    l: SpinMagnitude
    amps: np.ndarray

    def __post_init__(self):
        if self.amps.shape != (self.s.dim, self.l.dim):
            raise ValueError(
                f"amplitude grid {self.amps.shape} does not match dims ({self.s.dim}, {self.l.dim})"
            )

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def copy(self) -> "QuantumState":
        return QuantumState(self.s, self.l, self.amps.copy())


@dataclass(frozen=True, eq=False)
class ReducedDensity:
    j: SpinMagnitude
    rho: np.ndarray

    @property
    def purity(self) -> float:
        # Tr rho^2 for Hermitian rho
        return float(np.sum(np.abs(self.rho) ** 2))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.rho)

    def von_neumann_entropy(self) -> float:
        """-Tr rho ln rho in nats, from the spectrum (tiny negatives dropped)."""
        w = self.eigenvalues()
        w = w[w > 1e-300]
        return float(-np.sum(w * np.log(w)))


def coherent_state(j, theta: float, phi: float) -> SpinVector:
    """SU(2) coherent state polarized along (theta, phi), radians.

    Binomial amplitudes evaluated in log space; the m = j amplitude is real
    and non-negative.
    """
    j = as_spin(j)
    if not 0.0 <= theta <= np.pi:
        raise ValueError(f"theta must lie in [0, pi], got {theta}")
    n = j.two_j
    k = np.arange(n + 1)  # k = j + m
    m = j.m_values()
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    # c, s >= 0 on [0, pi]
    logbin = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        logmag = 0.5 * logbin + k * np.log(c) + (n - k) * np.log(s)
    mag = np.exp(logmag)
    # 0**0 = 1 at the poles
    if c == 0.0:
        mag = np.where(k == 0, 1.0, 0.0)
    if s == 0.0:
        mag = np.where(k == n, 1.0, 0.0)
    amps = mag * np.exp(-1j * (m - j.j) * phi)
    amps = amps / np.linalg.norm(amps)
    return SpinVector(j, amps)


def product_state(psi_s: SpinVector, psi_l: SpinVector) -> QuantumState:
    return QuantumState(psi_s.j, psi_l.j, np.outer(psi_s.amps, psi_l.amps))


def reduced_density_l(state: QuantumState) -> ReducedDensity:
    """Partial trace over the S factor."""
    a = state.amps
    return ReducedDensity(state.l, a.T @ a.conj())


def reduced_density_s(state: QuantumState) -> ReducedDensity:
    a = state.amps
    return ReducedDensity(state.s, a @ a.conj().T)


def _component(j: SpinMagnitude, axis: str) -> np.ndarray:
    if axis == "z":
        return np.diag(j.m_values()).astype(complex)
    if axis == "x":
        xb = x_basis_transform(j)
        return (xb.v * xb.eigenvalues) @ xb.v.conj().T
    if axis == "y":
        return jy_matrix(j)
    raise ValueError(f"axis must be one of x, y, z, got {axis!r}")


def spin_moments(state: QuantumState, which: str, axis: str) -> tuple[float, float]:
    """Mean and variance of one spin component in the joint state.

    ``which`` selects the factor ("S" or "L"); ``axis`` is "x", "y" or "z".
    """
    which = which.upper()
    if which == "S":
        j = state.s
    elif which == "L":
        j = state.l
    else:
        raise ValueError(f"which must be 'S' or 'L', got {which!r}")
    a = state.amps
    if axis == "z":
        p = np.sum(np.abs(a) ** 2, axis=1 if which == "S" else 0)
        m = j.m_values()
        mean = float(p @ m)
        return mean, float(p @ (m * m) - mean * mean)
    op = _component(j, axis)
    applied = op @ a if which == "S" else a @ op.T
    mean = float(np.vdot(a, applied).real)
    second = float(np.vdot(applied, applied).real)
    return mean, second - mean * mean


def spin_vector_moments(psi: SpinVector) -> dict[str, complex]:
    """<J_x>, <J_y>, <J_z>, <J_x^2>, <J_y^2>, <J_z^2> and <J_+> for a single spin."""
    j = psi.j
    jx, jy, jz = jx_tridiagonal(j).astype(complex), jy_matrix(j), _component(j, "z")
    out = {}
    for name, op in (("x", jx), ("y", jy), ("z", jz)):
        out[name] = psi.expect(op).real
        out[name + "2"] = psi.expect(op @ op).real
    out["plus"] = psi.expect(jx + 1j * jy)
    return out

"""Angular-momentum kinematics for a single spin j.

Half-integer quantum numbers are carried as doubled integers (``two_j``,
``two_m``) so labels never go through floating-point equality.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction

import numpy as np
from scipy.linalg import eigh_tridiagonal


@dataclass(frozen=True, order=True)
class SpinMagnitude:
    """Spin quantum number j stored as ``two_j = 2j``."""

    two_j: int

    def __post_init__(self):
        if not isinstance(self.two_j, (int, np.integer)) or self.two_j < 0:
            raise ValueError(f"two_j must be a non-negative integer, got {self.two_j!r}")
        object.__setattr__(self, "two_j", int(self.two_j))

    @classmethod
    def from_value(cls, j) -> "SpinMagnitude":
        """Build from j given as int, float or Fraction (must be a multiple of 1/2)."""
        twice = Fraction(j) * 2
        if twice.denominator != 1:
            raise ValueError(f"j must be a non-negative multiple of 1/2, got {j!r}")
        return cls(int(twice))

    @property
    def j(self) -> float:
        return self.two_j / 2

    @property
    def dim(self) -> int:
        return self.two_j + 1

    @property
    def casimir(self) -> float:
        """j(j+1)."""
        return self.j * (self.j + 1.0)

    def two_m_labels(self) -> np.ndarray:
        """Doubled labels 2m = -2j, -2j+2, ..., 2j (ascending)."""
        return np.arange(-self.two_j, self.two_j + 1, 2, dtype=np.int64)

    def m_values(self) -> np.ndarray:
        """Labels m = -j..j as floats (exact for half-integers)."""
        return self.two_m_labels() / 2.0

    def __str__(self):
        return str(self.two_j // 2) if self.two_j % 2 == 0 else f"{self.two_j}/2"


@dataclass(frozen=True)
class MagneticLabel:
    """Magnetic quantum number m stored as ``two_m = 2m``."""

    j: SpinMagnitude
    two_m: int

    def __post_init__(self):
        if abs(self.two_m) > self.j.two_j or (self.two_m - self.j.two_j) % 2:
            raise ValueError(f"2m={self.two_m} is not a valid label for j={self.j}")

    @property
    def m(self) -> float:
        return self.two_m / 2

    @property
    def index(self) -> int:
        """Position in the ascending label array."""
        return (self.two_m + self.j.two_j) // 2


def as_spin(j) -> SpinMagnitude:
    return j if isinstance(j, SpinMagnitude) else SpinMagnitude.from_value(j)


def _ladder_offdiag(j: SpinMagnitude) -> np.ndarray:
    # <m+1|J_+|m> for m = -j..j-1
    m = j.m_values()[:-1]
    return np.sqrt(j.casimir - m * (m + 1.0))


def jx_tridiagonal(j) -> np.ndarray:
    """Dense J_x in the ascending-m basis (real symmetric, tridiagonal)."""
    j = as_spin(j)
    off = 0.5 * _ladder_offdiag(j)
    return np.diag(off, 1) + np.diag(off, -1)


def jy_matrix(j) -> np.ndarray:
    j = as_spin(j)
    off = 0.5 * _ladder_offdiag(j)
    # J_y = (J_+ - J_-)/(2i); J_+ sits below the diagonal in ascending order
    return (np.diag(off, -1) - np.diag(off, 1)) / 1j


def jz_matrix(j) -> np.ndarray:
    return np.diag(as_spin(j).m_values())


@dataclass(frozen=True, eq=False)
class XBasisTransform:
    """Eigenbasis of J_x: ``J_x = v @ diag(eigenvalues) @ v.conj().T``.

    Column k of ``v`` is the J_x eigenvector with eigenvalue ``eigenvalues[k]``
    expressed in the J_z basis. Within each column the largest-magnitude entry
    is real and positive.
    """

    j: SpinMagnitude
    v: np.ndarray
    eigenvalues: np.ndarray = field(repr=False)


@lru_cache(maxsize=64)
def x_basis_transform(j) -> XBasisTransform:
    """Diagonalize J_x for spin j (cached; returned arrays are read-only)."""
    j = as_spin(j)
    d = j.dim
    if d == 1:
        v = np.ones((1, 1), dtype=complex)
        w = np.zeros(1)
    else:
        try:
            w, vr = eigh_tridiagonal(np.zeros(d), 0.5 * _ladder_offdiag(j))
        except np.linalg.LinAlgError as exc:
            raise RuntimeError(f"J_x eigensolver failed to converge for j={j}") from exc
        # largest |entry| of each column made positive
        pivot = vr[np.argmax(np.abs(vr), axis=0), np.arange(d)]
        vr = vr * np.sign(pivot)
        v = vr.astype(complex)
    exact = j.m_values()
    if np.max(np.abs(w - exact)) > 1e-10:
        raise RuntimeError(f"J_x spectrum for j={j} deviates from -j..j")
    v.setflags(write=False)
    exact.setflags(write=False)
    return XBasisTransform(j=j, v=v, eigenvalues=exact)

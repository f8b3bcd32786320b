"""Probability distributions over hbar-width bins: quantum marginals,
binned classical marginals and the microcanonical references.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .classical import Ensemble
from .spin import SpinMagnitude, as_spin, x_basis_transform
from .states import QuantumState

__all__ = [
    "DiscreteDistribution",
    "OBSERVABLES",
    "quantum_plz",
    "quantum_pjz",
    "quantum_plx",
    "quantum_marginal",
    "classical_marginal",
    "microcanonical_plz",
    "microcanonical_pjz",
    "microcanonical_pjz_exact",
    "microcanonical_marginal",
    "pair_count_pjz",
    "label_grid",
    "classical_values",
]

OBSERVABLES = ("lz", "jz", "lx")


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Probabilities on ascending eigenvalue labels.

    ``two_labels`` holds 2m so half-integer labels stay exact. ``overflow``
    is classical mass that fell outside the label range (always 0 for
    quantum distributions).
    """

    two_labels: np.ndarray
    probs: np.ndarray
    overflow: float = 0.0
    observable: str = field(default="", compare=False)

    @property
    def labels(self) -> np.ndarray:
        return self.two_labels / 2.0

    @property
    def total(self) -> float:
        return float(self.probs.sum() + self.overflow)

    def __len__(self):
        return len(self.probs)

    def mean(self) -> float:
        p = self.probs / self.probs.sum()
        return float(p @ self.labels)

    def variance(self) -> float:
        p = self.probs / self.probs.sum()
        m = self.labels
        mu = p @ m
        return float(p @ (m - mu) ** 2)


def _labels(j: SpinMagnitude) -> np.ndarray:
    return j.two_m_labels()


def quantum_plz(state: QuantumState) -> DiscreteDistribution:
    probs = np.sum(np.abs(state.amps) ** 2, axis=0)
    return DiscreteDistribution(_labels(state.l), probs, 0.0, "lz")


def quantum_pjz(state: QuantumState) -> DiscreteDistribution:
    """Sums of |amp|^2 along anti-diagonals m_s + m_l = m_j."""
    p = np.abs(state.amps) ** 2
    ds, dl = p.shape
    # flipping the m_s axis turns anti-diagonals into diagonals: offset k
    # collects index pairs with i_s + i_l = ds - 1 + k
    flipped = p[::-1, :]
    probs = np.array([np.trace(flipped, offset=k) for k in range(-(ds - 1), dl)])
    two_top = state.s.two_j + state.l.two_j
    return DiscreteDistribution(np.arange(-two_top, two_top + 1, 2), probs, 0.0, "jz")


def quantum_plx(state: QuantumState) -> DiscreteDistribution:
    """Marginal of L_x: rotate the l-factor into the J_x eigenbasis first."""
    xb = x_basis_transform(state.l)
    rotated = state.amps @ xb.v.conj()
    probs = np.sum(np.abs(rotated) ** 2, axis=0)
    return DiscreteDistribution(_labels(state.l), probs, 0.0, "lx")


def quantum_marginal(state: QuantumState, observable: str) -> DiscreteDistribution:
    try:
        fn = {"lz": quantum_plz, "jz": quantum_pjz, "lx": quantum_plx}[observable]
    except KeyError:
        raise ValueError(f"observable must be one of {OBSERVABLES}, got {observable!r}") from None
    return fn(state)


def label_grid(s, l, observable: str) -> np.ndarray:
    """Doubled quantum labels for ``observable`` at spins (s, l)."""
    s, l = as_spin(s), as_spin(l)
    if observable in ("lz", "lx"):
        return _labels(l)
    if observable == "jz":
        top = s.two_j + l.two_j
        return np.arange(-top, top + 1, 2)
    raise ValueError(f"observable must be one of {OBSERVABLES}, got {observable!r}")


def classical_values(e: Ensemble, observable: str) -> np.ndarray:
    S, L = e.magnitudes.S, e.magnitudes.L
    if observable == "lz":
        return L * e.l[:, 2]
    if observable == "jz":
        return S * e.s[:, 2] + L * e.l[:, 2]
    if observable == "lx":
        return L * e.l[:, 0]
    raise ValueError(f"observable must be one of {OBSERVABLES}, got {observable!r}")


def classical_marginal(e: Ensemble, observable: str, two_labels: np.ndarray) -> DiscreteDistribution:
    """Histogram of the observable into [m - 1/2, m + 1/2) bins on the quantum labels.

    Mass outside the label range is reported as ``overflow``, never folded
    into the edge bins.
    """
    two_labels = np.asarray(two_labels)
    values = classical_values(e, observable)
    lo = two_labels[0] / 2.0 - 0.5
    idx = np.floor(values - lo).astype(np.int64)
    inside = (idx >= 0) & (idx < len(two_labels))
    counts = np.bincount(idx[inside], minlength=len(two_labels)).astype(float)
    n = float(len(values))
    return DiscreteDistribution(two_labels, counts / n, float((~inside).sum()) / n, observable)


def microcanonical_plz(l) -> DiscreteDistribution:
    l = as_spin(l)
    return DiscreteDistribution(_labels(l), np.full(l.dim, 1.0 / l.dim), 0.0, "lz")


def microcanonical_pjz_exact(s, l) -> list[Fraction]:
    """Tent probabilities as exact fractions, labels m_j = -(s+l)..(s+l)."""
    s, l = as_spin(s), as_spin(l)
    if s > l:
        s, l = l, s
    two_s, two_l = s.two_j, l.two_j
    denom = (two_s + 1) * (two_l + 1)
    out = []
    for two_mj in range(-(two_s + two_l), two_s + two_l + 1, 2):
        if abs(two_mj) >= two_l - two_s:
            # (l + s + 1 - |m_j|) in doubled units
            out.append(Fraction((two_l + two_s + 2 - abs(two_mj)) // 2, denom))
        else:
            out.append(Fraction(1, two_l + 1))
    return out


def microcanonical_pjz(s, l) -> DiscreteDistribution:
    s, l = as_spin(s), as_spin(l)
    probs = np.array([float(f) for f in microcanonical_pjz_exact(s, l)])
    return DiscreteDistribution(label_grid(s, l, "jz"), probs, 0.0, "jz")


def microcanonical_marginal(s, l, observable: str) -> DiscreteDistribution:
    """Marginal of the maximally mixed state (equal to the classical uniform measure)."""
    if observable in ("lz", "lx"):
        d = microcanonical_plz(l)
        return DiscreteDistribution(d.two_labels, d.probs, 0.0, observable)
    if observable == "jz":
        return microcanonical_pjz(s, l)
    raise ValueError(f"observable must be one of {OBSERVABLES}, got {observable!r}")


def pair_count_pjz(s, l) -> list[Fraction]:
    """Brute force: fraction of (m_s, m_l) pairs with each m_s + m_l."""
    s, l = as_spin(s), as_spin(l)
    counts: dict[int, int] = {}
    for a in s.two_m_labels():
        for b in l.two_m_labels():
            counts[int(a + b)] = counts.get(int(a + b), 0) + 1
    total = s.dim * l.dim
    return [Fraction(counts[k], total) for k in sorted(counts)]

"""Scalar diagnostics on marginal distributions: Shannon entropy series,
width growth, quantum-classical differences, size scaling and relaxation
time estimates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .classical import Ensemble
from .marginals import DiscreteDistribution, classical_marginal, quantum_marginal
from .states import QuantumState

__all__ = [
    "AnalysisError",
    "EntropySeries",
    "QCDifference",
    "ScalingRecord",
    "ScalingFit",
    "RelaxationEstimate",
    "shannon_entropy",
    "entropy_series",
    "entropy_growth_rate",
    "width_growth_fit",
    "qc_difference",
    "equilibrium_sigma",
    "scaling_fit",
    "relaxation_estimate",
]


class AnalysisError(ValueError):
    """Input cannot support the requested estimate."""


def shannon_entropy(d: DiscreteDistribution) -> float:
    """-sum p ln p in nats over the labelled bins, with 0 ln 0 = 0.

    Classical overflow mass (``d.overflow``) is not part of the sum and is
    not renormalized away; callers read it from the distribution.
    """
    p = np.asarray(d.probs, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


@dataclass(frozen=True, eq=False)
class EntropySeries:
    steps: np.ndarray
    h: np.ndarray
    n_bins: int

    def __post_init__(self):
        if self.steps.shape != self.h.shape:
            raise ValueError("steps and h must have equal length")
        bound = math.log(self.n_bins) + 1e-12
        if np.any(self.h < -1e-12) or np.any(self.h > bound):
            raise ValueError("entropy outside [0, ln(bin count)]")

    def __len__(self):
        return len(self.steps)

    def at(self, n: int) -> float:
        idx = np.flatnonzero(self.steps == n)
        if not idx.size:
            raise KeyError(n)
        return float(self.h[idx[0]])


def _as_distribution(item, observable, two_labels):
    if isinstance(item, DiscreteDistribution):
        return item
    if isinstance(item, QuantumState):
        return quantum_marginal(item, observable)
    if isinstance(item, Ensemble):
        if two_labels is None:
            raise AnalysisError("classical ensembles need the quantum label grid")
        return classical_marginal(item, observable, two_labels)
    raise TypeError(f"cannot take a marginal of {type(item).__name__}")


def entropy_series(
    snapshots: Mapping[int, object] | Iterable[tuple[int, object]],
    observable: str = "jz",
    two_labels: np.ndarray | None = None,
) -> EntropySeries:
    """Entropy of the ``observable`` marginal at each recorded step.

    Snapshots may be quantum states, classical ensembles (binned on
    ``two_labels``) or ready-made distributions.
    """
    items = snapshots.items() if isinstance(snapshots, Mapping) else snapshots
    steps, h, n_bins = [], [], None
    for n, item in sorted(items, key=lambda kv: kv[0]):
        d = _as_distribution(item, observable, two_labels)
        if n_bins is None:
            n_bins = len(d)
        elif len(d) != n_bins:
            raise AnalysisError("snapshots disagree on the bin count")
        steps.append(int(n))
        h.append(shannon_entropy(d))
    if n_bins is None:
        raise AnalysisError("no snapshots")
    return EntropySeries(np.array(steps), np.array(h), n_bins)


def _window_mask(steps: np.ndarray, window: tuple[int, int] | None) -> np.ndarray:
    if window is None:
        return np.ones(steps.shape, dtype=bool)
    n1, n2 = window
    if n2 < n1:
        raise AnalysisError(f"empty window {window}")
    return (steps >= n1) & (steps <= n2)


def _slope(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    if len(x) < 3:
        raise AnalysisError(f"need at least 3 points for a fit, got {len(x)}")
    if np.ptp(x) == 0:
        raise AnalysisError("fit abscissae are all equal")
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


def entropy_growth_rate(series: EntropySeries, window: tuple[int, int]) -> float:
    """Least-squares slope of h against n over ``window`` (inclusive)."""
    m = _window_mask(series.steps, window)
    return _slope(series.steps[m].astype(float), series.h[m])[0]


def width_growth_fit(
    steps: Sequence[int], variances: Sequence[float], window: tuple[int, int] | None = None
) -> float:
    """Exponent lambda_w of width ~ exp(lambda_w n): slope of 0.5 ln(variance)."""
    steps = np.asarray(steps, dtype=float)
    variances = np.asarray(variances, dtype=float)
    if steps.shape != variances.shape:
        raise AnalysisError("steps and variances must have equal length")
    m = _window_mask(steps, window)
    if np.any(variances[m] <= 0):
        raise AnalysisError("variances must be positive")
    return _slope(steps[m], 0.5 * np.log(variances[m]))[0]


@dataclass(frozen=True, eq=False)
class QCDifference:
    """Signed per-bin differences P_q - P_c.

    ``sigma_qc`` is their RMS over bins. ``sigma_rel`` measures the same
    differences in units of the mean bin probability 1/n_bins, which makes
    values comparable across system sizes.
    """

    two_labels: np.ndarray
    per_bin: np.ndarray

    @property
    def n_bins(self) -> int:
        return len(self.per_bin)

    @property
    def sigma_qc(self) -> float:
        return float(np.sqrt(np.mean(self.per_bin ** 2)))

    @property
    def sigma_rel(self) -> float:
        return self.n_bins * self.sigma_qc

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.per_bin)))


def qc_difference(pq: DiscreteDistribution, pc: DiscreteDistribution) -> QCDifference:
    if len(pq.two_labels) != len(pc.two_labels) or np.any(pq.two_labels != pc.two_labels):
        raise AnalysisError("distributions are on different label grids")
    return QCDifference(np.asarray(pq.two_labels), np.asarray(pq.probs) - np.asarray(pc.probs))


@dataclass(frozen=True)
class ScalingRecord:
    """Time-averaged equilibrium differences for one system size (size = l)."""

    size: float
    sigma_qc: float
    sigma_rel: float
    window: tuple[int, int]
    warning: str = ""

    def __post_init__(self):
        if not (self.size > 0 and self.sigma_qc > 0 and self.sigma_rel > 0):
            raise ValueError("scaling record needs positive size and sigmas")


def equilibrium_sigma(
    diffs: Mapping[int, QCDifference],
    window: tuple[int, int],
    size: float,
    t_rel: float | None = None,
) -> ScalingRecord:
    """Average sigma_qc and sigma_rel over the steps of ``diffs`` inside ``window``.

    A window that opens before ``t_rel`` still yields a record, annotated
    with a warning.
    """
    picked = [d for n, d in sorted(diffs.items()) if window[0] <= n <= window[1]]
    if not picked:
        raise AnalysisError(f"no differences recorded inside window {window}")
    warning = ""
    if t_rel is not None and window[0] < t_rel:
        warning = f"window starts at n={window[0]} before estimated relaxation n={t_rel:.1f}"
    return ScalingRecord(
        float(size),
        float(np.mean([d.sigma_qc for d in picked])),
        float(np.mean([d.sigma_rel for d in picked])),
        (int(window[0]), int(window[1])),
        warning,
    )


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    measure: str


def scaling_fit(records: Sequence[ScalingRecord], measure: str = "sigma_rel") -> ScalingFit:
    """Slope of ln(measure) against ln(size).

    ``measure`` is ``"sigma_rel"`` (default) or ``"sigma_qc"``. Needs at
    least three records spanning a factor 4 in size.
    """
    if measure not in ("sigma_rel", "sigma_qc"):
        raise ValueError(f"unknown measure {measure!r}")
    if len(records) < 3:
        raise AnalysisError(f"need at least 3 sizes, got {len(records)}")
    sizes = np.array([r.size for r in records], dtype=float)
    if sizes.max() < 4 * sizes.min():
        raise AnalysisError("sizes must span at least a factor of 4")
    y = np.log([getattr(r, measure) for r in records])
    slope, intercept = _slope(np.log(sizes), y)
    return ScalingFit(slope, intercept, measure)


@dataclass(frozen=True)
class RelaxationEstimate:
    lambda_w: float
    t_sat: float
    t_rel: float


def relaxation_estimate(lambda_w: float, lambda_l: float, l: float) -> RelaxationEstimate:
    """t_sat = ln(l) / lambda_w and t_rel = t_sat + 1 / lambda_L."""
    if not (lambda_w > 0 and lambda_l > 0):
        raise AnalysisError("growth and Lyapunov exponents must be positive")
    if l < 1:
        raise AnalysisError("l must be at least 1")
    t_sat = math.log(l) / lambda_w
    return RelaxationEstimate(float(lambda_w), t_sat, t_sat + 1.0 / lambda_l)

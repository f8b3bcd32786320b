"""Run orchestration shared by the command line and the acceptance suite.

Each ``run_*`` function takes an :class:`ExperimentConfig` and returns plain
arrays and distributions; formatting lives in :mod:`kicktops.cli`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import analysis
from .analysis import QCDifference, ScalingFit, ScalingRecord
from .classical import (
    ClassicalDensityParams,
    Ensemble,
    SpinMagnitudes,
    evolve_ensemble,
    lyapunov_batch,
    sample_ensemble,
    uniform_ensemble,
    unit_vector,
)
from .config import ExperimentConfig
from .floquet import FloquetParams, apply_step, build_plan
from .marginals import (
    DiscreteDistribution,
    classical_marginal,
    label_grid,
    microcanonical_marginal,
    quantum_marginal,
)
from .states import QuantumState, coherent_state, product_state, reduced_density_l

__all__ = [
    "Checks",
    "initial_state",
    "initial_ensemble",
    "floquet_params",
    "QuantumRun",
    "ClassicalRun",
    "CompareRun",
    "LyapunovRun",
    "ScalingRun",
    "run_quantum",
    "run_classical",
    "run_compare",
    "run_lyapunov",
    "run_scaling",
    "scaling_spins",
    "microcanonical_table",
    "DEFAULT_SCALING_WINDOW",
    "CHAOS_THRESHOLD",
]

NORM_TOL = 1e-10
SUM_TOL = 1e-10
DEFAULT_SCALING_WINDOW = (20, 60)
# exponents below this are classified as regular
CHAOS_THRESHOLD = 0.01


@dataclass
class Checks:
    """Runtime invariant checks: name -> (measured value, tolerance)."""

    results: dict[str, tuple[float, float]] = field(default_factory=dict)

    def record(self, name: str, value: float, tol: float):
        prev = self.results.get(name)
        if prev is None or value > prev[0]:
            self.results[name] = (float(value), tol)

    @property
    def ok(self) -> bool:
        return all(v <= tol for v, tol in self.results.values())

    def lines(self) -> list[str]:
        return [
            f"{name} max={v:.3e} tol={tol:.0e} {'pass' if v <= tol else 'FAIL'}"
            for name, (v, tol) in sorted(self.results.items())
        ]


def floquet_params(cfg: ExperimentConfig) -> FloquetParams:
    return FloquetParams(cfg.a, cfg.gamma)


def initial_state(cfg: ExperimentConfig) -> QuantumState:
    ts, ps, tl, pl = cfg.angles_rad()
    return product_state(coherent_state(cfg.spin_s, ts, ps), coherent_state(cfg.spin_l, tl, pl))


def initial_ensemble(cfg: ExperimentConfig, n: int | None = None) -> Ensemble:
    mags = SpinMagnitudes.from_spins(cfg.spin_s, cfg.spin_l)
    n = cfg.ensemble_size() if n is None else n
    if cfg.uniform:
        return uniform_ensemble(n, cfg.seed, mags)
    ts, ps, tl, pl = cfg.angles_rad()
    return sample_ensemble(
        ClassicalDensityParams.for_magnitude(mags.S, ts, ps),
        ClassicalDensityParams.for_magnitude(mags.L, tl, pl),
        n,
        cfg.seed,
        mags,
    )


def _check_quantum(checks: Checks, psi: QuantumState, dists):
    checks.record("norm_drift", abs(psi.norm - 1.0), NORM_TOL)
    for d in dists:
        checks.record("quantum_sum", abs(d.total - 1.0), SUM_TOL)


def _check_classical(checks: Checks, e: Ensemble, dists):
    for v in (e.s, e.l):
        checks.record("unit_norm", float(np.max(np.abs(np.einsum("ij,ij->i", v, v) - 1.0))), SUM_TOL)
    for d in dists:
        checks.record("classical_sum", abs(d.total - 1.0), SUM_TOL)


@dataclass
class QuantumRun:
    snapshots: dict[int, dict[str, DiscreteDistribution]]
    moments: list[tuple[int, str, float, float, float]]
    checks: Checks


def run_quantum(cfg: ExperimentConfig) -> QuantumRun:
    """Quantum marginals at the snapshot steps and moments at every step."""
    plan = build_plan(cfg.spin_s, cfg.spin_l, floquet_params(cfg))
    psi = initial_state(cfg)
    keep = set(cfg.snapshot_steps())
    snaps, moments, checks = {}, [], Checks()
    for n in range(cfg.steps + 1):
        if n:
            psi = apply_step(psi, plan)
        dists = {o: quantum_marginal(psi, o) for o in cfg.observables}
        _check_quantum(checks, psi, dists.values())
        for o, d in dists.items():
            moments.append((n, o, d.mean(), d.variance(), analysis.shannon_entropy(d)))
        if n in keep:
            snaps[n] = dists
    return QuantumRun(snaps, moments, checks)


@dataclass
class ClassicalRun:
    snapshots: dict[int, dict[str, DiscreteDistribution]]
    moments: list[tuple[int, str, float, float, float, float]]
    checks: Checks
    ensemble_size: int


def run_classical(cfg: ExperimentConfig) -> ClassicalRun:
    fp = floquet_params(cfg)
    e = initial_ensemble(cfg)
    grids = {o: label_grid(cfg.spin_s, cfg.spin_l, o) for o in cfg.observables}
    keep = set(cfg.snapshot_steps())
    snaps, moments, checks = {}, [], Checks()
    for n in range(cfg.steps + 1):
        if n:
            e = evolve_ensemble(e, fp, 1)
        dists = {o: classical_marginal(e, o, grids[o]) for o in cfg.observables}
        _check_classical(checks, e, dists.values())
        for o, d in dists.items():
            mean = d.mean() if d.probs.sum() > 0 else math.nan
            var = d.variance() if d.probs.sum() > 0 else math.nan
            moments.append((n, o, mean, var, analysis.shannon_entropy(d), d.overflow))
        if n in keep:
            snaps[n] = dists
    return ClassicalRun(snaps, moments, checks, len(e))


@dataclass
class CompareRun:
    """Per-step quantum and classical diagnostics on shared label grids.

    Arrays are indexed by step 0..steps; dict keys are observables.
    """

    steps: np.ndarray
    h_q: dict[str, np.ndarray]
    h_c: dict[str, np.ndarray]
    var_q: dict[str, np.ndarray]
    var_c: dict[str, np.ndarray]
    diffs: dict[str, list[QCDifference]]
    overflow: dict[str, np.ndarray]
    purity_l: np.ndarray
    bins: dict[int, dict[str, tuple[DiscreteDistribution, DiscreteDistribution]]]
    checks: Checks
    ensemble_size: int

    def sigma(self, observable: str, measure: str = "sigma_qc") -> np.ndarray:
        return np.array([getattr(d, measure) for d in self.diffs[observable]])


def run_compare(cfg: ExperimentConfig, purity: bool = True) -> CompareRun:
    """Quantum and classical evolution of the same initial condition.

    Full per-bin distributions are kept at the snapshot steps only.
    """
    fp = floquet_params(cfg)
    plan = build_plan(cfg.spin_s, cfg.spin_l, fp)
    psi = initial_state(cfg)
    e = initial_ensemble(cfg)
    obs = cfg.observables
    grids = {o: label_grid(cfg.spin_s, cfg.spin_l, o) for o in obs}
    keep = set(cfg.snapshot_steps())
    nsteps = cfg.steps + 1
    h_q = {o: np.empty(nsteps) for o in obs}
    h_c = {o: np.empty(nsteps) for o in obs}
    var_q = {o: np.empty(nsteps) for o in obs}
    var_c = {o: np.full(nsteps, math.nan) for o in obs}
    over = {o: np.empty(nsteps) for o in obs}
    diffs = {o: [] for o in obs}
    pur = np.full(nsteps, math.nan)
    bins, checks = {}, Checks()
    for n in range(nsteps):
        if n:
            psi = apply_step(psi, plan)
            e = evolve_ensemble(e, fp, 1)
        pq = {o: quantum_marginal(psi, o) for o in obs}
        pc = {o: classical_marginal(e, o, grids[o]) for o in obs}
        _check_quantum(checks, psi, pq.values())
        _check_classical(checks, e, pc.values())
        for o in obs:
            h_q[o][n] = analysis.shannon_entropy(pq[o])
            h_c[o][n] = analysis.shannon_entropy(pc[o])
            var_q[o][n] = pq[o].variance()
            if pc[o].probs.sum() > 0:
                var_c[o][n] = pc[o].variance()
            over[o][n] = pc[o].overflow
            diffs[o].append(analysis.qc_difference(pq[o], pc[o]))
        if purity:
            pur[n] = reduced_density_l(psi).purity
        if n in keep:
            bins[n] = {o: (pq[o], pc[o]) for o in obs}
    return CompareRun(
        np.arange(nsteps), h_q, h_c, var_q, var_c, diffs, over, pur, bins, checks, len(e)
    )


@dataclass
class LyapunovRun:
    angles_deg: np.ndarray  # (n, 4): theta_s, phi_s, theta_l, phi_l
    exponents: np.ndarray

    @property
    def chaotic_fraction(self) -> float:
        return float(np.mean(self.exponents > CHAOS_THRESHOLD))

    def chaotic_mean(self) -> float:
        sel = self.exponents[self.exponents > CHAOS_THRESHOLD]
        return float(sel.mean()) if sel.size else 0.0


def _angles_deg(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    theta = np.degrees(np.arccos(np.clip(v[:, 2], -1.0, 1.0)))
    phi = np.degrees(np.arctan2(v[:, 1], v[:, 0])) % 360.0
    return theta, phi


def run_lyapunov(cfg: ExperimentConfig) -> LyapunovRun:
    """Largest exponent at ``cfg.grid`` initial conditions drawn uniformly on S^2 x S^2."""
    mags = SpinMagnitudes.from_spins(cfg.spin_s, cfg.spin_l)
    if cfg.r is not None:
        mags = SpinMagnitudes.from_ratio(cfg.r)
    e = uniform_ensemble(cfg.grid, cfg.seed, mags)
    lam = lyapunov_batch(e.s, e.l, floquet_params(cfg), mags, cfg.lyap_steps, cfg.transient)
    ts, ps = _angles_deg(e.s)
    tl, pl = _angles_deg(e.l)
    return LyapunovRun(np.stack([ts, ps, tl, pl], axis=1), lam)


def scaling_spins(cfg: ExperimentConfig) -> list[tuple[int, int]]:
    """(s, l) pairs with s = round(l / r) at the configured ratio."""
    r = cfg.ratio
    return [(max(1, round(l / r)), l) for l in cfg.sizes]


@dataclass
class ScalingRun:
    spins: list[tuple[int, int]]
    ensembles: list[int]
    pure: list[ScalingRecord]
    reduced: list[ScalingRecord]
    fit_pure: ScalingFit
    fit_reduced: ScalingFit
    checks: Checks


def _relaxation_time(cfg: ExperimentConfig) -> float | None:
    # width growth is taken equal to the Lyapunov rate of the initial centroid
    ts, ps, tl, pl = cfg.angles_rad()
    mags = SpinMagnitudes.from_spins(cfg.spin_s, cfg.spin_l)
    lam = float(
        lyapunov_batch(
            unit_vector(ts, ps)[None], unit_vector(tl, pl)[None], floquet_params(cfg), mags
        )[0]
    )
    if lam <= CHAOS_THRESHOLD:
        return None
    return analysis.relaxation_estimate(lam, lam, cfg.l).t_rel


def run_scaling(cfg: ExperimentConfig) -> ScalingRun:
    """Equilibrium quantum-classical differences across sizes.

    The pure-state column uses the J_z marginal of the full state; the
    reduced column uses the L_z marginal, i.e. the diagonal of the reduced
    density matrix of spin L.
    """
    window = cfg.window or DEFAULT_SCALING_WINDOW
    spins = scaling_spins(cfg)
    pure, reduced, ensembles, checks = [], [], [], Checks()
    for s, l in spins:
        sub = replace(cfg, s=s, l=l, steps=window[1], observables=("jz", "lz"), snapshots=())
        if cfg.synthetic_exponent is not None:
            sigma = float(l) ** cfg.synthetic_exponent
            for col in (pure, reduced):
                col.append(ScalingRecord(float(l), sigma, sigma, window))
            ensembles.append(0)
            continue
        run = run_compare(sub, purity=False)
        for name, (v, tol) in run.checks.results.items():
            checks.record(name, v, tol)
        t_rel = _relaxation_time(sub)
        for col, o in ((pure, "jz"), (reduced, "lz")):
            diffs = dict(enumerate(run.diffs[o]))
            col.append(analysis.equilibrium_sigma(diffs, window, l, t_rel))
        ensembles.append(run.ensemble_size)
    return ScalingRun(
        spins,
        ensembles,
        pure,
        reduced,
        analysis.scaling_fit(pure),
        analysis.scaling_fit(reduced),
        checks,
    )


def microcanonical_table(cfg: ExperimentConfig) -> dict[str, DiscreteDistribution]:
    return {o: microcanonical_marginal(cfg.spin_s, cfg.spin_l, o) for o in ("lz", "jz")}

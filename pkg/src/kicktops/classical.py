"""Classical limit on S^2 x S^2: density sampling, the kicked-top map,
tangent dynamics and Lyapunov exponents.

Spin directions are unit vectors; magnitudes live separately in
:class:`SpinMagnitudes` and only enter through the kick angles. One period
matches the quantum map: kick (each spin turns about x by
``(gamma/|S|)`` times the other spin's x-component), then precession of
both spins about z by ``a``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .floquet import FloquetParams
from .spin import SpinMagnitude, as_spin

__all__ = [
    "SpinMagnitudes",
    "PhasePoint",
    "ClassicalDensityParams",
    "Ensemble",
    "unit_vector",
    "sample_ensemble",
    "uniform_ensemble",
    "map_step",
    "evolve_ensemble",
    "canonical_coords",
    "canonical_jacobian",
    "tangent_step",
    "lyapunov",
    "lyapunov_batch",
    "POLE_THRESHOLD",
]

# |z| above which a spin's (phi, z) chart is swapped for the relabelled one
POLE_THRESHOLD = 0.99
# points per independent Philox stream in the sampler
_RNG_BLOCK = 4096


@dataclass(frozen=True)
class SpinMagnitudes:
    S: float
    L: float

    def __post_init__(self):
        if not (self.S > 0 and self.L > 0):
            raise ValueError("spin magnitudes must be positive")

    @classmethod
    def from_spins(cls, s, l) -> "SpinMagnitudes":
        """|J| = sqrt(j(j+1)) for each spin."""
        return cls(float(np.sqrt(as_spin(s).casimir)), float(np.sqrt(as_spin(l).casimir)))

    @classmethod
    def from_ratio(cls, r: float) -> "SpinMagnitudes":
        """Scale-free classical model with |L|/|S| = r."""
        return cls(1.0, float(r))

    @property
    def ratio(self) -> float:
        return self.L / self.S

    def kick_factors(self, params: FloquetParams) -> tuple[float, float]:
        """(k_s, k_l): S turns by ``k_s * l_x``, L by ``k_l * s_x``."""
        c = params.gamma / self.S
        return c * self.L, c * self.S


def unit_vector(theta: float, phi: float) -> np.ndarray:
    st = np.sin(theta)
    return np.array([st * np.cos(phi), st * np.sin(phi), np.cos(theta)])


@dataclass(frozen=True, eq=False)
class PhasePoint:
    s_hat: np.ndarray
    l_hat: np.ndarray

    @classmethod
    def from_angles(cls, theta_s, phi_s, theta_l, phi_l) -> "PhasePoint":
        """Directions from polar/azimuthal angles in radians."""
        return cls(unit_vector(theta_s, phi_s), unit_vector(theta_l, phi_l))

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return (
            np.ascontiguousarray(self.s_hat, dtype=float).reshape(1, 3).copy(),
            np.ascontiguousarray(self.l_hat, dtype=float).reshape(1, 3).copy(),
        )


@dataclass(frozen=True)
class ClassicalDensityParams:
    """Centroid (theta0, phi0) in radians and angular variance sigma2."""

    theta0: float
    phi0: float
    sigma2: float

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")

    @classmethod
    def for_magnitude(cls, magnitude: float, theta0: float, phi0: float) -> "ClassicalDensityParams":
        """sigma^-2 = 2|J|."""
        return cls(theta0, phi0, 1.0 / (2.0 * magnitude))


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Monte-Carlo sample of the Liouville density: rows of ``s`` and ``l`` are unit vectors."""

    s: np.ndarray
    l: np.ndarray
    magnitudes: SpinMagnitudes
    seed: int = 0

    def __post_init__(self):
        if self.s.shape != self.l.shape or self.s.ndim != 2 or self.s.shape[1] != 3:
            raise ValueError("ensemble arrays must both have shape (n, 3)")
        if self.s.shape[0] == 0:
            raise ValueError("ensemble must be non-empty")

    def __len__(self):
        return self.s.shape[0]

    @property
    def points(self) -> list[PhasePoint]:
        return [PhasePoint(a, b) for a, b in zip(self.s, self.l)]

    def copy(self) -> "Ensemble":
        return Ensemble(self.s.copy(), self.l.copy(), self.magnitudes, self.seed)


def _block_uniforms(seed: int, stream: int, n: int, width: int) -> np.ndarray:
    """Uniforms of shape (n, width); row i depends only on (seed, stream, i).

    Rows are grouped in fixed blocks, each drawn from its own Philox key, so
    any prefix of a larger draw is identical and no stream is shared.
    """
    out = np.empty((n, width))
    for start in range(0, n, _RNG_BLOCK):
        stop = min(start + _RNG_BLOCK, n)
        ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, stream, start // _RNG_BLOCK])
        gen = np.random.Generator(np.random.Philox(ss))
        out[start:stop] = gen.random((stop - start, width))
    return out


def _rotate_to_centroid(v: np.ndarray, theta0: float, phi0: float) -> np.ndarray:
    # rigid rotation by theta0 about y, then phi0 about z
    ct, st = np.cos(theta0), np.sin(theta0)
    cp, sp = np.cos(phi0), np.sin(phi0)
    x = ct * v[:, 0] + st * v[:, 2]
    z = -st * v[:, 0] + ct * v[:, 2]
    y = v[:, 1]
    return np.stack([cp * x - sp * y, sp * x + cp * y, z], axis=1)


def _sample_spin(p: ClassicalDensityParams, u: np.ndarray) -> np.ndarray:
    # u = sin^2(theta/2) has density ~ exp(-2u/sigma2) on [0, 1]; exact inverse CDF
    rate = 2.0 / p.sigma2
    w = -np.log1p(u[:, 0] * np.expm1(-rate)) / rate
    w = np.clip(w, 0.0, 1.0)
    cos_t = 1.0 - 2.0 * w
    sin_t = 2.0 * np.sqrt(w * (1.0 - w))
    phi = 2.0 * np.pi * u[:, 1]
    v = np.stack([sin_t * np.cos(phi), sin_t * np.sin(phi), cos_t], axis=1)
    return _rotate_to_centroid(v, p.theta0, p.phi0)


def sample_ensemble(
    params_s: ClassicalDensityParams,
    params_l: ClassicalDensityParams,
    n: int,
    seed: int,
    magnitudes: SpinMagnitudes,
) -> Ensemble:
    """Draw ``n`` points from the product of the two single-spin densities."""
    if n < 1:
        raise ValueError("ensemble size must be >= 1")
    s = _sample_spin(params_s, _block_uniforms(seed, 0, n, 2))
    l = _sample_spin(params_l, _block_uniforms(seed, 1, n, 2))
    return Ensemble(np.ascontiguousarray(s), np.ascontiguousarray(l), magnitudes, seed)


def uniform_ensemble(n: int, seed: int, magnitudes: SpinMagnitudes) -> Ensemble:
    """Sample of the microcanonical (uniform) measure on S^2 x S^2."""
    if n < 1:
        raise ValueError("ensemble size must be >= 1")
    out = []
    for stream in (2, 3):
        u = _block_uniforms(seed, stream, n, 2)
        z = 2.0 * u[:, 0] - 1.0
        rho = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
        phi = 2.0 * np.pi * u[:, 1]
        out.append(np.ascontiguousarray(np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)))
    return Ensemble(out[0], out[1], magnitudes, seed)


def map_step(p: PhasePoint, fp: FloquetParams, mags: SpinMagnitudes) -> PhasePoint:
    s, l = p.as_arrays()
    ks, kl = mags.kick_factors(fp)
    kernels.get().map_points(s, l, ks, kl, fp.a, 1)
    return PhasePoint(s[0], l[0])


def evolve_ensemble(e: Ensemble, fp: FloquetParams, n: int, backend: str | None = None) -> Ensemble:
    """New ensemble advanced by ``n`` periods; ``e`` is left untouched."""
    if n < 0:
        raise ValueError("n must be non-negative")
    out = e.copy()
    ks, kl = e.magnitudes.kick_factors(fp)
    if n:
        kernels.get(backend).map_points(out.s, out.l, ks, kl, fp.a, n, kernels.num_threads())
    return out


# -- canonical (phi, z) charts ---------------------------------------------

def _to_chart(v: np.ndarray, relabel: bool) -> np.ndarray:
    # relabelled chart: cyclic (x, y, z) -> (y, z, x), an orientation-preserving rotation
    return np.array([v[1], v[2], v[0]]) if relabel else np.asarray(v, dtype=float)


def _from_chart(w: np.ndarray, relabel: bool) -> np.ndarray:
    return np.array([w[2], w[0], w[1]]) if relabel else w


def _chart_coords(v: np.ndarray, relabel: bool) -> tuple[float, float]:
    w = _to_chart(v, relabel)
    return float(np.arctan2(w[1], w[0])), float(w[2])


def _chart_point(phi: float, z: float, relabel: bool) -> np.ndarray:
    rho = np.sqrt(max(1.0 - z * z, 0.0))
    return _from_chart(np.array([rho * np.cos(phi), rho * np.sin(phi), z]), relabel)


def _chart_tangent_basis(v: np.ndarray, relabel: bool) -> tuple[np.ndarray, np.ndarray]:
    """d v / d phi and d v / d z at v."""
    x, y, z = _to_chart(v, relabel)
    rho2 = x * x + y * y
    e_phi = np.array([-y, x, 0.0])
    e_z = np.array([-z * x / rho2, -z * y / rho2, 1.0])
    return _from_chart(e_phi, relabel), _from_chart(e_z, relabel)


def _chart_differential(v: np.ndarray, dv: np.ndarray, relabel: bool) -> tuple[float, float]:
    """(d phi, d z) of a tangent vector ``dv`` at ``v``."""
    x, y, _ = _to_chart(v, relabel)
    dx, dy, dz = _to_chart(dv, relabel)
    return (x * dy - y * dx) / (x * x + y * y), dz


def chart_flags(p: PhasePoint) -> tuple[bool, bool]:
    """Which spins use the relabelled chart (|z| > POLE_THRESHOLD)."""
    return abs(p.s_hat[2]) > POLE_THRESHOLD, abs(p.l_hat[2]) > POLE_THRESHOLD


def canonical_coords(p: PhasePoint, charts: tuple[bool, bool] | None = None) -> np.ndarray:
    """(phi_s, z_s, phi_l, z_l) in the given (default: automatic) charts."""
    cs, cl = chart_flags(p) if charts is None else charts
    return np.array([*_chart_coords(p.s_hat, cs), *_chart_coords(p.l_hat, cl)])


def point_from_coords(q, charts: tuple[bool, bool] = (False, False)) -> PhasePoint:
    return PhasePoint(_chart_point(q[0], q[1], charts[0]), _chart_point(q[2], q[3], charts[1]))


def canonical_jacobian(p: PhasePoint, fp: FloquetParams, mags: SpinMagnitudes):
    """4x4 Jacobian of one period in (phi_s, z_s, phi_l, z_l) coordinates.

    Returns ``(jac, charts_in, charts_out)``. Each spin uses the standard
    chart unless it sits within the polar caps |z| > POLE_THRESHOLD, where
    the relabelled chart (pole along x) is used instead.
    """
    charts_in = chart_flags(p)
    p_out = map_step(p, fp, mags)
    charts_out = chart_flags(p_out)
    es = _chart_tangent_basis(p.s_hat, charts_in[0])
    el = _chart_tangent_basis(p.l_hat, charts_in[1])
    zero = np.zeros(3)
    ds = np.array([es[0], es[1], zero, zero])
    dl = np.array([zero, zero, el[0], el[1]])
    s = np.tile(p.s_hat, (4, 1))
    l = np.tile(p.l_hat, (4, 1))
    ks, kl = mags.kick_factors(fp)
    # the tangent map is linear in (ds, dl); any backend gives the same images
    kernels.get("python").tangent_map_points(s, l, ds, dl, ks, kl, fp.a)
    jac = np.empty((4, 4))
    for k in range(4):
        jac[0:2, k] = _chart_differential(p_out.s_hat, ds[k], charts_out[0])
        jac[2:4, k] = _chart_differential(p_out.l_hat, dl[k], charts_out[1])
    return jac, charts_in, charts_out


def tangent_step(p: PhasePoint, delta, fp: FloquetParams, mags: SpinMagnitudes) -> np.ndarray:
    """Push a canonical tangent vector through one period (charts as in canonical_jacobian)."""
    delta = np.asarray(delta, dtype=float)
    if not np.all(np.isfinite(delta)):
        raise ValueError("tangent vector must be finite")
    jac, _, _ = canonical_jacobian(p, fp, mags)
    return jac @ delta


# -- Lyapunov exponents ----------------------------------------------------

_SEED_DS = np.array([0.48, -0.64, 0.6])
_SEED_DL = np.array([-0.36, 0.8, 0.48])


def lyapunov_batch(
    s: np.ndarray,
    l: np.ndarray,
    fp: FloquetParams,
    mags: SpinMagnitudes,
    n_steps: int = 10_000,
    transient: int = 100,
    backend: str | None = None,
) -> np.ndarray:
    """Largest Lyapunov exponent for each initial condition (rows of ``s``, ``l``).

    Tangent vectors are propagated in the embedding R^3 x R^3 (chart-free);
    the exponent does not depend on that choice of metric.
    """
    if n_steps < 1000:
        raise ValueError("n_steps must be >= 1000 for a meaningful estimate")
    if transient < 0:
        raise ValueError("transient must be non-negative")
    s = np.array(s, dtype=float, order="C", ndmin=2, copy=True)
    l = np.array(l, dtype=float, order="C", ndmin=2, copy=True)
    n = s.shape[0]
    ds = np.tile(_SEED_DS, (n, 1))
    dl = np.tile(_SEED_DL, (n, 1))
    ks, kl = mags.kick_factors(fp)
    return kernels.get(backend).lyapunov_points(
        s, l, ds, dl, ks, kl, fp.a, n_steps, transient, kernels.num_threads()
    )


def lyapunov(
    p0: PhasePoint,
    fp: FloquetParams,
    mags: SpinMagnitudes,
    n_steps: int = 10_000,
    transient: int = 100,
    backend: str | None = None,
) -> float:
    s, l = p0.as_arrays()
    return float(lyapunov_batch(s, l, fp, mags, n_steps, transient, backend)[0])

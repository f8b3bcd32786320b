"""One period of the coupled kicked-top map, applied without building the
full (d_s*d_l)-square unitary.

One period is

    U = exp(-i a (S_z + L_z)) exp(-i (gamma/|S|) S_x L_x),     |S| = sqrt(s(s+1))

kick first, then free precession. The kick is diagonal in the product
J_x eigenbasis, so it is applied as a basis change on each factor (two
matrix products), a phase multiply, and the inverse basis change. Cost per
step is O(d_s^2 d_l + d_s d_l^2).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .spin import SpinMagnitude, XBasisTransform, as_spin, x_basis_transform
from .states import QuantumState

__all__ = [
    "FloquetParams",
    "FloquetOperatorPlan",
    "kick_coupling",
    "build_plan",
    "apply_step",
    "iterate",
    "evolve",
    "dense_floquet_unitary",
]


@dataclass(frozen=True)
class FloquetParams:
    """Map parameters: precession angle ``a`` per period and kick strength ``gamma``.

    ``gamma`` is the scaled coupling: the classical kick rotates each unit
    spin by ``gamma * (|L|/|S|) * l_x`` (spin S) and ``gamma * s_x`` (spin L).
    """

    a: float
    gamma: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.gamma)):
            raise ValueError("FloquetParams must be finite")
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")


def kick_coupling(s: SpinMagnitude, gamma: float) -> float:
    """Operator coefficient c in exp(-i c S_x L_x)."""
    if s.two_j == 0:
        return 0.0
    return gamma / np.sqrt(s.casimir)


@dataclass(frozen=True, eq=False)
class FloquetOperatorPlan:
    s: SpinMagnitude
    l: SpinMagnitude
    params: FloquetParams
    free_phases: np.ndarray
    kick_phases: np.ndarray
    xs: XBasisTransform
    xl: XBasisTransform
    # real orthogonal forms of xs.v / xl.v (the J_x eigenvectors are real)
    vs: np.ndarray
    vl: np.ndarray


def build_plan(s, l, params: FloquetParams) -> FloquetOperatorPlan:
    s, l = as_spin(s), as_spin(l)
    ms, ml = s.m_values(), l.m_values()
    free = np.exp(-1j * params.a * (ms[:, None] + ml[None, :]))
    xs, xl = x_basis_transform(s), x_basis_transform(l)
    c = kick_coupling(s, params.gamma)
    kick = np.exp(-1j * c * np.outer(xs.eigenvalues, xl.eigenvalues))
    vs = np.ascontiguousarray(xs.v.real)
    vl = np.ascontiguousarray(xl.v.real)
    for arr in (free, kick, vs, vl):
        arr.setflags(write=False)
    return FloquetOperatorPlan(s, l, params, free, kick, xs, xl, vs, vl)


def _cmul_split(re: np.ndarray, im: np.ndarray, phases: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pr, pi = phases.real, phases.imag
    return re * pr - im * pi, re * pi + im * pr


def apply_step(state: QuantumState, plan: FloquetOperatorPlan) -> QuantumState:
    """Advance ``state`` by one period."""
    if state.s != plan.s or state.l != plan.l:
        raise ValueError(
            f"state spins (s={state.s}, l={state.l}) do not match plan (s={plan.s}, l={plan.l})"
        )
    ds, dl = plan.s.dim, plan.l.dim
    # real and imaginary parts stacked on a leading axis keep every GEMM
    # contiguous and real (the basis matrices are real orthogonal)
    psi = np.empty((2, ds, dl))
    psi[0], psi[1] = state.amps.real, state.amps.imag
    psi = np.matmul(plan.vs.T, psi)
    psi = (psi.reshape(2 * ds, dl) @ plan.vl).reshape(2, ds, dl)
    psi[0], psi[1] = _cmul_split(psi[0], psi[1], plan.kick_phases)
    psi = np.matmul(plan.vs, psi)
    psi = (psi.reshape(2 * ds, dl) @ plan.vl.T).reshape(2, ds, dl)
    out = np.empty((ds, dl), dtype=complex)
    out.real, out.imag = _cmul_split(psi[0], psi[1], plan.free_phases)
    return QuantumState(plan.s, plan.l, out)


def iterate(state: QuantumState, plan: FloquetOperatorPlan, n: int) -> Iterator[tuple[int, QuantumState]]:
    """Yield ``(step, state)`` for step = 0..n."""
    if n < 0:
        raise ValueError("n must be non-negative")
    yield 0, state
    for k in range(1, n + 1):
        state = apply_step(state, plan)
        yield k, state


def evolve(
    state: QuantumState,
    plan: FloquetOperatorPlan,
    n: int,
    snapshots: Iterable[int] | None = None,
) -> dict[int, QuantumState]:
    """Run ``n`` periods and keep the states at ``snapshots`` (default: final step only)."""
    wanted = {n} if snapshots is None else {int(k) for k in snapshots if 0 <= int(k) <= n}
    out = {}
    for k, psi in iterate(state, plan, n):
        if k in wanted:
            out[k] = psi
    return out


def dense_floquet_unitary(s, l, params: FloquetParams) -> np.ndarray:
    """Full one-period unitary on H_s (x) H_l, for checking small systems.

    Built independently of the plan: the kick exponent is diagonalized as a
    dense Hermitian matrix rather than through the per-factor J_x bases.
    """
    from .spin import jx_tridiagonal

    s, l = as_spin(s), as_spin(l)
    sx, lx = jx_tridiagonal(s), jx_tridiagonal(l)
    coupling = np.kron(sx, lx) * kick_coupling(s, params.gamma)
    w, v = np.linalg.eigh(coupling)
    u_kick = (v * np.exp(-1j * w)) @ v.conj().T
    mz = (s.m_values()[:, None] + l.m_values()[None, :]).ravel()
    return np.exp(-1j * params.a * mz)[:, None] * u_kick

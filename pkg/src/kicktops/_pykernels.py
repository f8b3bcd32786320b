"""Pure-numpy implementation of the classical map kernels.

Same contract as the compiled ``_ckernels`` module; selected automatically
when the extension is unavailable (see :mod:`kicktops.kernels`).

Spin directions are float64 arrays of shape (N, 3). ``ks`` and ``kl`` are
the kick factors: spin S turns about x by ``ks * l_x`` and spin L by
``kl * s_x``; both then precess about z by ``a``.
"""
import numpy as np


def _rotate_x(v, c, s):
    y = c * v[:, 1] - s * v[:, 2]
    z = s * v[:, 1] + c * v[:, 2]
    v[:, 1] = y
    v[:, 2] = z


def _rotate_z(v, c, s):
    x = c * v[:, 0] - s * v[:, 1]
    y = s * v[:, 0] + c * v[:, 1]
    v[:, 0] = x
    v[:, 1] = y


def _renormalize(v):
    v /= np.sqrt(np.einsum("ij,ij->i", v, v))[:, None]


def map_points(s, l, ks, kl, a, n_steps, num_threads=0):
    """Apply ``n_steps`` periods in place."""
    ca, sa = np.cos(a), np.sin(a)
    for _ in range(n_steps):
        alpha = ks * l[:, 0]
        beta = kl * s[:, 0]
        _rotate_x(s, np.cos(alpha), np.sin(alpha))
        _rotate_x(l, np.cos(beta), np.sin(beta))
        _rotate_z(s, ca, sa)
        _rotate_z(l, ca, sa)
        _renormalize(s)
        _renormalize(l)


def _cross_x(v):
    # x_hat cross v
    out = np.zeros_like(v)
    out[:, 1] = -v[:, 2]
    out[:, 2] = v[:, 1]
    return out


def tangent_map_points(s, l, ds, dl, ks, kl, a):
    """One period for points and Cartesian tangent vectors, all in place."""
    ca, sa = np.cos(a), np.sin(a)
    alpha = ks * l[:, 0]
    beta = kl * s[:, 0]
    dalpha = ks * dl[:, 0]
    dbeta = kl * ds[:, 0]
    c1, s1 = np.cos(alpha), np.sin(alpha)
    c2, s2 = np.cos(beta), np.sin(beta)
    _rotate_x(s, c1, s1)
    _rotate_x(l, c2, s2)
    _rotate_x(ds, c1, s1)
    _rotate_x(dl, c2, s2)
    ds += dalpha[:, None] * _cross_x(s)
    dl += dbeta[:, None] * _cross_x(l)
    for v in (s, l, ds, dl):
        _rotate_z(v, ca, sa)
    _renormalize(s)
    _renormalize(l)


def lyapunov_points(s, l, ds, dl, ks, kl, a, n_steps, transient, num_threads=0):
    """Largest Lyapunov exponent per point by the tangent-vector method.

    ``s, l`` are advanced in place through ``transient + n_steps`` periods.
    ``ds, dl`` seed the tangent direction after the transient (copied). The
    tangent is renormalized every period and the log stretch averaged.
    """
    map_points(s, l, ks, kl, a, transient)
    ds = ds.copy()
    dl = dl.copy()
    # project onto the tangent planes and normalize
    ds -= np.einsum("ij,ij->i", ds, s)[:, None] * s
    dl -= np.einsum("ij,ij->i", dl, l)[:, None] * l
    norm = np.sqrt(np.einsum("ij,ij->i", ds, ds) + np.einsum("ij,ij->i", dl, dl))
    ds /= norm[:, None]
    dl /= norm[:, None]
    acc = np.zeros(s.shape[0])
    for _ in range(n_steps):
        tangent_map_points(s, l, ds, dl, ks, kl, a)
        norm = np.sqrt(np.einsum("ij,ij->i", ds, ds) + np.einsum("ij,ij->i", dl, dl))
        acc += np.log(norm)
        ds /= norm[:, None]
        dl /= norm[:, None]
    return acc / max(n_steps, 1)

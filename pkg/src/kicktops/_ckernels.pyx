# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled classical-map kernels. Contract identical to ``_pykernels``.

Each point is advanced independently, so results do not depend on the
number of OpenMP threads.
"""
import numpy as np
cimport cython
from cython.parallel cimport prange
from libc.math cimport sin, cos, sqrt, log


cdef inline void _step(double* s, double* l, double ks, double kl,
                       double ca, double sa) noexcept nogil:
    cdef double alpha = ks * l[0]
    cdef double beta = kl * s[0]
    cdef double c1 = cos(alpha), s1 = sin(alpha)
    cdef double c2 = cos(beta), s2 = sin(beta)
    cdef double y, z, x, n
    y = c1 * s[1] - s1 * s[2]
    z = s1 * s[1] + c1 * s[2]
    s[1] = y
    s[2] = z
    y = c2 * l[1] - s2 * l[2]
    z = s2 * l[1] + c2 * l[2]
    l[1] = y
    l[2] = z
    x = ca * s[0] - sa * s[1]
    y = sa * s[0] + ca * s[1]
    s[0] = x
    s[1] = y
    x = ca * l[0] - sa * l[1]
    y = sa * l[0] + ca * l[1]
    l[0] = x
    l[1] = y
    n = sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2])
    s[0] = s[0] / n
    s[1] = s[1] / n
    s[2] = s[2] / n
    n = sqrt(l[0] * l[0] + l[1] * l[1] + l[2] * l[2])
    l[0] = l[0] / n
    l[1] = l[1] / n
    l[2] = l[2] / n


cdef inline void _tangent_step(double* s, double* l, double* ds, double* dl,
                               double ks, double kl, double ca, double sa) noexcept nogil:
    cdef double alpha = ks * l[0]
    cdef double beta = kl * s[0]
    cdef double dalpha = ks * dl[0]
    cdef double dbeta = kl * ds[0]
    cdef double c1 = cos(alpha), s1 = sin(alpha)
    cdef double c2 = cos(beta), s2 = sin(beta)
    cdef double x, y, z, n
    cdef int k
    cdef double* vecs[4]
    # kick: rotate about x
    y = c1 * s[1] - s1 * s[2]
    z = s1 * s[1] + c1 * s[2]
    s[1] = y
    s[2] = z
    y = c2 * l[1] - s2 * l[2]
    z = s2 * l[1] + c2 * l[2]
    l[1] = y
    l[2] = z
    y = c1 * ds[1] - s1 * ds[2]
    z = s1 * ds[1] + c1 * ds[2]
    ds[1] = y
    ds[2] = z
    y = c2 * dl[1] - s2 * dl[2]
    z = s2 * dl[1] + c2 * dl[2]
    dl[1] = y
    dl[2] = z
    # angle variation: d(alpha) * (x_hat cross s')
    ds[1] = ds[1] + dalpha * (-s[2])
    ds[2] = ds[2] + dalpha * s[1]
    dl[1] = dl[1] + dbeta * (-l[2])
    dl[2] = dl[2] + dbeta * l[1]
    vecs[0] = s
    vecs[1] = l
    vecs[2] = ds
    vecs[3] = dl
    for k in range(4):
        x = ca * vecs[k][0] - sa * vecs[k][1]
        y = sa * vecs[k][0] + ca * vecs[k][1]
        vecs[k][0] = x
        vecs[k][1] = y
    n = sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2])
    s[0] = s[0] / n
    s[1] = s[1] / n
    s[2] = s[2] / n
    n = sqrt(l[0] * l[0] + l[1] * l[1] + l[2] * l[2])
    l[0] = l[0] / n
    l[1] = l[1] / n
    l[2] = l[2] / n


def map_points(double[:, ::1] s, double[:, ::1] l, double ks, double kl,
               double a, long n_steps, int num_threads=0):
    cdef Py_ssize_t i, n = s.shape[0]
    cdef long k
    cdef double ca = cos(a), sa = sin(a)
    if l.shape[0] != n:
        raise ValueError("s and l must have the same number of points")
    if num_threads <= 0:
        num_threads = 1
    for i in prange(n, nogil=True, num_threads=num_threads, schedule="static"):
        for k in range(n_steps):
            _step(&s[i, 0], &l[i, 0], ks, kl, ca, sa)


def tangent_map_points(double[:, ::1] s, double[:, ::1] l, double[:, ::1] ds,
                       double[:, ::1] dl, double ks, double kl, double a):
    cdef Py_ssize_t i, n = s.shape[0]
    cdef double ca = cos(a), sa = sin(a)
    for i in range(n):
        _tangent_step(&s[i, 0], &l[i, 0], &ds[i, 0], &dl[i, 0], ks, kl, ca, sa)


def lyapunov_points(double[:, ::1] s, double[:, ::1] l, ds_in, dl_in,
                    double ks, double kl, double a, long n_steps, long transient,
                    int num_threads=0):
    cdef Py_ssize_t i, n = s.shape[0]
    cdef long k
    cdef double ca = cos(a), sa = sin(a)
    cdef double[:, ::1] ds = np.array(ds_in, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] dl = np.array(dl_in, dtype=np.float64, order="C", copy=True)
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] acc = out
    cdef double p, norm, total
    if num_threads <= 0:
        num_threads = 1
    for i in prange(n, nogil=True, num_threads=num_threads, schedule="static"):
        for k in range(transient):
            _step(&s[i, 0], &l[i, 0], ks, kl, ca, sa)
        # project onto tangent planes, normalize
        p = ds[i, 0] * s[i, 0] + ds[i, 1] * s[i, 1] + ds[i, 2] * s[i, 2]
        ds[i, 0] = ds[i, 0] - p * s[i, 0]
        ds[i, 1] = ds[i, 1] - p * s[i, 1]
        ds[i, 2] = ds[i, 2] - p * s[i, 2]
        p = dl[i, 0] * l[i, 0] + dl[i, 1] * l[i, 1] + dl[i, 2] * l[i, 2]
        dl[i, 0] = dl[i, 0] - p * l[i, 0]
        dl[i, 1] = dl[i, 1] - p * l[i, 1]
        dl[i, 2] = dl[i, 2] - p * l[i, 2]
        norm = sqrt(ds[i, 0] * ds[i, 0] + ds[i, 1] * ds[i, 1] + ds[i, 2] * ds[i, 2]
                    + dl[i, 0] * dl[i, 0] + dl[i, 1] * dl[i, 1] + dl[i, 2] * dl[i, 2])
        ds[i, 0] = ds[i, 0] / norm
        ds[i, 1] = ds[i, 1] / norm
        ds[i, 2] = ds[i, 2] / norm
        dl[i, 0] = dl[i, 0] / norm
        dl[i, 1] = dl[i, 1] / norm
        dl[i, 2] = dl[i, 2] / norm
        total = 0.0
        for k in range(n_steps):
            _tangent_step(&s[i, 0], &l[i, 0], &ds[i, 0], &dl[i, 0], ks, kl, ca, sa)
            norm = sqrt(ds[i, 0] * ds[i, 0] + ds[i, 1] * ds[i, 1] + ds[i, 2] * ds[i, 2]
                        + dl[i, 0] * dl[i, 0] + dl[i, 1] * dl[i, 1] + dl[i, 2] * dl[i, 2])
            total = total + log(norm)
            ds[i, 0] = ds[i, 0] / norm
            ds[i, 1] = ds[i, 1] / norm
            ds[i, 2] = ds[i, 2] / norm
            dl[i, 0] = dl[i, 0] / norm
            dl[i, 1] = dl[i, 1] / norm
            dl[i, 2] = dl[i, 2] / norm
        acc[i] = total / (n_steps if n_steps > 0 else 1)
    return out

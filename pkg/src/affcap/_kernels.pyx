# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for projection-body support evaluation.

Both kernels compute, for every matrix direction ``U[i]`` (shape n x m),

    S[i] = sum_j coef[j] * h_Q(normals[j]^T U[i]) ** p

where ``h_Q`` is the support function of a polytope given by its vertices or
of a Euclidean ball.  The per-direction sums run in a fixed order, so the
result does not depend on how directions are split across threads.
"""
import numpy as np
from libc.math cimport pow, sqrt


cdef inline double _power(double h, double p) noexcept nogil:
    if p == 1.0:
        return h
    if p == 2.0:
        return h * h
    return pow(h, p)


def polytope_support_power_sum(const double[:, :, ::1] U,
                               const double[:, ::1] normals,
                               const double[::1] coef,
                               const double[:, ::1] qverts,
                               double p):
    """Sum of coef-weighted p-th powers of a vertex-polytope support.

    The origin is assumed to lie in Q, so the maximum is clamped below at 0.
    """
    cdef Py_ssize_t N = U.shape[0], n = U.shape[1], m = U.shape[2]
    cdef Py_ssize_t J = normals.shape[0], K = qverts.shape[0]
    cdef Py_ssize_t i, j, a, l, k
    cdef double acc, na, s, hmax
    out = np.zeros(N, dtype=np.float64)
    xbuf = np.empty(max(m, 1), dtype=np.float64)
    cdef double[::1] o = out
    cdef double[::1] x = xbuf
    with nogil:
        for i in range(N):
            acc = 0.0
            for j in range(J):
                for l in range(m):
                    x[l] = 0.0
                for a in range(n):
                    na = normals[j, a]
                    for l in range(m):
                        x[l] += na * U[i, a, l]
                hmax = 0.0
                for k in range(K):
                    s = 0.0
                    for l in range(m):
                        s += x[l] * qverts[k, l]
                    if s > hmax:
                        hmax = s
                if hmax > 0.0:
                    acc += coef[j] * _power(hmax, p)
            o[i] = acc
    return out


def ball_support_power_sum(const double[:, :, ::1] U,
                           const double[:, ::1] normals,
                           const double[::1] coef,
                           const double[::1] center,
                           double radius,
                           double p):
    """Same sum for Q a Euclidean ball: h_Q(x) = center.x + radius |x|."""
    cdef Py_ssize_t N = U.shape[0], n = U.shape[1], m = U.shape[2]
    cdef Py_ssize_t J = normals.shape[0]
    cdef Py_ssize_t i, j, a, l
    cdef double acc, na, lin, sq, h
    out = np.zeros(N, dtype=np.float64)
    xbuf = np.empty(max(m, 1), dtype=np.float64)
    cdef double[::1] o = out
    cdef double[::1] x = xbuf
    with nogil:
        for i in range(N):
            acc = 0.0
            for j in range(J):
                for l in range(m):
                    x[l] = 0.0
                for a in range(n):
                    na = normals[j, a]
                    for l in range(m):
                        x[l] += na * U[i, a, l]
                lin = 0.0
                sq = 0.0
                for l in range(m):
                    lin += center[l] * x[l]
                    sq += x[l] * x[l]
                h = lin + radius * sqrt(sq)
                if h > 0.0:
                    acc += coef[j] * _power(h, p)
            o[i] = acc
    return out

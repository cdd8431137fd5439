"""The (L_p, Q)-projection body of a star body.

Its support function at an n x m matrix u is

    h(u)^p = sum over boundary elements of h_Q(nu^T u)^p * c^(1-p) * w,

which is exact for facet bodies and a quadrature otherwise.  A second,
independent evaluation integrates the gauge gradient over the sphere
(``h_projection_radial``).  Matrices are flattened column-major when they
are treated as points of S^{nm-1}.
"""
from __future__ import annotations

import math

import numpy as np

from . import kernels
from .bodies import BallQ, LpSumQ, PolytopeQ, ball, default_inner_level
from .errors import InputError
from .quadrature import (
    Estimate,
    ball_volume,
    check_positive,
    default_rule,
    rule_estimate,
    weighted_sum,
)


def flat_to_matrix(X, n, m):
    """Map rows of an (N, n*m) array to (N, n, m) matrices (column-major)."""
    X = np.asarray(X, dtype=float)
    return X.reshape(len(X), m, n).transpose(0, 2, 1)


def matrix_to_flat(U):
    """Inverse of :func:`flat_to_matrix`."""
    U = np.asarray(U, dtype=float)
    N, n, m = U.shape
    return U.transpose(0, 2, 1).reshape(N, n * m)


def _as_matrices(u, n, m):
    U = np.asarray(u, dtype=float)
    if U.shape == (n, m):
        return U[None], True
    if U.ndim == 3 and U.shape[1:] == (n, m):
        return U, False
    if m == 1 and U.ndim == 1 and U.shape == (n,):
        return U.reshape(1, n, 1), True
    raise InputError(f"expected an {n}x{m} matrix or a batch of them, got shape {U.shape}")


def support_power_sum(Q, U, normals, coef, p):
    """``S[i] = sum_j coef[j] * h_Q(normals[j]^T U[i])**p`` for a batch ``U`` of shape (N, n, m)."""
    if isinstance(Q, PolytopeQ):
        return kernels.polytope_support_power_sum(U, normals, coef, Q.vertices, p)
    if isinstance(Q, BallQ):
        return kernels.ball_support_power_sum(U, normals, coef, Q.center, Q.radius, p)
    if isinstance(Q, LpSumQ) and Q.p == p:
        # (lam h1^p + (1-lam) h2^p) splits linearly
        return Q.lam * support_power_sum(Q.q1, U, normals, coef, p) + (1.0 - Q.lam) * support_power_sum(
            Q.q2, U, normals, coef, p
        )
    U = np.asarray(U, dtype=float)
    N, _, m = U.shape
    out = np.empty(N)
    step = max(1, 2_000_000 // max(len(coef) * m, 1))
    for s in range(0, N, step):
        X = np.einsum("ja,ial->ijl", normals, U[s : s + step])
        h = Q._support(X.reshape(-1, m)).reshape(X.shape[:2])
        out[s : s + step] = weighted_sum(coef, h**p)
    return out


def _check_inputs(K, Q, p):
    if not p >= 1:
        raise InputError(f"p must be >= 1, got {p}")
    if not hasattr(Q, "m") or not hasattr(K, "n"):
        raise InputError("expected a star body K and a Q body")


class ProjectionBody:
    """Support oracle of the (L_p, Q)-projection body of K.

    Boundary elements are computed once at construction.  ``level`` selects
    the sphere rule for curved bodies and is ignored for facet bodies.
    """

    def __init__(self, K, Q, p, level=None):
        _check_inputs(K, Q, p)
        self.K, self.Q, self.p = K, Q, float(p)
        self.n, self.m = K.n, Q.m
        self.elements = K.boundary_elements(level)
        self.coef = np.ascontiguousarray(self.elements.surface_weights(self.p))
        self.path = "facet-exact" if self.elements.exact else "boundary-quadrature"

    def support_power(self, U):
        """``h(U)**p`` for a batch of (unnormalized) matrices, shape (N, n, m)."""
        return support_power_sum(self.Q, U, self.elements.normals, self.coef, self.p)

    def support(self, u):
        """Support value at one n x m matrix or at a batch (N, n, m)."""
        U, single = _as_matrices(u, self.n, self.m)
        h = self.support_power(U) ** (1.0 / self.p)
        return float(h[0]) if single else h


def h_projection(K, Q, p, u, level=None):
    """Support function of the (L_p, Q)-projection body at ``u``.

    Exact for facet bodies; for curved bodies the boundary integral is a
    quadrature at ``level`` (see :func:`h_projection_estimate` for error bars).
    """
    return ProjectionBody(K, Q, p, level).support(u)


def h_projection_estimate(K, Q, p, u, level=None):
    """:func:`h_projection` as an :class:`Estimate`.

    The error is zero on the facet path and the difference to the next
    coarser boundary rule otherwise.
    """
    fine = ProjectionBody(K, Q, p, level)
    value = fine.support(u)
    if fine.elements.exact:
        return Estimate(value, 0.0 * np.asarray(value), nodes=len(fine.elements), method="facet-exact")
    lvl = fine.elements.level
    coarse = ProjectionBody(K, Q, p, lvl - 1).support(u)
    return Estimate(
        value,
        np.abs(np.asarray(value) - coarse) if not np.isscalar(value) else abs(value - coarse),
        nodes=len(fine.elements),
        method=f"boundary-quadrature-L{lvl}",
    )


def h_projection_radial(K, Q, p, u, rule=None):
    """Support value from the gauge-gradient formula.

    Evaluates ``int_{S^{n-1}} h_Q(grad p_K(theta)^T u)^p rho_K(theta)^n dtheta``
    and returns its p-th root.  Nodes sitting on a facet ridge are nudged by
    ``RIDGE_JITTER``; the count is reported in ``meta["jittered"]``.
    """
    _check_inputs(K, Q, p)
    U, single = _as_matrices(u, K.n, Q.m)
    rule = default_rule(K.n) if rule is None else rule
    if rule.dim != K.n:
        raise InputError(f"rule lives on S^{rule.dim - 1}, body in R^{K.n}")
    jittered = []

    def evaluate(theta, w):
        g, jit = K.gauge_grad(theta, return_jitter=True)
        jittered.append(jit)
        coef = w / K._gauge(theta) ** K.n
        return support_power_sum(Q, U, g, coef, p)

    est = rule_estimate(rule, evaluate).power(1.0 / p)
    if single:
        est = est.replace(value=float(est.value[0]), err=float(est.err[0]))
    return est.replace(method=f"radial-formula-{est.method}", meta={"jittered": int(sum(jittered))})


def polar_volume_projection(K, Q, p, rule=None, inner_level=None):
    """Volume of the polar of the (L_p, Q)-projection body.

    ``rule`` integrates over S^{nm-1} and ``inner_level`` selects the boundary
    rule for curved K.  For curved K the error combines the outer error with
    the change observed when the boundary rule is coarsened by one level.
    """
    _check_inputs(K, Q, p)
    fine = ProjectionBody(K, Q, p, inner_level)
    coarse = None if fine.elements.exact else ProjectionBody(K, Q, p, fine.elements.level - 1)
    est = polar_volume_of(fine, coarse, K.n, Q.m, p, rule)
    meta = dict(est.meta, path=fine.path, boundary_elements=len(fine.elements))
    if coarse is not None:
        meta["inner_level"] = fine.elements.level
    return est.replace(meta=meta)


def polar_volume_of(fine, coarse, n, m, p, rule=None):
    """Polar volume ``(1/d) int h^{-d}`` on S^{d-1}, d = n*m, for a support oracle.

    ``fine`` and ``coarse`` expose ``support_power(U)`` returning ``h(U)**p``.
    ``coarse`` is a cheaper version of the same oracle used to estimate the
    inner discretization error, or None when ``fine`` is exact.
    """
    d = n * m
    rule = default_rule(d) if rule is None else rule
    if rule.dim != d:
        raise InputError(f"outer rule must live on S^{d - 1}, got S^{rule.dim - 1}")

    def evaluate(oracle):
        def f(X, w):
            h = oracle.support_power(flat_to_matrix(X, n, m)) ** (1.0 / p)
            return weighted_sum(w, check_positive(h, X) ** (-float(d))) / d

        return f

    est = rule_estimate(rule, evaluate(fine))
    if coarse is None:
        return est
    if rule.kind == "gauss":
        sub = rule.coarse()
        X, w = sub.nodes, sub.weights
    else:
        a, b = rule.groups[0]
        X, w = rule.nodes[a:b], rule.weights[a:b] * len(rule.groups)
    inner_err = abs(evaluate(fine)(X, w) - evaluate(coarse)(X, w))
    meta = dict(est.meta, outer_err=float(est.err), inner_err=float(inner_err))
    return est.replace(err=math.hypot(est.err, inner_err), meta=meta)


def phi_from_polar_volume(V, d, p):
    """``(d * V)**(-p/d)`` with error propagation."""
    return V.scale(d).power(-p / d)


_D_NP_CACHE: dict = {}


def d_np(Q, n, p, rule=None, inner_level=None):
    """The constant ``d_{n,p}(Q) = Phi_{p,Q}(B_2^n) / (n omega_n)``.

    Results are cached per (Q, n, p, rule, inner level).
    """
    if not p >= 1:
        raise InputError(f"p must be >= 1, got {p}")
    n = int(n)
    rule = default_rule(n * Q.m) if rule is None else rule
    inner_level = default_inner_level(n) if inner_level is None else int(inner_level)
    key = (Q.key(), n, float(p), rule.dim, rule.kind, rule.level, rule.seed, inner_level)
    if key not in _D_NP_CACHE:
        V = polar_volume_projection(ball(n), Q, p, rule, inner_level)
        est = phi_from_polar_volume(V, n * Q.m, p).scale(1.0 / (n * ball_volume(n)))
        _D_NP_CACHE[key] = est
    est = _D_NP_CACHE[key]
    return est.replace(meta=dict(est.meta))

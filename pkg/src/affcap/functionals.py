"""Scalar functionals and two-sided capacity bounds.

``phi`` is the higher-order p-integral affine surface area, ``sp_surface``
the L_p surface area.  The affine capacity itself is an infimum over Sobolev
functions and is never computed; instead ``cap_lower`` (volume bound) and
``cap_upper`` (radial test profiles) bracket it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .bodies import Ellipsoid
from .errors import GeometryError, InputError, NumericalError
from .projection import d_np, phi_from_polar_volume, polar_volume_projection
from .quadrature import Estimate, ball_volume


def phi(K, Q, p, rule=None, inner_level=None):
    """``Phi_{p,Q}(K) = (int_{S^{nm-1}} h_{Pi K}^{-nm})^{-p/(nm)}``."""
    V = polar_volume_projection(K, Q, p, rule, inner_level)
    return phi_from_polar_volume(V, K.n * Q.m, p).replace(method=f"phi:{V.method}")


def sp_surface(K, p, level=None):
    """L_p surface area ``sum of c**(1-p) * w`` over the boundary elements.

    Exact for facet bodies and centered balls; otherwise a boundary quadrature
    whose error is the change from the next coarser level.
    """
    if not p >= 1:
        raise InputError(f"p must be >= 1, got {p}")
    if isinstance(K, Ellipsoid) and K.radius is not None:
        n = K.n
        return Estimate(n * ball_volume(n) * K.radius ** (n - p), 0.0, method="analytic")
    be = K.boundary_elements(level)
    value = float(np.sum(be.surface_weights(p)))
    if be.exact:
        return Estimate(value, 0.0, nodes=len(be), method="facet-exact")
    coarse = float(np.sum(K.boundary_elements(be.level - 1).surface_weights(p)))
    return Estimate(value, abs(value - coarse), nodes=len(be), method=f"boundary-quadrature-L{be.level}")


def volume_estimate(K):
    return Estimate(K.volume_exact(), 0.0, method="exact")


def _check_p_n(p, n):
    if not 1 <= p < n:
        raise InputError(f"capacity bounds need 1 <= p < n = {n}, got p = {p}")


def profile_optimal_J(n, p):
    """Optimal radial-profile energy ``((n-p)/(p-1))**(p-1)`` for 1 < p < n."""
    if not 1 < p < n:
        raise InputError(f"profile_optimal_J needs 1 < p < n, got p={p}, n={n}")
    return ((n - p) / (p - 1.0)) ** (p - 1.0)


def _j_factor(n, p):
    return 1.0 if p == 1 else profile_optimal_J(n, p)


def cap_p_variational_ball(n, p):
    """Classical p-capacity of the unit ball: n omega_n J*, n omega_n at p = 1, 0 for p >= n."""
    if not p >= 1:
        raise InputError(f"p must be >= 1, got {p}")
    if p >= n:
        return 0.0
    return n * ball_volume(n) * _j_factor(n, p)


def cap_ball_closed_form(n, m, p, Q, rule=None, inner_level=None):
    """Affine capacity of the unit ball: ``n omega_n d_{n,p}(Q) J*`` (0 for p >= n)."""
    if not p >= 1:
        raise InputError(f"p must be >= 1, got {p}")
    if Q.m != m:
        raise InputError(f"Q lives in R^{Q.m}, but m = {m}")
    if p >= n:
        return Estimate(0.0, 0.0, method="closed-form")
    d = d_np(Q, n, p, rule, inner_level)
    return d.scale(n * ball_volume(n) * _j_factor(n, p)).replace(method=f"closed-form:{d.method}")


def cap_upper(K, Q, p, rule=None, inner_level=None):
    """Radial-profile upper bound ``J* Phi_{p,Q}(K)`` (``Phi_{1,Q}(K)`` at p = 1)."""
    _check_p_n(p, K.n)
    _check_origin(K)
    est = phi(K, Q, p, rule, inner_level)
    return est.scale(_j_factor(K.n, p)).replace(method=f"radial-profile-upper:{est.method}")


def cap_lower(K, Q, p, rule=None, inner_level=None):
    """Volume lower bound ``n omega_n d_{n,p}(Q) J* (V(K)/omega_n)**((n-p)/n)``."""
    _check_p_n(p, K.n)
    n = K.n
    w = ball_volume(n)
    d = d_np(Q, n, p, rule, inner_level)
    factor = n * w * _j_factor(n, p) * (K.volume_exact() / w) ** ((n - p) / n)
    return d.scale(factor).replace(method=f"volume-lower:{d.method}")


def cap_p_upper_radial(K, p, level=None):
    """Radial-profile upper bound on the classical p-capacity: ``J* S_p(K)``."""
    _check_p_n(p, K.n)
    _check_origin(K)
    est = sp_surface(K, p, level)
    return est.scale(_j_factor(K.n, p)).replace(method=f"radial-profile-upper:{est.method}")


def _check_origin(K):
    if K.convex and not K.min_radial() > 0:
        raise GeometryError("the origin must be an interior point of K")


@dataclass(frozen=True)
class CapacitySandwich:
    """Bracket ``lower <= C_{p,Q}(K) <= upper`` with the methods that produced each side."""

    lower: Estimate
    upper: Estimate

    @property
    def gap(self):
        return self.upper.value - self.lower.value

    @property
    def consistent(self):
        return self.lower.value <= self.upper.value + math.hypot(self.lower.err, self.upper.err)


def capacity_sandwich(K, Q, p, rule=None, inner_level=None):
    sandwich = CapacitySandwich(cap_lower(K, Q, p, rule, inner_level), cap_upper(K, Q, p, rule, inner_level))
    if not sandwich.consistent:
        raise NumericalError(
            f"capacity bounds out of order: lower {sandwich.lower.value} > upper {sandwich.upper.value}"
        )
    return sandwich


# ---------------------------------------------------------------------------
# Radial profiles g(s), s >= 1, with g(1) = 1
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Profile:
    """Piecewise-linear profile on a geometric grid ``1 = s_0 < ... < s_N = S_max``."""

    s: np.ndarray
    g: np.ndarray
    p: float

    def J(self, n):
        """``int |g'|^p s^{n-1} ds`` evaluated exactly for the piecewise-linear profile."""
        return profile_J(self.s, self.g, n, self.p)


def geometric_grid(N, S_max):
    return np.exp(np.linspace(0.0, math.log(S_max), N + 1))


def _shell_moments(s, n):
    return (s[1:] ** n - s[:-1] ** n) / n


def profile_J(s, g, n, p):
    """Energy of the piecewise-linear interpolant of ``g`` on grid ``s``."""
    s, g = np.asarray(s, dtype=float), np.asarray(g, dtype=float)
    slopes = np.abs(np.diff(g)) / np.diff(s)
    return float(np.sum(slopes**p * _shell_moments(s, n)))


def exact_profile(n, p, s):
    """The optimal profile ``g(s) = s**((n-p)/(1-p))`` sampled on ``s``."""
    return np.asarray(s, dtype=float) ** ((n - p) / (1.0 - p))


def truncation_tail(n, p, S_max):
    """Energy of the exact profile beyond ``S_max``: ``J* S_max**(-(n-p)/(p-1))``."""
    return profile_optimal_J(n, p) * S_max ** (-(n - p) / (p - 1.0))


def profile_optimize_J(n, p, grid_size=400, S_max=1e3):
    """Minimize J over monotone piecewise-linear profiles from 1 down to 0.

    On each cell the profile has slope ``-sigma_i``; the problem is to minimize
    ``sum sigma_i^p M_i`` subject to ``sum sigma_i Delta_i = 1``, where
    ``M_i`` is the integral of ``s^{n-1}`` over the cell.  This is a strictly
    convex problem whose KKT conditions give the minimizer in closed form:
    ``sigma_i`` proportional to ``(Delta_i / M_i)**(1/(p-1))``.

    Returns
    -------
    (Profile, float)
        The minimizing profile and its energy.
    """
    if not 1 < p < n:
        raise InputError(f"profile optimization needs 1 < p < n, got p={p}, n={n}")
    if grid_size < 16:
        raise InputError("grid_size must be at least 16")
    if not S_max > 1:
        raise InputError("S_max must exceed 1")
    s = geometric_grid(int(grid_size), float(S_max))
    delta = np.diff(s)
    M = _shell_moments(s, n)
    r = 1.0 / (p - 1.0)
    log_terms = p * r * np.log(delta) - r * np.log(M)
    log_A = logsumexp(log_terms)
    sigma = np.exp(r * (np.log(delta) - np.log(M)) - log_A)
    g = np.maximum(np.concatenate([[1.0], 1.0 - np.cumsum(sigma * delta)]), 0.0)
    g[-1] = 0.0
    value = math.exp((1.0 - p) * log_A)
    if not math.isfinite(value) or np.any(np.diff(g) > 0):
        raise NumericalError(f"profile optimization failed (J={value}, n={n}, p={p})")
    return Profile(s, g, float(p)), value

"""Independent oracles and randomized property checks.

Every property draws its fixtures from ``numpy.random.default_rng([seed, trial])``
so a report is reproducible from ``(name, seed, trials)`` alone, and each
fixture is recorded as a JSON spec that can be rebuilt with
:mod:`affcap.config`.  Violations are signed: positive means the property
failed after subtracting the tolerance.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import roots_legendre

from . import bodies
from .config import build_body, build_q
from .errors import InputError, NumericalError
from .kernels import get_threads
from .functionals import (
    cap_ball_closed_form,
    cap_lower,
    cap_p_upper_radial,
    cap_upper,
    phi,
    sp_surface,
)
from .projection import (
    ProjectionBody,
    d_np,
    h_projection_estimate,
    h_projection_radial,
    phi_from_polar_volume,
    polar_volume_of,
    support_power_sum,
)
from .quadrature import (
    POSITIVITY_FLOOR,
    ball_volume,
    default_rule,
    neg_power_moment,
    sphere_rule,
)


class OracleError(NumericalError):
    """The exact polygon pipeline met a degenerate configuration."""


# ---------------------------------------------------------------------------
# Exact planar oracle
# ---------------------------------------------------------------------------


def oracle_polygon_phi(K, a, b):
    """Exact ``Phi_{1,[a,b]}(K)`` for a convex polygon K.

    The projection-body support ``H(u) = sum_F len_F h_Q(nu_F . u)`` is linear
    between consecutive directions orthogonal to an edge normal.  The polar
    body ``{H <= 1}`` is therefore the polygon with vertices ``beta / H(beta)``
    at those breakpoints; its area comes from the shoelace formula and
    ``Phi = (2 * area)**(-1/2)``.

    Parameters
    ----------
    K : Polytope or array of vertices
        Convex polygon with the origin in its interior.
    a, b : float
        Endpoints of Q with a <= 0 <= b.
    """
    if not isinstance(K, bodies.Polytope):
        K = bodies.Polytope(K)
    if K.n != 2:
        raise InputError("the polygon oracle needs a planar body")
    if not a <= 0.0 <= b or not b > a:
        raise InputError("Q must be a segment [a, b] with a <= 0 <= b")
    lengths, normals = K.measures, K.normals
    if lengths.min() < 1e-12:
        raise OracleError("degenerate polygon edge")
    perp = np.column_stack([-normals[:, 1], normals[:, 0]])
    cand = np.vstack([perp, -perp])
    cand /= np.linalg.norm(cand, axis=1)[:, None]
    # keep the exact tangent vectors; angles are only used to order and dedupe
    angles = np.round(np.mod(np.arctan2(cand[:, 1], cand[:, 0]), 2 * np.pi), 13)
    _, first = np.unique(angles, return_index=True)
    if len(first) < 3:
        raise OracleError("too few breakpoints")
    beta = cand[first]
    t = beta @ normals.T
    H = (np.maximum(b * t, a * t)) @ lengths
    if H.min() <= 1e-12:
        raise OracleError("projection body support vanishes at a breakpoint")
    P = beta / H[:, None]
    x, y = P[:, 0], P[:, 1]
    area = 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
    return (2.0 * area) ** -0.5


def ball_segment_projection_power(n, a, b, p):
    """Closed form of ``h_{Pi_{p,[a,b]} B_2^n}(u)**p`` at a unit vector u (m = 1).

    Equals ``(b**p + |a|**p) * int_{S^{n-1}} (v.u)_+^p dv``.
    """
    from scipy.special import beta as beta_fn

    half_moment = 0.5 * (2 * math.pi ** ((n - 1) / 2) / math.gamma((n - 1) / 2)) * beta_fn((p + 1) / 2, (n - 1) / 2)
    return (b**p + abs(a) ** p) * half_moment


# ---------------------------------------------------------------------------
# Finite-epsilon shell energy (p = 1)
# ---------------------------------------------------------------------------


class _ShellOracle:
    """``u -> int_shell h_Q(grad f_eps(x)^T u) dx`` on a fixed node set."""

    def __init__(self, K, Q, eps, level, radial_nodes):
        rule = sphere_rule(K.n, level, "gauss")
        theta, omega = rule.nodes, rule.weights
        r0 = K.radial(theta)
        r1 = _offset_radius(K, theta, r0, eps)
        t, wt = roots_legendre(radial_nodes)
        half = 0.5 * (r1 - r0)
        r = (r0 + half)[:, None] + half[:, None] * t[None, :]  # (N, M)
        X = (theta[:, None, :] * r[..., None]).reshape(-1, K.n)
        weights = (omega[:, None] * half[:, None] * wt[None, :] * r ** (K.n - 1)).ravel()
        diff = X - K.nearest_point(X)
        dist = np.linalg.norm(diff, axis=1)
        if dist.min() <= 0:
            raise NumericalError("shell node coincides with the body")
        self.Q = Q
        self.grads = np.ascontiguousarray(-diff / (eps * dist[:, None]))
        self.weights = np.ascontiguousarray(weights)
        self.size = len(weights)

    def support_power(self, U):
        return support_power_sum(self.Q, U, self.grads, self.weights, 1.0)


def _offset_radius(K, theta, r0, eps):
    """Radius along each ray where ``dist(r theta, K) = eps`` (bisection)."""
    lo = r0.copy()
    hi = r0 + eps
    for _ in range(60):
        far = K.dist(theta * hi[:, None]) >= eps
        if far.all():
            break
        hi = np.where(far, hi, hi + eps)
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        inside = K.dist(theta * mid[:, None]) < eps
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ShellRow:
    eps: float
    energy: object
    ratio: float
    ratio_err: float


def shell_energy_convergence(K, Q, eps_list, rule=None, inner_level=None, radial_nodes=8):
    """Shell energies of ``f_eps = 1 - dist(x, K)/eps`` and their ratio to ``Phi_{1,Q}(K)``.

    The shell ``0 < dist(x, K) < eps`` is parametrized along rays from the
    origin; Gauss-Legendre nodes in the radius are combined with a Gauss rule
    on S^{n-1}.  Each energy is ``(int h_E(u)^{-nm} du)^{-1/(nm)}`` where
    ``h_E(u) = int_shell h_Q(grad f_eps^T u) dx``.

    Returns
    -------
    list of ShellRow
    """
    if not K.convex:
        raise InputError("shell energies need a convex body")
    eps_list = [float(e) for e in eps_list]
    if any(not e > 0 for e in eps_list):
        raise InputError("shell widths must be positive")
    level = bodies.default_inner_level(K.n) if inner_level is None else int(inner_level)
    d = K.n * Q.m
    rule = default_rule(d) if rule is None else rule
    reference = phi(K, Q, 1.0, rule, level)
    rows = []
    for eps in eps_list:
        fine = _ShellOracle(K, Q, eps, level, radial_nodes)
        coarse = _ShellOracle(K, Q, eps, level - 1, radial_nodes)
        V = polar_volume_of(fine, coarse, K.n, Q.m, 1.0, rule)
        energy = phi_from_polar_volume(V, d, 1.0).replace(method=f"shell:{V.method}", nodes=V.nodes + fine.size)
        ratio = energy.value / reference.value
        rerr = ratio * math.hypot(energy.err / energy.value, reference.err / reference.value)
        rows.append(ShellRow(eps, energy, ratio, rerr))
    return rows


def shell_factor(n, eps, p=1.0):
    """Analytic ball shell factor ``((1+eps)**n - 1) / (n eps**p)``."""
    return ((1.0 + eps) ** n - 1.0) / (n * eps**p)


# ---------------------------------------------------------------------------
# Random fixtures (as JSON specs)
# ---------------------------------------------------------------------------


def random_rotation(rng, n):
    Qm, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Qm * np.sign(np.diag(R))


def random_polytope_spec(rng, n, min_radius=0.05):
    """Hull of Gaussian samples (8-16 points in the plane, 12-24 in space), origin well inside."""
    lo, hi = (8, 16) if n == 2 else (12, 24)
    for _ in range(1000):
        pts = rng.standard_normal((int(rng.integers(lo, hi + 1)), n))
        try:
            K = bodies.Polytope(pts)
        except Exception:
            continue
        if K.offsets.min() >= min_radius:
            return {"type": "polytope", "vertices": K.vertices.tolist()}
    raise NumericalError("could not draw a random polytope")


def random_ellipsoid_spec(rng, n):
    R = random_rotation(rng, n)
    axes = np.exp(rng.uniform(math.log(0.5), math.log(2.0), n))
    return {"type": "ellipsoid", "matrix": (R @ np.diag(axes) @ R.T).tolist()}


def random_smooth_spec(rng, n):
    """Ellipsoid, l_q ball or rotated and stretched l_q ball."""
    kind = rng.integers(3)
    if kind == 0:
        return random_ellipsoid_spec(rng, n)
    lq = {"type": "lq_ball", "n": n, "q": float(rng.uniform(1.5, 4.0)), "radius": float(rng.uniform(0.7, 1.5))}
    if kind == 1:
        return lq
    return {"type": "linear_image", "body": lq, "matrix": random_map(rng, n).tolist()}


def random_body_spec(rng, n, family="mixed"):
    if family == "polytope" or (family == "mixed" and rng.random() < 0.5):
        return random_polytope_spec(rng, n)
    if family in ("ellipsoid", "mixed"):
        return random_ellipsoid_spec(rng, n)
    if family == "smooth":
        return random_smooth_spec(rng, n)
    raise InputError(f"unknown fixture family {family!r}")


def random_q_spec(rng, m):
    """Random Q containing the origin; about a quarter have the origin on the boundary."""
    on_boundary = rng.random() < 0.25
    if m == 1:
        a = -math.exp(rng.uniform(math.log(0.1), math.log(2.0)))
        b = math.exp(rng.uniform(math.log(0.1), math.log(2.0)))
        if on_boundary:
            a, b = (0.0, b) if rng.random() < 0.5 else (a, 0.0)
        return {"type": "segment", "a": a, "b": b}
    if rng.random() < 0.5:
        upper = rng.uniform(0.2, 1.5, m)
        lower = np.zeros(m) if on_boundary else -rng.uniform(0.2, 1.5, m)
        return {"type": "box", "lower": lower.tolist(), "upper": upper.tolist()}
    for _ in range(100):
        V = rng.standard_normal((m + 1, m))
        if abs(np.linalg.det(V[1:] - V[0])) > 0.05:
            break
    shift = V[0] if on_boundary else rng.dirichlet(np.ones(m + 1)) @ V
    return {"type": "simplex", "vertices": (V - shift).tolist()}


def random_map(rng, n):
    s = np.exp(rng.uniform(math.log(0.6), math.log(1.6), n))
    M = random_rotation(rng, n) @ np.diag(s) @ random_rotation(rng, n)
    if rng.random() < 0.5:
        M[:, 0] *= -1.0
    return M


def _draw_case(rng, capacity=False, ms=(1, 2)):
    n = int(rng.choice([2, 3]))
    m = int(rng.choice(ms))
    ps = [p for p in (1.0, 1.5, 2.0) if not capacity or p < n]
    return n, m, float(rng.choice(ps))


def _unit_matrices(rng, k, n, m):
    U = rng.standard_normal((k, n, m))
    return U / np.linalg.norm(U.reshape(k, -1), axis=1)[:, None, None]


# ---------------------------------------------------------------------------
# Property harness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Tolerances:
    """Exact paths use ``exact`` (relative); quadrature paths ``factor * err + slack``."""

    exact: float = 1e-9
    factor: float = 3.0
    slack: float = 1e-6

    def quad(self, *errs):
        return self.factor * math.hypot(*[float(e) for e in errs]) + self.slack

    def rel(self, *values):
        return self.exact * max(abs(float(v)) for v in values)


@dataclass
class PropertyReport:
    """Outcome of one randomized property check."""

    name: str
    trials: int
    seed: int
    max_violation: float
    passed: bool
    worst_fixture: dict | None = None
    diagnostics: list = field(default_factory=list)
    wall_time: float = 0.0

    def to_dict(self):
        return asdict(self)


def _fixture(n, m, p, body, q, **extra):
    return dict({"n": n, "m": m, "p": p, "body": body, "Q": q}, **extra)


def _ratio_root(num, den, k):
    """``(num/den)**(1/k)`` and its propagated error."""
    r = num.value / den.value
    rel = math.hypot(num.err / num.value, den.err / den.value)
    x = r ** (1.0 / k)
    return x, x * rel / k


def _prop_positivity(rng, tol, family):
    n, m, p = _draw_case(rng)
    bs, qs = random_body_spec(rng, n, family), random_q_spec(rng, m)
    h = ProjectionBody(build_body(bs), build_q(qs), p).support(_unit_matrices(rng, 1000, n, m))
    low = float(h.min()) if np.all(np.isfinite(h)) else -math.inf
    return POSITIVITY_FLOOR - low, _fixture(n, m, p, bs, qs, min_support=low)


def _prop_sublinear(rng, tol, family):
    n, m, p = _draw_case(rng)
    bs, qs = random_body_spec(rng, n, family), random_q_spec(rng, m)
    PB = ProjectionBody(build_body(bs), build_q(qs), p)
    scale = np.exp(rng.uniform(-1, 1, (200, 1, 1)))
    U1 = rng.standard_normal((200, n, m)) * scale
    U2 = rng.standard_normal((200, n, m)) / scale
    h1, h2, h12 = PB.support(U1), PB.support(U2), PB.support(U1 + U2)
    v = float(np.max(h12 - h1 - h2 - tol.exact * (h1 + h2)))
    return v, _fixture(n, m, p, bs, qs)


def _prop_proj_homog(rng, tol, family):
    n, m, p = _draw_case(rng)
    bs, qs = random_body_spec(rng, n, family), random_q_spec(rng, m)
    a, b = (2.0, 3.0) if rng.random() < 0.3 else tuple(np.exp(rng.uniform(-1, 1, 2)))
    K, Q = build_body(bs), build_q(qs)
    U = _unit_matrices(rng, 50, n, m)
    h = ProjectionBody(K, Q, p).support(U)
    h2 = ProjectionBody(K.linear_image(a * np.eye(n)), Q.scale(b), p).support(U)
    expect = b * a ** ((n - p) / p) * h
    v = float(np.max(np.abs(h2 - expect) - tol.exact * np.abs(expect)))
    return v, _fixture(n, m, p, bs, qs, a=a, b=b)


def _prop_proj_affine(rng, tol, family):
    n, m, p = _draw_case(rng)
    bs, qs = random_body_spec(rng, n, family), random_q_spec(rng, m)
    phi_m = random_map(rng, n)
    K, Q = build_body(bs), build_q(qs)
    U = _unit_matrices(rng, 50, n, m)
    lhs = ProjectionBody(K.linear_image(phi_m), Q, p).support(U)
    rhs = abs(np.linalg.det(phi_m)) ** (1.0 / p) * ProjectionBody(K, Q, p).support(np.linalg.inv(phi_m) @ U)
    v = float(np.max(np.abs(lhs - rhs) - tol.exact * np.abs(rhs)))
    return v, _fixture(n, m, p, bs, qs, map=phi_m.tolist())


def _rule(n, m, rng):
    return default_rule(n * m, seed=int(rng.integers(2**63)))


def _prop_phi_symmetry(rng, tol, family):
    n, m, p = _draw_case(rng)
    bs, qs = random_body_spec(rng, n, family), random_q_spec(rng, m)
    K, Q, rule = build_body(bs), build_q(qs), _rule(n, m, rng)
    f1, f2 = phi(K, Q, p, rule), phi(K, Q.negate(), p, rule)
    v = abs(f1.value - f2.value) - tol.quad(f1.err, f2.err)
    return v, _fixture(n, m, p, bs, qs, phi=f1.value, phi_neg=f2.value)


def _prop_phi_concavity(rng, tol, family):
    n, m, p = _draw_case(rng)
    bs, q1, q2 = random_body_spec(rng, n, family), random_q_spec(rng, m), random_q_spec(rng, m)
    lam = float(rng.uniform(0.1, 0.9))
    K, Q1, Q2, rule = build_body(bs), build_q(q1), build_q(q2), _rule(n, m, rng)
    mix = phi(K, bodies.lp_sum_Q(Q1, Q2, lam, p), p, rule)
    f1, f2 = phi(K, Q1, p, rule), phi(K, Q2, p, rule)
    rhs = lam * f1.value + (1 - lam) * f2.value
    v = rhs - mix.value - tol.quad(mix.err, lam * f1.err, (1 - lam) * f2.err)
    return v, _fixture(n, m, p, bs, q1, Q2=q2, lam=lam, phi_mix=mix.value, phi_combo=rhs)


def _prop_phi_affine(rng, tol, family):
    n, m, p = _draw_case(rng)
    bs, qs = random_body_spec(rng, n, family), random_q_spec(rng, m)
    phi_m = random_map(rng, n)
    K, Q, rule = build_body(bs), build_q(qs), _rule(n, m, rng)
    f = phi(K, Q, p, rule)
    g = phi(K.linear_image(phi_m), Q, p, rule)
    c = abs(np.linalg.det(phi_m)) ** ((n - p) / n)
    v = abs(g.value - c * f.value) - tol.quad(g.err, c * f.err)
    return v, _fixture(n, m, p, bs, qs, map=phi_m.tolist(), lhs=g.value, rhs=c * f.value)


def _prop_phi_homog(rng, tol, family):
    n, m, p = _draw_case(rng)
    bs, qs = random_body_spec(rng, n, family), random_q_spec(rng, m)
    a, b = (2.0, 3.0) if rng.random() < 0.3 else tuple(np.exp(rng.uniform(-1, 1, 2)))
    K, Q, rule = build_body(bs), build_q(qs), _rule(n, m, rng)
    f = phi(K, Q, p, rule)
    g = phi(K.linear_image(a * np.eye(n)), Q.scale(b), p, rule)
    expect = b**p * a ** (n - p) * f.value
    v = abs(g.value - expect) - tol.rel(expect)
    return v, _fixture(n, m, p, bs, qs, a=a, b=b, lhs=g.value, rhs=expect)


def _prop_sandwich(rng, tol, family):
    n, m, p = _draw_case(rng, capacity=True)
    bs, qs = random_body_spec(rng, n, family), random_q_spec(rng, m)
    K, Q, rule = build_body(bs), build_q(qs), _rule(n, m, rng)
    lo, up = cap_lower(K, Q, p, rule), cap_upper(K, Q, p, rule)
    v = lo.value - up.value - tol.quad(lo.err, up.err)
    return v, _fixture(n, m, p, bs, qs, lower=lo.value, upper=up.value)


def chain_violations(K, Q, p, rule, tol):
    """The three normalized chain inequalities; returns (violations, values)."""
    n = K.n
    k = n - p
    CB = cap_ball_closed_form(n, Q.m, p, Q, rule)
    up, lo = cap_upper(K, Q, p, rule), cap_lower(K, Q, p, rule)
    fK = phi(K, Q, p, rule)
    fB = d_np(Q, n, p, rule).scale(n * ball_volume(n))
    sK, sB = sp_surface(K, p), sp_surface(bodies.ball(n), p)
    vol = (K.volume_exact() / ball_volume(n)) ** (1.0 / n)
    x_up, e_up = _ratio_root(up, CB, k)
    x_lo, e_lo = _ratio_root(lo, CB, k)
    x_phi, e_phi = _ratio_root(fK, fB, k)
    x_sp, e_sp = _ratio_root(sK, sB, k)
    v = [
        vol - x_up - tol.quad(e_up),
        x_lo - x_phi - tol.quad(e_lo, e_phi),
        x_phi - x_sp - tol.quad(e_phi, e_sp),
    ]
    values = {"volume_ratio": vol, "upper_ratio": x_up, "lower_ratio": x_lo, "phi_ratio": x_phi, "sp_ratio": x_sp}
    return v, values


def _prop_chain(rng, tol, family):
    n, m, p = _draw_case(rng, capacity=True)
    bs, qs = random_body_spec(rng, n, family), random_q_spec(rng, m)
    K, Q, rule = build_body(bs), build_q(qs), _rule(n, m, rng)
    v, values = chain_violations(K, Q, p, rule, tol)
    return max(v), _fixture(n, m, p, bs, qs, **values)


def _prop_capacity_vs_radial(rng, tol, family):
    n, m, p = _draw_case(rng, capacity=True)
    bs, qs = random_body_spec(rng, n, family), random_q_spec(rng, m)
    K, Q, rule = build_body(bs), build_q(qs), _rule(n, m, rng)
    lo = cap_lower(K, Q, p, rule)
    d = d_np(Q, n, p, rule)
    cp = cap_p_upper_radial(K, p)
    rhs = d.times(cp)
    v = lo.value - rhs.value - tol.quad(lo.err, rhs.err)
    return v, _fixture(n, m, p, bs, qs, lower=lo.value, bound=rhs.value)


def _prop_nested(rng, tol, family):
    n, m, p = _draw_case(rng, capacity=True)
    outer = random_body_spec(rng, n, family)
    K2 = build_body(outer)
    if isinstance(K2, bodies.Polytope):
        for _ in range(1000):
            pts = K2.vertices * rng.uniform(0.5, 1.0, (len(K2.vertices), 1))
            try:
                inner = bodies.Polytope(pts)
            except Exception:
                continue
            if inner.offsets.min() > 0.02:
                break
        inner_spec = {"type": "polytope", "vertices": inner.vertices.tolist()}
    else:
        A = np.asarray(outer["matrix"])
        inner_spec = {"type": "ellipsoid", "matrix": (A @ np.diag(rng.uniform(0.5, 1.0, n))).tolist()}
    qs = random_q_spec(rng, m)
    K1, Q, rule = build_body(inner_spec), build_q(qs), _rule(n, m, rng)
    lo, up = cap_lower(K1, Q, p, rule), cap_upper(K2, Q, p, rule)
    v = lo.value - up.value - tol.quad(lo.err, up.err)
    return v, _fixture(n, m, p, outer, qs, inner=inner_spec, lower=lo.value, upper=up.value)


def _prop_dnp_limit(rng, tol, family):
    n = int(rng.choice([2, 3]))
    m = int(rng.choice([1, 2]))
    qs = {"type": "segment", "a": -0.5, "b": 0.5} if rng.random() < 0.3 else random_q_spec(rng, m)
    Q = build_q(qs)
    rule = _rule(n, Q.m, rng)
    d1, dp = d_np(Q, n, 1.0, rule), d_np(Q, n, 1.001, rule)
    rel = abs(dp.value - d1.value) / d1.value
    v = rel - 0.01 - tol.quad(dp.err, d1.err) / d1.value
    return v, {"n": n, "m": Q.m, "Q": qs, "d_1": d1.value, "d_1.001": dp.value}


def _prop_two_formula(rng, tol, family):
    n, m, p = _draw_case(rng)
    bs, qs = random_smooth_spec(rng, n), random_q_spec(rng, m)
    K, Q = build_body(bs), build_q(qs)
    U = _unit_matrices(rng, 5, n, m)
    a = h_projection_estimate(K, Q, p, U)
    b = h_projection_radial(K, Q, p, U)
    v = float(np.max(np.abs(a.value - b.value) - tol.factor * np.hypot(a.err, b.err) - tol.slack))
    return v, _fixture(n, m, p, bs, qs, boundary=a.value.tolist(), radial=b.value.tolist())


def tau_direct_phi(K, tau, p, rule=None, inner_level=None):
    """Phi for m = 1 with ``h^p = sum (phi_tau(nu.u))^p c^(1-p) w`` coded directly."""
    be = K.boundary_elements(inner_level)
    coef = be.surface_weights(p)
    wp, wm = (1.0 + tau) / 2.0, (1.0 - tau) / 2.0
    rule = default_rule(K.n) if rule is None else rule

    def h(X):
        t = X @ be.normals.T
        return ((wp * np.maximum(t, 0.0) ** p + wm * np.maximum(-t, 0.0) ** p) @ coef) ** (1.0 / p)

    return phi_from_polar_volume(neg_power_moment(h, K.n, rule), K.n, p)


def _prop_tau(rng, tol, family):
    n = int(rng.choice([2, 3]))
    p = float(rng.choice([1.0, 1.5, 2.0]))
    tau = float(rng.choice([-1.0, 0.0, 0.5])) if rng.random() < 0.5 else float(rng.uniform(-1, 1))
    bs = random_body_spec(rng, n, family)
    K = build_body(bs)
    rule = default_rule(n)
    f1 = phi(K, bodies.tau_segment(tau, p), p, rule)
    f2 = tau_direct_phi(K, tau, p, rule)
    v = abs(f1.value - f2.value) - tol.quad(f1.err, f2.err)
    qs = {"type": "tau_segment", "tau": tau, "p": p}
    return v, _fixture(n, 1, p, bs, qs, via_Q=f1.value, direct=f2.value)


PROPERTIES = {
    "proj-positivity": _prop_positivity,
    "proj-sublinear": _prop_sublinear,
    "proj-homog": _prop_proj_homog,
    "proj-affine": _prop_proj_affine,
    "phi-symmetry": _prop_phi_symmetry,
    "phi-concavity": _prop_phi_concavity,
    "phi-affine": _prop_phi_affine,
    "phi-homog": _prop_phi_homog,
    "sandwich-order": _prop_sandwich,
    "chain": _prop_chain,
    "thm42-bound": _prop_capacity_vs_radial,
    "dnp-limit-p1": _prop_dnp_limit,
    "nested-consistency": _prop_nested,
    "two-formula-agreement": _prop_two_formula,
    "tau-reduction": _prop_tau,
}

DESCRIPTIONS = {
    "proj-positivity": "projection-body support is finite and positive on 1000 random directions",
    "proj-sublinear": "projection-body support is subadditive on random matrix pairs",
    "proj-homog": "Pi_{p,bQ}(aK) = b a^((n-p)/p) Pi_{p,Q}K on the support level",
    "proj-affine": "h_{Pi(phi K)}(u) = |det phi|^(1/p) h_{Pi K}(phi^{-1} u)",
    "phi-symmetry": "Phi_{p,-Q}(K) = Phi_{p,Q}(K)",
    "phi-concavity": "Phi is concave in Q under L_p combinations",
    "phi-affine": "Phi(phi K) = |det phi|^((n-p)/n) Phi(K)",
    "phi-homog": "Phi_{p,bQ}(aK) = b^p a^(n-p) Phi_{p,Q}(K)",
    "sandwich-order": "capacity lower bound <= upper bound",
    "chain": "normalized volume <= capacity <= Phi ratio <= S_p ratio",
    "thm42-bound": "cap_lower <= d_{n,p}(Q) * (radial bound on C_p)",
    "dnp-limit-p1": "d_{n,1.001}(Q) within 1% of d_{n,1}(Q)",
    "nested-consistency": "K1 in K2 implies cap_lower(K1) <= cap_upper(K2)",
    "two-formula-agreement": "boundary and gauge-gradient formulas agree on smooth bodies",
    "tau-reduction": "Phi via the tau-segment equals Phi via the directly coded weight",
}


def check_property(name, trials=20, seed=7, tolerances=None, family="mixed", workers=None):
    """Run one registered property on ``trials`` random fixtures.

    Parameters
    ----------
    name : str
        One of :data:`PROPERTIES`.
    trials, seed : int
        Fixture ``i`` is drawn from ``default_rng([seed, i])``.
    tolerances : Tolerances, optional
    family : {"mixed", "polytope", "ellipsoid", "smooth"}
        Body family for the fixture generator.
    workers : int, optional
        Fixtures evaluated concurrently (default: the kernel thread count).
        Results do not depend on it.

    Returns
    -------
    PropertyReport
    """
    if name not in PROPERTIES:
        raise InputError(f"unknown property {name!r}; valid names: {', '.join(PROPERTIES)}")
    tol = tolerances or Tolerances()
    fn = PROPERTIES[name]
    start = time.perf_counter()

    def run(i):
        violation, fixture = fn(np.random.default_rng([int(seed), i]), tol, family)
        return {"trial": i, "violation": float(violation), "fixture": _jsonable(fixture)}

    workers = get_threads() if workers is None else max(1, int(workers))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        diagnostics = list(pool.map(run, range(int(trials))))
    worst = max(diagnostics, key=lambda d: d["violation"]) if diagnostics else None
    max_v = worst["violation"] if worst else -math.inf
    return PropertyReport(
        name=name,
        trials=int(trials),
        seed=int(seed),
        max_violation=max_v,
        passed=bool(max_v <= 0),
        worst_fixture=worst["fixture"] if worst else None,
        diagnostics=diagnostics,
        wall_time=time.perf_counter() - start,
    )


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.generic):
        return x.item()
    return x

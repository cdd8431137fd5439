import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import beta

from affcap import bodies
from affcap.errors import InputError
from affcap.projection import (
    ProjectionBody,
    d_np,
    flat_to_matrix,
    h_projection,
    h_projection_estimate,
    h_projection_radial,
    matrix_to_flat,
    polar_volume_projection,
)
from affcap.quadrature import sphere_rule

# mpmath values from tests/derive_oracles.py: d_{n,p}([-1/2, 1/2]) and one asymmetric segment
D_SEGMENT = {
    (2, 1.0): 0.12698727186848194,
    (2, 1.5): 0.049570259647185019,
    (2, 2.0): 0.019894367886486917,
    (3, 1.0): 0.10753175172851245,
    (3, 1.5): 0.039894228040143268,
    (3, 2.0): 0.015417436839736588,
}
D_ASYM_3_15 = 0.088672027817589249  # n = 3, p = 1.5, Q = [-0.2, 1.3]


def ball_projection_support(n, a, b, p):
    """h of the (L_p, [a, b])-projection body of B_2^n at a unit vector."""
    sphere = 2 * math.pi ** ((n - 1) / 2) / math.gamma((n - 1) / 2)
    return ((b**p + abs(a) ** p) * sphere * 0.5 * beta((p + 1) / 2, (n - 1) / 2)) ** (1 / p)


def test_flattening_is_column_major():
    X = np.arange(6.0)[None]
    U = flat_to_matrix(X, 3, 2)
    assert np.array_equal(U[0], [[0, 3], [1, 4], [2, 5]])
    assert np.array_equal(matrix_to_flat(U), X)


def test_square_projection_body_is_exact():
    K, Q = bodies.cube(2), bodies.segment(-0.5, 0.5)
    u = np.array([0.6, -0.8])
    assert h_projection(K, Q, 1.0, u) == pytest.approx(2 * (0.6 + 0.8), rel=1e-15)
    assert h_projection(K, Q, 2.0, u) == pytest.approx(1.0, rel=1e-15)
    est = h_projection_estimate(K, Q, 1.0, u)
    assert est.err == 0.0 and est.method == "facet-exact"


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("p", [1.0, 1.5, 2.0])
@pytest.mark.parametrize("ab", [(-0.5, 0.5), (-0.2, 1.3), (0.0, 1.0)])
def test_ball_segment_support_against_closed_form(n, p, ab):
    Q = bodies.segment(*ab)
    rng = np.random.default_rng(1)
    u = rng.standard_normal(n)
    u /= np.linalg.norm(u)
    est = h_projection_estimate(bodies.ball(n), Q, p, u, level=6)
    exact = ball_projection_support(n, *ab, p)
    assert abs(est.value - exact) <= max(3 * est.err, 1e-12 * exact) + 1e-5 * exact


def test_ball_support_is_rotation_invariant():
    Q = bodies.box([-1.0, 0.0], [0.5, 2.0])
    PB = ProjectionBody(bodies.ball(3), Q, 1.5, level=5)
    rng = np.random.default_rng(3)
    U = rng.standard_normal((1, 3, 2))
    R, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    assert PB.support(R @ U)[0] == pytest.approx(PB.support(U)[0], rel=1e-5)


@given(seed=st.integers(0, 2**32 - 1), p=st.sampled_from([1.0, 1.5, 2.0]), m=st.integers(1, 2))
@settings(max_examples=25, deadline=None)
def test_support_is_sublinear_and_homogeneous(seed, p, m):
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((10, 3))
    try:
        K = bodies.Polytope(np.vstack([pts, -pts]))
    except Exception:
        return
    Q = bodies.box([-0.3] * m, [1.0] * m)
    PB = ProjectionBody(K, Q, p)
    U, V = rng.standard_normal((2, 20, 3, m))
    hu, hv = PB.support(U), PB.support(V)
    assert np.all(PB.support(U + V) <= (hu + hv) * (1 + 1e-12))
    assert np.allclose(PB.support(2.5 * U), 2.5 * hu, rtol=1e-12)
    assert np.all(hu > 0)


@pytest.mark.parametrize(
    "K",
    [bodies.ellipsoid(axes=[1.5, 0.7]), bodies.lq_ball(2, 3.0), bodies.lq_ball(3, 2.5),
     bodies.linear_image(bodies.lq_ball(3, 4.0), [[1, 0.3, 0], [0, 1, 0.2], [0.1, 0, 0.8]])],
)
@pytest.mark.parametrize("p", [1.0, 2.0])
def test_two_formulas_agree_on_smooth_bodies(K, p):
    Q = bodies.segment(-0.4, 1.0)
    rng = np.random.default_rng(2)
    U = rng.standard_normal((4, K.n, 1))
    a = h_projection_estimate(K, Q, p, U)
    b = h_projection_radial(K, Q, p, U)
    assert np.all(np.abs(a.value - b.value) <= 3 * np.hypot(a.err, b.err) + 1e-6)


def test_two_formulas_on_square_with_ridge_jitter():
    K, Q = bodies.cube(2), bodies.segment(-0.5, 0.5)
    u = np.array([0.3, 0.9])
    exact = h_projection(K, Q, 1.0, u)
    est = h_projection_radial(K, Q, 1.0, u, rule=sphere_rule(2, 8, "gauss"))
    assert est.meta["jittered"] > 0
    assert abs(est.value - exact) <= 3 * est.err + 1e-6


def test_polar_volume_of_square_projection_body():
    # Pi K = [-2, 2]^2 (support 2(|u1| + |u2|)); its polar is the diamond of radius 1/2
    V = polar_volume_projection(bodies.cube(2), bodies.segment(-0.5, 0.5), 1.0)
    assert abs(V.value - 0.5) <= 3 * V.err + 1e-9


@pytest.mark.parametrize("n,p", sorted(D_SEGMENT))
def test_d_np_segment(n, p):
    est = d_np(bodies.segment(-0.5, 0.5), n, p)
    assert abs(est.value - D_SEGMENT[(n, p)]) <= 3 * est.err + 1e-6 * D_SEGMENT[(n, p)]
    assert est.value == pytest.approx(D_SEGMENT[(n, p)], rel=1e-4)


def test_d_np_asymmetric_segment():
    est = d_np(bodies.segment(-0.2, 1.3), 3, 1.5)
    assert est.value == pytest.approx(D_ASYM_3_15, rel=1e-4)


def test_d_np_is_cached():
    Q = bodies.segment(-0.5, 0.5)
    a, b = d_np(Q, 2, 1.0), d_np(bodies.segment(-0.5, 0.5), 2, 1.0)
    assert a.value == b.value and a.err == b.err


def test_input_validation():
    with pytest.raises(InputError):
        ProjectionBody(bodies.ball(2), bodies.segment(-1, 1), 0.5)
    with pytest.raises(InputError):
        h_projection(bodies.ball(3), bodies.unit_square(), 1.0, np.ones((2, 3)))
    with pytest.raises(InputError):
        polar_volume_projection(bodies.ball(2), bodies.segment(-1, 1), 1.0, rule=sphere_rule(3, 2))

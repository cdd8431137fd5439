import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from affcap import bodies
from affcap.errors import InputError
from affcap.functionals import (
    cap_ball_closed_form,
    cap_lower,
    cap_p_upper_radial,
    cap_p_variational_ball,
    cap_upper,
    capacity_sandwich,
    exact_profile,
    geometric_grid,
    phi,
    profile_J,
    profile_optimal_J,
    profile_optimize_J,
    sp_surface,
    truncation_tail,
)

SEG = bodies.segment(-0.5, 0.5)


def test_sp_surface_facets():
    assert sp_surface(bodies.cube(2), 1.0).value == pytest.approx(8.0)
    # six unit-offset faces of area 4: sum 4 * 1^(1-p)
    assert sp_surface(bodies.cube(3), 2.0).value == pytest.approx(24.0)
    est = sp_surface(bodies.cube(3, 2.0), 1.5)
    assert est.err == 0 and est.value == pytest.approx(6 * 16 * 2 ** (-0.5))


def test_sp_surface_ball_and_ellipse():
    assert sp_surface(bodies.ball(3), 2.0).value == pytest.approx(4 * math.pi, rel=1e-15)
    assert sp_surface(bodies.ball(3, 2.0), 1.5).value == pytest.approx(4 * math.pi * 2**1.5)
    # the L_1 surface area of an ellipse is its perimeter (Ramanujan II is accurate to ~1e-10 here)
    a, b = 2.0, 1.0
    h = ((a - b) / (a + b)) ** 2
    perim = math.pi * (a + b) * (1 + 3 * h / (10 + math.sqrt(4 - 3 * h)))
    est = sp_surface(bodies.ellipsoid(axes=[a, b]), 1.0)
    assert est.value == pytest.approx(perim, rel=1e-8)


def test_sp_surface_at_p_equals_n_is_volume_free():
    # S_n(aK) = S_n(K) for any a
    K = bodies.cross_polytope(3)
    assert sp_surface(K.linear_image(2.0 * np.eye(3)), 3.0).value == pytest.approx(sp_surface(K, 3.0).value)


def test_phi_square_matches_exact_value():
    est = phi(bodies.cube(2), SEG, 1.0)
    assert abs(est.value - 1.0) <= 3 * est.err + 1e-9


def test_phi_disk_closed_form():
    exact = 0.79788456080286536  # sqrt(2/pi)
    est = phi(bodies.ball(2), SEG, 1.0)
    assert abs(est.value - exact) <= 3 * est.err
    fine = phi(bodies.ball(2), SEG, 1.0, inner_level=9)
    assert abs(fine.value - exact) < abs(est.value - exact) / 10


def test_phi_homogeneity_on_polytopes_is_exact():
    K = bodies.cross_polytope(3)
    Q = bodies.box([-0.2, 0.0], [1.0, 0.5])
    for p in (1.0, 1.5):
        f = phi(K, Q, p).value
        g = phi(K.linear_image(2.0 * np.eye(3)), Q.scale(3.0), p).value
        assert g == pytest.approx(3.0**p * 2.0 ** (3 - p) * f, rel=1e-12)


@pytest.mark.parametrize("n,p,J", [(3, 2, 1.0), (4, 2, 2.0), (3, 1.5, math.sqrt(3)), (2, 1.5, 1.0)])
def test_profile_optimal_J(n, p, J):
    assert profile_optimal_J(n, p) == pytest.approx(J, rel=1e-15)


def test_variational_capacity_of_ball():
    assert cap_p_variational_ball(3, 2) == pytest.approx(4 * math.pi)
    assert cap_p_variational_ball(3, 1) == pytest.approx(4 * math.pi)
    assert cap_p_variational_ball(3, 3) == 0.0
    assert cap_p_variational_ball(2, 5) == 0.0


def test_radial_bound_on_classical_capacity():
    est = cap_p_upper_radial(bodies.ball(3), 2.0)
    assert est.value == 4 * math.pi and est.err == 0
    assert cap_p_upper_radial(bodies.cube(3), 1.0).value == pytest.approx(24.0)


def test_cap_ball_vanishes_for_p_at_least_n():
    assert cap_ball_closed_form(2, 1, 2.0, SEG).value == 0.0
    assert cap_ball_closed_form(3, 1, 4.0, SEG).value == 0.0
    with pytest.raises(InputError):
        cap_ball_closed_form(3, 2, 2.0, SEG)


def test_capacity_bounds_validate_inputs():
    with pytest.raises(InputError):
        cap_lower(bodies.cube(2), SEG, 2.0)
    with pytest.raises(InputError):
        cap_upper(bodies.cube(3), SEG, 0.5)


def test_bounds_on_nonconvex_star_body():
    star = bodies.RadialTable.circle_grid(np.tile([1.0, 0.45], 8))
    assert not star.convex
    lo, up = cap_lower(star, SEG, 1.5), cap_upper(star, SEG, 1.5)
    assert 0 < lo.value <= up.value + 3 * math.hypot(lo.err, up.err)


def test_ball_capacity_formulas_agree():
    n, p = 3, 2.0
    ball = cap_ball_closed_form(n, 1, p, SEG)
    assert ball.value == pytest.approx(4 * math.pi * 0.015417436839736588, rel=1e-4)
    assert cap_lower(bodies.ball(n), SEG, p).value == pytest.approx(ball.value, rel=1e-12)


def test_sandwich_on_cube():
    s = capacity_sandwich(bodies.cube(3), SEG, 1.5)
    assert s.consistent and s.gap >= 0
    assert "volume-lower" in s.lower.method and "radial-profile-upper" in s.upper.method


def test_capacity_bounds_affine_covariance():
    K = bodies.cross_polytope(3)
    M = np.array([[1.2, 0.4, 0.0], [0.0, 0.9, 0.3], [0.2, 0.0, 1.1]])
    c = abs(np.linalg.det(M)) ** ((3 - 1.5) / 3)
    lo, lo2 = cap_lower(K, SEG, 1.5), cap_lower(K.linear_image(M), SEG, 1.5)
    assert lo2.value == pytest.approx(c * lo.value, rel=1e-12)
    up, up2 = cap_upper(K, SEG, 1.5), cap_upper(K.linear_image(M), SEG, 1.5)
    assert abs(up2.value - c * up.value) <= 3 * math.hypot(up2.err, c * up.err) + 1e-6


# --- radial profiles ----------------------------------------------------------


@pytest.mark.parametrize("n,p", [(3, 1.5), (3, 2.0), (4, 2.0), (2, 1.5), (4, 3.0)])
def test_profile_optimizer_close_to_closed_form(n, p):
    S = 1e3
    prof, J = profile_optimize_J(n, p, 400, S)
    # best energy among profiles that vanish at S
    truncated = profile_optimal_J(n, p) * (1 - S ** (-(n - p) / (p - 1))) ** (1 - p)
    assert truncated <= J <= truncated + 5e-3
    assert prof.J(n) == pytest.approx(J, rel=1e-10)
    assert prof.g[0] == 1.0 and prof.g[-1] == 0.0
    assert np.all(np.diff(prof.g) <= 0)


@given(n=st.integers(2, 5), frac=st.floats(0.05, 0.95), N=st.integers(16, 300))
@settings(max_examples=40, deadline=None)
def test_optimizer_beats_the_sampled_exact_profile(n, frac, N):
    p = 1 + frac * (n - 1)
    S = 50.0
    prof, J = profile_optimize_J(n, p, N, S)
    s = geometric_grid(N, S)
    g = exact_profile(n, p, s)
    g = (g - g[-1]) / (1 - g[-1])
    assert J <= profile_J(s, g, n, p) * (1 + 1e-10)


def test_truncation_tail_matches_exact_profile_energy():
    n, p, S = 3, 2.0, 10.0
    # g = 1/s beyond S: int_S^inf s^-4 s^2 ds = 1/S
    assert truncation_tail(n, p, S) == pytest.approx(1 / S)


def test_profile_optimizer_validation():
    with pytest.raises(InputError):
        profile_optimize_J(3, 1.0)
    with pytest.raises(InputError):
        profile_optimize_J(3, 2.0, grid_size=4)
    with pytest.raises(InputError):
        profile_optimize_J(3, 2.0, S_max=1.0)

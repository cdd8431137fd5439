"""Higher-order affine functionals of star bodies and bounds on affine capacities.

Quantities returned by the numerical routines are :class:`Estimate` objects
carrying a value, an error bar and the method that produced them.
"""
__version__ = "0.1.0"

from .bodies import (
    BallQ,
    Ellipsoid,
    LinearImage,
    LqBall,
    Polytope,
    PolytopeQ,
    RadialTable,
    ball,
    box,
    cross_polytope,
    cube,
    ellipsoid,
    linear_image,
    lp_sum_Q,
    lq_ball,
    segment,
    simplex,
    simplex_q,
    support_Q,
    tau_segment,
    unit_square,
    volume,
)
from .errors import AffcapError, GeometryError, InputError, IntegrandError, NumericalError, PositivityError
from .functionals import (
    CapacitySandwich,
    cap_ball_closed_form,
    cap_lower,
    cap_p_upper_radial,
    cap_p_variational_ball,
    cap_upper,
    capacity_sandwich,
    phi,
    profile_optimal_J,
    profile_optimize_J,
    sp_surface,
)
from .projection import ProjectionBody, d_np, h_projection, h_projection_estimate, h_projection_radial
from .quadrature import Estimate, SphereRule, integrate_sphere, sphere_rule

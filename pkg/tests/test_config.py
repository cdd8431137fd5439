import numpy as np
import pytest

from affcap import bodies
from affcap.config import (
    build_body,
    build_q,
    build_rules,
    scaled_body_spec,
    validate_config,
)
from affcap.errors import GeometryError, InputError


@pytest.mark.parametrize(
    "spec,cls,volume",
    [
        ({"type": "ball", "n": 3}, bodies.Ellipsoid, 4.188790204786391),
        ({"type": "cube", "n": 2, "half_width": 0.5}, bodies.Polytope, 1.0),
        ({"type": "cross_polytope", "n": 2}, bodies.Polytope, 2.0),
        ({"type": "simplex", "vertices": [[-1, -1], [2, 0], [0, 2]]}, bodies.Polytope, 4.0),
        ({"type": "ellipsoid", "axes": [1, 2]}, bodies.Ellipsoid, 2 * np.pi),
        ({"type": "ellipsoid", "matrix": [[2, 0], [1, 1]]}, bodies.Ellipsoid, 2 * np.pi),
        ({"type": "lq_ball", "n": 2, "q": 3}, bodies.LqBall, 3.5332775005708999),
        ({"type": "lq_ball", "n": 2, "q": 1}, bodies.Polytope, 2.0),
        ({"type": "radial_table", "n": 2, "radii": [1, 1, 1, 1]}, bodies.RadialTable, 2.0),
        ({"type": "linear_image", "body": {"type": "cube", "n": 2}, "matrix": [[2, 0], [0, 1]]}, bodies.Polytope, 8.0),
        (
            {"type": "linear_image", "body": {"type": "lq_ball", "n": 2, "q": 3}, "matrix": [[2, 0], [0, 1]]},
            bodies.LinearImage,
            2 * 3.5332775005708999,
        ),
    ],
)
def test_build_body(spec, cls, volume):
    K = build_body(spec)
    assert isinstance(K, cls)
    assert K.volume_exact() == pytest.approx(volume, rel=1e-12)


def test_radial_table_from_sample():
    K = build_body({"type": "radial_table", "sample": {"type": "ball", "n": 3}, "resolution": 2})
    assert isinstance(K, bodies.RadialTable) and K.n == 3


@pytest.mark.parametrize(
    "spec,m,x,h",
    [
        ({"type": "segment", "a": -0.5, "b": 2}, 1, [1.0], 2.0),
        ({"type": "box", "lower": [-1, 0], "upper": [1, 2]}, 2, [1.0, 1.0], 3.0),
        ({"type": "unit_square"}, 2, [-1.0, 1.0], 1.0),
        ({"type": "square", "half_width": 2}, 2, [1.0, 1.0], 4.0),
        ({"type": "simplex", "vertices": [[0, 0], [1, 0], [0, 1]]}, 2, [1.0, 2.0], 2.0),
        ({"type": "polytope", "vertices": [[-1], [1]]}, 1, [-3.0], 3.0),
        ({"type": "ball", "center": [0, 0.5], "radius": 1}, 2, [0.0, 1.0], 1.5),
        ({"type": "tau_segment", "tau": 1.0, "p": 2}, 1, [-1.0], 0.0),
    ],
)
def test_build_q(spec, m, x, h):
    Q = build_q(spec)
    assert Q.m == m
    assert Q.support(x) == pytest.approx(h)


def test_build_lp_sum_q():
    spec = {"type": "lp_sum", "q1": {"type": "segment", "a": -1, "b": 1},
            "q2": {"type": "segment", "a": 0, "b": 2}, "lambda": 0.5, "p": 2}
    assert build_q(spec).support([1.0]) ** 2 == pytest.approx(0.5 * 1 + 0.5 * 4)


@pytest.mark.parametrize(
    "spec,err",
    [
        ({"type": "dodecahedron"}, InputError),
        ({"type": "cube"}, InputError),
        ({"type": "ellipsoid", "matrix": [1, 2]}, InputError),
        ({"type": "polytope", "vertices": [[0, 0], [1, 0], [0, 1]]}, GeometryError),
        ("cube", InputError),
        ({"type": "ball", "n": "three"}, InputError),
    ],
)
def test_bad_body_specs(spec, err):
    with pytest.raises(err):
        build_body(spec)


@pytest.mark.parametrize(
    "spec,err",
    [
        ({"type": "segment", "a": 0.5, "b": 1}, GeometryError),
        ({"type": "segment", "a": -1}, InputError),
        ({"type": "box", "lower": [1], "upper": [0, 1]}, InputError),
        ({"type": "hexagon"}, InputError),
    ],
)
def test_bad_q_specs(spec, err):
    with pytest.raises(err):
        build_q(spec)


def test_scaled_body_spec():
    spec = scaled_body_spec({"type": "cube", "n": 3}, 2.0)
    assert build_body(spec).volume_exact() == pytest.approx(64.0)


def test_validate_config():
    cfg = {"body": {"type": "ball", "n": 2}, "Q": {"type": "segment", "a": -1, "b": 1}, "p": 1.5,
           "quantities": ["phi", "sp"], "outer": {"kind": "gauss", "level": 4}}
    assert validate_config(cfg) is cfg
    with pytest.raises(InputError, match="quantities"):
        validate_config(dict(cfg, quantities=["area"]))
    with pytest.raises(InputError):
        validate_config(dict(cfg, p=0.5))
    with pytest.raises(InputError):
        validate_config(dict(cfg, bogus=1))
    with pytest.raises(InputError, match="exactly one axis"):
        validate_config(dict(cfg, sweep={"p": [1, 2], "a": [1, 2]}))
    with pytest.raises(InputError):
        validate_config(dict(cfg, sweep={"theta": [1, 2]}))


def test_build_rules():
    inner, rule = build_rules({"inner": {"level": 3}, "outer": {"kind": "qmc", "level": 1}, "seed": 9}, 3, 2)
    assert inner == 3 and rule.kind == "qmc" and rule.seed == 9 and rule.dim == 6
    inner, rule = build_rules({}, 2, 1)
    assert inner is None and rule.kind == "gauss"

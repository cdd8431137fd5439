"""Structured configuration: named body constructors, rule descriptors and the run schema.

Body and Q specifications are small JSON objects such as
``{"type": "cube", "n": 3, "half_width": 1.0}`` or
``{"type": "segment", "a": -0.5, "b": 0.5}``.
"""
from __future__ import annotations

import copy

import jsonschema
import numpy as np

from . import bodies
from .errors import AffcapError, InputError
from .quadrature import rule_from_descriptor

SCHEMA_VERSION = "1"

QUANTITIES = ("volume", "sp", "phi", "d-np", "cap-ball", "cap-lower", "cap-upper", "j-star", "j-opt", "h-proj")
SWEEP_AXES = ("p", "tau", "a", "b", "level")

_RULE_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["gauss", "qmc", "mc", "auto"]},
        "level": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
    },
    "required": ["level"],
    "additionalProperties": False,
}

_SHAPE_SCHEMA = {"type": "object", "properties": {"type": {"type": "string"}}, "required": ["type"]}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "RunConfig",
    "type": "object",
    "properties": {
        "body": _SHAPE_SCHEMA,
        "Q": _SHAPE_SCHEMA,
        "n": {"type": "integer", "minimum": 2},
        "m": {"type": "integer", "minimum": 1},
        "p": {"type": "number", "minimum": 1},
        "quantities": {"type": "array", "items": {"enum": list(QUANTITIES)}, "uniqueItems": True},
        "inner": _RULE_SCHEMA,
        "outer": _RULE_SCHEMA,
        "seed": {"type": "integer", "minimum": 0},
        "directions": {"type": "array", "items": {"type": "array"}},
        "j_opt": {
            "type": "object",
            "properties": {
                "grid_size": {"type": "integer", "minimum": 16},
                "S_max": {"type": "number", "exclusiveMinimum": 1},
            },
            "additionalProperties": False,
        },
        "sweep": {
            "type": "object",
            "propertyNames": {"enum": list(SWEEP_AXES)},
            "additionalProperties": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        },
        "verify": {
            "type": "object",
            "properties": {
                "suite": {"type": "array", "items": {"type": "string"}},
                "trials": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}

_ESTIMATE_SCHEMA = {
    "type": "object",
    "properties": {
        "value": {},
        "err": {},
        "method": {"type": "string"},
        "nodes": {"type": "integer"},
        "seed": {"type": ["integer", "null"]},
        "wall_time": {"type": "number"},
    },
    "required": ["value", "err", "method", "nodes", "wall_time"],
}

RESULT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "ResultDocument",
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "tool_version": {"type": "string"},
        "command": {"type": "string"},
        "config": {"type": "object"},
        "results": {"type": "object", "additionalProperties": _ESTIMATE_SCHEMA},
        "rows": {"type": "array"},
        "reports": {"type": "array"},
    },
    "required": ["schema_version", "tool_version", "command", "config"],
}


def validate_config(config):
    """Validate a run configuration against :data:`CONFIG_SCHEMA`."""
    try:
        jsonschema.validate(config, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(x) for x in exc.absolute_path) or "<root>"
        raise InputError(f"invalid config at {where}: {exc.message}") from None
    if "sweep" in config and len(config["sweep"]) != 1:
        raise InputError(f"a sweep varies exactly one axis, got {sorted(config['sweep'])}")
    return config


def _get(spec, key, default=None, required=True):
    if key in spec:
        return spec[key]
    if default is None and required:
        raise InputError(f"{spec.get('type')!r} spec needs {key!r}")
    return default


def _matrix(x, name):
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 2:
        raise InputError(f"{name} must be a matrix (list of rows)")
    return arr


def build_body(spec):
    """Construct a star body from a spec dictionary."""
    if not isinstance(spec, dict) or "type" not in spec:
        raise InputError(f"body spec must be an object with a 'type': {spec!r}")
    kind = spec["type"]
    try:
        if kind == "ball":
            return bodies.ball(int(_get(spec, "n")), float(spec.get("radius", 1.0)))
        if kind == "cube":
            return bodies.cube(int(_get(spec, "n")), float(spec.get("half_width", 1.0)))
        if kind == "cross_polytope":
            return bodies.cross_polytope(int(_get(spec, "n")), float(spec.get("radius", 1.0)))
        if kind in ("polytope", "simplex"):
            return bodies.Polytope(_matrix(_get(spec, "vertices"), "vertices"))
        if kind == "ellipsoid":
            if "matrix" in spec:
                return bodies.Ellipsoid(_matrix(spec["matrix"], "matrix"))
            return bodies.ellipsoid(axes=_get(spec, "axes"))
        if kind == "lq_ball":
            return bodies.lq_ball(int(_get(spec, "n")), float(_get(spec, "q")), float(spec.get("radius", 1.0)))
        if kind == "radial_table":
            if "sample" in spec:
                return bodies.RadialTable.sample(build_body(spec["sample"]), int(_get(spec, "resolution")))
            n = int(_get(spec, "n"))
            radii = _get(spec, "radii")
            if n == 2:
                return bodies.RadialTable.circle_grid(radii)
            return bodies.RadialTable.icosphere_grid(radii, int(_get(spec, "subdivisions")))
        if kind == "linear_image":
            return bodies.linear_image(build_body(_get(spec, "body")), _matrix(_get(spec, "matrix"), "matrix"))
    except AffcapError:
        raise
    except (TypeError, KeyError, ValueError) as exc:
        raise InputError(f"malformed {kind!r} spec: {exc}") from None
    raise InputError(f"unknown body type {kind!r}")


def build_q(spec):
    """Construct a Q body from a spec dictionary."""
    if not isinstance(spec, dict) or "type" not in spec:
        raise InputError(f"Q spec must be an object with a 'type': {spec!r}")
    kind = spec["type"]
    try:
        if kind == "segment":
            return bodies.segment(float(_get(spec, "a")), float(_get(spec, "b")))
        if kind == "box":
            return bodies.box(_get(spec, "lower"), _get(spec, "upper"))
        if kind == "unit_square":
            return bodies.unit_square()
        if kind == "square":
            hw = float(spec.get("half_width", 1.0))
            return bodies.box([-hw, -hw], [hw, hw])
        if kind == "simplex":
            return bodies.simplex_q(_get(spec, "vertices"))
        if kind == "polytope":
            return bodies.PolytopeQ(_get(spec, "vertices"))
        if kind == "ball":
            return bodies.BallQ(_get(spec, "center"), float(_get(spec, "radius")))
        if kind == "tau_segment":
            return bodies.tau_segment(float(_get(spec, "tau")), float(_get(spec, "p")))
        if kind == "lp_sum":
            return bodies.lp_sum_Q(
                build_q(_get(spec, "q1")), build_q(_get(spec, "q2")), float(_get(spec, "lambda")),
                float(_get(spec, "p")),
            )
    except AffcapError:
        raise
    except (TypeError, KeyError, ValueError) as exc:
        raise InputError(f"malformed {kind!r} spec: {exc}") from None
    raise InputError(f"unknown Q type {kind!r}")


def scaled_body_spec(spec, a):
    """Spec of ``a * K`` (a linear image by a multiple of the identity)."""
    n = build_body(spec).n
    return {"type": "linear_image", "body": copy.deepcopy(spec), "matrix": (a * np.eye(n)).tolist()}


def build_rules(config, n, m):
    """Inner boundary level and outer rule (on S^{nm-1}) from a config."""
    inner = config.get("inner")
    inner_level = int(inner["level"]) if inner else None
    outer_desc = config.get("outer")
    if outer_desc is not None and "seed" not in outer_desc and "seed" in config:
        outer_desc = dict(outer_desc, seed=config["seed"])
    return inner_level, rule_from_descriptor(outer_desc, n * m)

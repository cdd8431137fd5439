"""Command-line front end.

    affcap compute --config run.json [--out result.json] [--format json|csv]
    affcap verify  [--suite NAME ...] [--trials N] [--seed S] [--out reports.json]
    affcap sweep   --config sweep.json [--out table.csv]
    affcap list-properties
    affcap schema  [config|result]

Exit codes: 0 success, 1 property failure, 2 input or geometry error,
3 numerical failure.  Errors are printed to stderr as one JSON object.
"""
from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import os
import sys
import tempfile
import time

import numpy as np

from . import __version__, kernels, verify
from .config import (
    CONFIG_SCHEMA,
    QUANTITIES,
    RESULT_SCHEMA,
    SCHEMA_VERSION,
    build_body,
    build_q,
    build_rules,
    scaled_body_spec,
    validate_config,
)
from .errors import AffcapError, GeometryError, InputError, NumericalError
from .functionals import (
    _j_factor,
    cap_ball_closed_form,
    cap_lower,
    cap_upper,
    phi,
    profile_optimize_J,
    sp_surface,
    truncation_tail,
    volume_estimate,
)
from .projection import d_np, h_projection_estimate
from .quadrature import Estimate

EXIT_OK, EXIT_PROPERTY, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2, 3


# ---------------------------------------------------------------------------
# Computation
# ---------------------------------------------------------------------------


def _resolve(config):
    """Bodies, dimensions and rules for a validated config."""
    if "body" not in config or "Q" not in config or "p" not in config:
        raise InputError("compute needs 'body', 'Q' and 'p'")
    K, Q = build_body(config["body"]), build_q(config["Q"])
    if config.get("n", K.n) != K.n:
        raise InputError(f"config n = {config['n']} but the body lives in R^{K.n}")
    if config.get("m", Q.m) != Q.m:
        raise InputError(f"config m = {config['m']} but Q lives in R^{Q.m}")
    inner_level, rule = build_rules(config, K.n, Q.m)
    return K, Q, float(config["p"]), inner_level, rule


def _directions(config, n, m):
    if "directions" not in config:
        raise InputError("h-proj needs a 'directions' list")
    out = []
    for d in config["directions"]:
        U = np.asarray(d, dtype=float)
        if m == 1 and U.shape == (n,):
            U = U.reshape(n, 1)
        if U.shape != (n, m):
            raise InputError(f"direction {d!r} is not an {n}x{m} matrix")
        out.append(U)
    return np.stack(out)


def compute_quantity(name, K, Q, p, rule, inner_level, config):
    """One named functional as an :class:`Estimate`."""
    n, m = K.n, Q.m
    if name == "volume":
        return volume_estimate(K)
    if name == "sp":
        return sp_surface(K, p, inner_level)
    if name == "phi":
        return phi(K, Q, p, rule, inner_level)
    if name == "d-np":
        return d_np(Q, n, p, rule, inner_level)
    if name == "cap-ball":
        return cap_ball_closed_form(n, m, p, Q, rule, inner_level)
    if name == "cap-lower":
        return cap_lower(K, Q, p, rule, inner_level)
    if name == "cap-upper":
        return cap_upper(K, Q, p, rule, inner_level)
    if name == "j-star":
        if not 1 <= p < n:
            raise InputError(f"j-star needs 1 <= p < n, got p={p}, n={n}")
        return Estimate(_j_factor(n, p), 0.0, method="closed-form")
    if name == "j-opt":
        opts = config.get("j_opt", {})
        S_max = float(opts.get("S_max", 1e3))
        prof, value = profile_optimize_J(n, p, int(opts.get("grid_size", 400)), S_max)
        tail = truncation_tail(n, p, S_max)
        return Estimate(value, tail, nodes=len(prof.s), method="profile-kkt", meta={"truncation_tail": tail})
    if name == "h-proj":
        return h_projection_estimate(K, Q, p, _directions(config, n, m), inner_level)
    raise InputError(f"unknown quantity {name!r}; valid: {', '.join(QUANTITIES)}")


def _estimate_record(est, wall_time):
    rec = est.to_dict()
    rec["meta"] = verify._jsonable(est.meta)
    rec["wall_time"] = wall_time
    return rec


def compute_results(config):
    K, Q, p, inner_level, rule = _resolve(config)
    results = {}
    for name in config.get("quantities", ["phi"]):
        start = time.perf_counter()
        est = compute_quantity(name, K, Q, p, rule, inner_level, config)
        results[name] = _estimate_record(est, time.perf_counter() - start)
    return results


def _document(command, config, **parts):
    doc = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "command": command,
        "config": config,
    }
    doc.update(parts)
    return doc


def sweep_rows(config):
    """One row per grid point of the single sweep axis."""
    (axis, grid), = config["sweep"].items()
    quantities = config.get("quantities", ["phi"])
    rows = []
    for x in grid:
        cfg = copy.deepcopy(config)
        del cfg["sweep"]
        q_scale = 1.0
        if axis == "p":
            cfg["p"] = x
        elif axis == "tau":
            if "p" not in cfg:
                raise InputError("a tau sweep needs 'p'")
            cfg["Q"] = {"type": "tau_segment", "tau": x, "p": cfg["p"]}
        elif axis == "a":
            cfg["body"] = scaled_body_spec(cfg["body"], x)
        elif axis == "b":
            q_scale = x
        elif axis == "level":
            cfg["inner"] = {"level": int(x)}
            cfg["outer"] = dict(cfg.get("outer", {}), level=int(x))
        K, Q, p, inner_level, rule = _resolve(cfg)
        if q_scale != 1.0:
            Q = Q.scale(q_scale)
        row = {axis: x}
        for name in quantities:
            est = compute_quantity(name, K, Q, p, rule, inner_level, cfg)
            row[name] = verify._jsonable(est.value)
            row[f"{name}_err"] = verify._jsonable(est.err)
            row[f"{name}_method"] = est.method
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def dumps_json(doc):
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=True) + "\n"


def rows_to_csv(rows):
    buf = io.StringIO()
    if rows:
        fields = list(rows[0])
        writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: json.dumps(v) if isinstance(v, list) else v for k, v in row.items()})
    return buf.getvalue()


def results_to_rows(results):
    return [
        {"quantity": k, "value": r["value"], "err": r["err"], "method": r["method"], "nodes": r["nodes"]}
        for k, r in results.items()
    ]


def write_atomic(path, text):
    """Write ``text`` to ``path`` via a temporary file in the same directory."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".affcap-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x):
    if isinstance(x, list):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


def format_table(header, rows):
    cells = [[_fmt(r.get(h, "")) for h in header] for r in rows]
    widths = [max(len(h), *(len(c[i]) for c in cells)) if cells else len(h) for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in cells]
    return "\n".join(lines)


def _emit(args, doc, rows):
    """Write to ``--out`` (a sweep in CSV also gets a sibling .json document), or CSV to stdout."""
    if args.out:
        text = rows_to_csv(rows) if args.format == "csv" else dumps_json(doc)
        write_atomic(args.out, text)
        if args.format == "csv" and doc.get("command") == "sweep":
            write_atomic(os.path.splitext(args.out)[0] + ".json", dumps_json(doc))
    elif args.format == "csv":
        sys.stdout.write(rows_to_csv(rows))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            config = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read config {path!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"config {path!r} is not valid JSON: {exc}") from None
    return config


def _config_from_args(args):
    config = _load_config(args.config)
    if args.seed is not None:
        config["seed"] = args.seed
    return validate_config(config)


def cmd_compute(args):
    config = _config_from_args(args)
    if "sweep" in config:
        raise InputError("this config has a 'sweep'; use the sweep command")
    results = compute_results(config)
    doc = _document("compute", config, results=results)
    rows = results_to_rows(results)
    _emit(args, doc, rows)
    if args.format != "csv" or args.out:
        print(format_table(["quantity", "value", "err", "method"], rows))
    return EXIT_OK


def cmd_sweep(args):
    config = _config_from_args(args)
    if "sweep" not in config:
        raise InputError("sweep needs a 'sweep' object with one axis")
    rows = sweep_rows(config)
    doc = _document("sweep", config, rows=rows)
    _emit(args, doc, rows)
    if args.format != "csv" or args.out:
        print(format_table(list(rows[0]), rows))
    return EXIT_OK


def cmd_verify(args):
    config = _config_from_args(args)
    opts = config.get("verify", {})
    suite = args.suite or opts.get("suite") or ["all"]
    if "all" in suite:
        suite = list(verify.PROPERTIES)
    unknown = [s for s in suite if s not in verify.PROPERTIES]
    if unknown:
        raise InputError(f"unknown properties {unknown}; valid names: {', '.join(verify.PROPERTIES)}")
    trials = args.trials or opts.get("trials", 20)
    seed = config.get("seed", 7)
    reports = [verify.check_property(name, trials=trials, seed=seed) for name in suite]
    docs = [r.to_dict() for r in reports]
    doc = _document("verify", config, reports=docs)
    rows = [
        {"property": r.name, "status": "pass" if r.passed else "FAIL", "max_violation": r.max_violation,
         "trials": r.trials, "seconds": round(r.wall_time, 2)}
        for r in reports
    ]
    _emit(args, doc, rows)
    if args.format != "csv" or args.out:
        print(format_table(["property", "status", "max_violation", "trials", "seconds"], rows))
    failed = [r.name for r in reports if not r.passed]
    if failed:
        _error("PropertyFailure", f"properties failed: {', '.join(failed)}", EXIT_PROPERTY)
        return EXIT_PROPERTY
    return EXIT_OK


def cmd_list_properties(args):
    for name, text in verify.DESCRIPTIONS.items():
        print(f"{name:24s} {text}")
    return EXIT_OK


def cmd_schema(args):
    schema = RESULT_SCHEMA if args.which == "result" else CONFIG_SCHEMA
    text = dumps_json(schema)
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="seed for stochastic rules and fixtures")
    common.add_argument("--threads", type=int, help="worker threads (default: all cores)")
    common.add_argument("--out", metavar="PATH", help="write the result document here")
    common.add_argument("--format", choices=["json", "csv"], default="json")

    parser = argparse.ArgumentParser(prog="affcap", description="Higher-order affine functionals and capacity bounds.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("compute", parents=[common], help="compute functionals for one body").set_defaults(fn=cmd_compute)
    sub.add_parser("sweep", parents=[common], help="vary one parameter over a grid").set_defaults(fn=cmd_sweep)
    v = sub.add_parser("verify", parents=[common], help="run randomized property checks")
    v.add_argument("--suite", nargs="+", metavar="NAME", help="property names or 'all'")
    v.add_argument("--trials", type=int, help="fixtures per property (default 20)")
    v.set_defaults(fn=cmd_verify)
    sub.add_parser("list-properties", help="list registered properties").set_defaults(fn=cmd_list_properties)
    s = sub.add_parser("schema", help="print a JSON schema")
    s.add_argument("which", nargs="?", choices=["config", "result"], default="config")
    s.add_argument("--out", metavar="PATH")
    s.set_defaults(fn=cmd_schema)
    return parser


def _error(kind, message, code):
    print(json.dumps({"error": kind, "message": message, "exit_code": code}), file=sys.stderr)


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", None):
        kernels.set_threads(args.threads)
    try:
        return args.fn(args)
    except (InputError, GeometryError) as exc:
        _error(type(exc).__name__, str(exc), EXIT_INPUT)
        return EXIT_INPUT
    except NumericalError as exc:
        _error(type(exc).__name__, str(exc), EXIT_NUMERICAL)
        return EXIT_NUMERICAL
    except AffcapError as exc:
        _error(type(exc).__name__, str(exc), EXIT_INPUT)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

"""Compare the compiled and pure-Python kernel backends.

Times the projection-body support sums (outer directions x boundary elements
x vertices of Q) directly, then one end-to-end ``phi`` evaluation, and checks
that both backends agree.

    python3 benchmarks/bench_kernels.py --repeat 3
"""
import argparse
import json
import time

import numpy as np

from affcap import bodies, kernels
from affcap.functionals import phi


def _best_of(fn, repeat):
    best, out = np.inf, None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def kernel_cases(rng, N, J):
    n, m = 3, 2
    U = rng.standard_normal((N, n, m))
    normals = rng.standard_normal((J, n))
    normals /= np.linalg.norm(normals, axis=1)[:, None]
    coef = rng.uniform(0.1, 1.0, J)
    square = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    return {
        "polytope-Q": lambda: kernels.polytope_support_power_sum(U, normals, coef, square, 1.5),
        "ball-Q": lambda: kernels.ball_support_power_sum(U, normals, coef, np.array([0.2, 0.1]), 1.0, 1.5),
    }


def end_to_end():
    return phi(bodies.ellipsoid(axes=[1.0, 0.7, 1.3]), bodies.unit_square(), 1.5).value


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--directions", type=int, default=4096, help="outer directions N")
    ap.add_argument("--elements", type=int, default=2048, help="boundary elements J")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true", help="print a JSON summary")
    args = ap.parse_args(argv)

    if kernels.compiled_backend is None:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation` first")

    rng = np.random.default_rng(0)
    cases = kernel_cases(rng, args.directions, args.elements)
    cases["phi end-to-end"] = end_to_end
    rows = []
    previous = kernels.BACKEND
    try:
        for name, fn in cases.items():
            kernels.use_backend("compiled")
            t_c, out_c = _best_of(fn, args.repeat)
            kernels.use_backend("python")
            t_p, out_p = _best_of(fn, args.repeat)
            diff = float(np.max(np.abs(np.asarray(out_c) - np.asarray(out_p)) / np.maximum(np.abs(out_p), 1e-300)))
            rows.append({"case": name, "compiled_s": t_c, "python_s": t_p, "speedup": t_p / t_c, "max_rel_diff": diff})
    finally:
        kernels.use_backend(previous)

    if args.json:
        print(json.dumps({"threads": kernels.get_threads(), "rows": rows}, indent=2))
        return
    print(f"threads={kernels.get_threads()} N={args.directions} J={args.elements}")
    print(f"{'case':<16}{'compiled [s]':>14}{'python [s]':>12}{'speedup':>9}{'max rel diff':>14}")
    for r in rows:
        print(f"{r['case']:<16}{r['compiled_s']:>14.4f}{r['python_s']:>12.4f}{r['speedup']:>9.2f}{r['max_rel_diff']:>14.2e}")


if __name__ == "__main__":
    main()

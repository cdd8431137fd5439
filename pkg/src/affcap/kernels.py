"""Backend selection for the hot loops.

The compiled Cython extension is used when it imports cleanly; otherwise the
numpy fallback is used.  Setting ``AFFCAP_PURE_PYTHON=1`` forces the fallback.
Large batches are split across a thread pool (the compiled kernels release the
GIL); each direction is summed independently, so results do not depend on the
thread count.
"""
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _kernels_py as python_backend

try:
    if os.environ.get("AFFCAP_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("compiled kernels disabled by AFFCAP_PURE_PYTHON")
    from . import _kernels as compiled_backend
except ImportError:
    compiled_backend = None

BACKEND = "compiled" if compiled_backend is not None else "python"
_impl = compiled_backend if compiled_backend is not None else python_backend
_threads = os.cpu_count() or 1
_MIN_ROWS_PER_TASK = 256


def set_threads(count):
    """Cap the number of worker threads used by the kernels (``None`` = all cores)."""
    global _threads
    _threads = max(1, int(count)) if count else (os.cpu_count() or 1)


def get_threads():
    return _threads


def use_backend(name):
    """Switch between ``"compiled"`` and ``"python"``; returns the previous name."""
    global _impl, BACKEND
    previous = BACKEND
    if name == "compiled":
        if compiled_backend is None:
            raise RuntimeError("compiled kernels are not available")
        _impl = compiled_backend
    elif name == "python":
        _impl = python_backend
    else:
        raise ValueError(f"unknown backend {name!r}")
    BACKEND = name
    return previous


def _dispatch(fn, U, *args):
    U = np.ascontiguousarray(U, dtype=np.float64)
    N = U.shape[0]
    workers = min(_threads, max(1, N // _MIN_ROWS_PER_TASK))
    if workers <= 1:
        return fn(U, *args)
    bounds = np.linspace(0, N, workers + 1).astype(int)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(lambda se: fn(U[se[0] : se[1]], *args), zip(bounds[:-1], bounds[1:]))
        return np.concatenate(list(parts))


def polytope_support_power_sum(U, normals, coef, qverts, p):
    """``S[i] = sum_j coef[j] * h_Q(normals[j]^T U[i])**p`` for a vertex polytope Q.

    Parameters
    ----------
    U : ndarray, shape (N, n, m)
    normals : ndarray, shape (J, n)
    coef : ndarray, shape (J,)
    qverts : ndarray, shape (K, m)
    p : float
    """
    return _dispatch(
        _impl.polytope_support_power_sum,
        U,
        np.ascontiguousarray(normals, dtype=np.float64),
        np.ascontiguousarray(coef, dtype=np.float64),
        np.ascontiguousarray(qverts, dtype=np.float64),
        float(p),
    )


def ball_support_power_sum(U, normals, coef, center, radius, p):
    """Same as :func:`polytope_support_power_sum` for a Euclidean ball Q."""
    return _dispatch(
        _impl.ball_support_power_sum,
        U,
        np.ascontiguousarray(normals, dtype=np.float64),
        np.ascontiguousarray(coef, dtype=np.float64),
        np.ascontiguousarray(center, dtype=np.float64),
        float(radius),
        float(p),
    )

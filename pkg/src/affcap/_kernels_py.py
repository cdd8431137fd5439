"""Pure numpy implementation of the kernels in ``_kernels.pyx``.

Used when the compiled extension is unavailable or disabled through the
``AFFCAP_PURE_PYTHON`` environment variable.  Work is chunked over the
direction axis to bound memory.
"""
import numpy as np

_CHUNK_ELEMENTS = 4_000_000


def _chunks(N, per_row):
    step = max(1, _CHUNK_ELEMENTS // max(per_row, 1))
    for start in range(0, N, step):
        yield start, min(N, start + step)


def _row_sum(h, coef):
    # explicit per-row reduction: a BLAS matvec would block by batch shape,
    # making results depend on how the direction axis is chunked
    return np.sum(h * coef, axis=1)


def _power(h, p):
    if p == 1.0:
        return h
    if p == 2.0:
        return h * h
    return h**p


def polytope_support_power_sum(U, normals, coef, qverts, p):
    U = np.ascontiguousarray(U, dtype=float)
    N, _, m = U.shape
    J, K = normals.shape[0], qverts.shape[0]
    out = np.empty(N)
    for s, e in _chunks(N, J * max(K, m)):
        X = np.einsum("ja,ial->ijl", normals, U[s:e])
        h = np.maximum((X @ qverts.T).max(axis=2), 0.0)
        out[s:e] = _row_sum(_power(h, p), coef)
    return out


def ball_support_power_sum(U, normals, coef, center, radius, p):
    U = np.ascontiguousarray(U, dtype=float)
    N, _, m = U.shape
    J = normals.shape[0]
    out = np.empty(N)
    for s, e in _chunks(N, J * m):
        X = np.einsum("ja,ial->ijl", normals, U[s:e])
        h = X @ center + radius * np.sqrt(np.einsum("ijl,ijl->ij", X, X))
        out[s:e] = _row_sum(_power(np.maximum(h, 0.0), p), coef)
    return out

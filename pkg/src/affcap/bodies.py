"""Bodies K in R^n and Q in R^m.

Q bodies are convex, contain the origin and are described by their support
function.  K bodies are star bodies about the origin exposing radial and gauge
functions, a decomposition of the boundary into weighted elements, and their
volume.  All bodies are immutable after construction.
"""
from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog, nnls
from scipy.spatial import ConvexHull, QhullError

from .errors import GeometryError, InputError
from .quadrature import DEFAULT_INNER_LEVEL, ball_volume, sphere_rule

RIDGE_JITTER = 1e-9
_TIE_RTOL = 1e-12


def _as_points(x, dim, name="x"):
    """Return ``x`` as an (N, dim) array plus a flag telling whether it was a single vector."""
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.shape[-1] != dim:
        raise InputError(f"{name} has trailing dimension {arr.shape[-1]}, expected {dim}")
    return arr, single


def _unbatch(values, single):
    return float(values[0]) if single else values


# ---------------------------------------------------------------------------
# Q bodies
# ---------------------------------------------------------------------------


class QBody(ABC):
    """Convex body in R^m containing the origin, given by its support function."""

    m: int

    @abstractmethod
    def _support(self, X):
        """Support values for an (N, m) array."""

    def support(self, x):
        """``h_Q(x) = max{x.y : y in Q}`` for a vector or an (N, m) array."""
        X, single = _as_points(x, self.m)
        return _unbatch(self._support(X), single)

    @abstractmethod
    def negate(self) -> QBody:
        """The reflected body -Q."""

    @abstractmethod
    def scale(self, b) -> QBody:
        """The dilate b*Q for b > 0."""

    @abstractmethod
    def key(self) -> tuple:
        """Hashable description, used for caching."""


class PolytopeQ(QBody):
    """Convex hull of a finite vertex list.

    The origin may lie on the boundary, but the body must be full-dimensional.
    """

    def __init__(self, vertices):
        V = np.atleast_2d(np.asarray(vertices, dtype=float))
        if V.ndim != 2 or V.shape[0] < 2:
            raise InputError("a Q polytope needs at least two vertices given as rows")
        self.m = V.shape[1]
        if not np.all(np.isfinite(V)):
            raise InputError("Q vertices must be finite")
        if np.linalg.matrix_rank(V[1:] - V[0], tol=1e-12 * max(1.0, np.abs(V).max())) < self.m:
            raise GeometryError("Q must have nonempty interior")
        if not _contains_origin(V):
            raise GeometryError("Q must contain the origin")
        self.vertices = V
        self.vertices.flags.writeable = False

    def _support(self, X):
        return np.maximum((X @ self.vertices.T).max(axis=1), 0.0)

    def negate(self):
        return PolytopeQ(-self.vertices)

    def scale(self, b):
        if b <= 0:
            raise InputError("scale factor must be positive")
        return PolytopeQ(b * self.vertices)

    def key(self):
        return ("polytope", self.vertices.tobytes(), self.vertices.shape)

    def __repr__(self):
        return f"PolytopeQ(m={self.m}, vertices={self.vertices.tolist()})"


def _contains_origin(V):
    if V.shape[1] == 1:
        return V.min() <= 0.0 <= V.max()
    k, m = V.shape
    res = linprog(
        np.zeros(k),
        A_eq=np.vstack([V.T, np.ones((1, k))]),
        b_eq=np.concatenate([np.zeros(m), [1.0]]),
        bounds=[(0, None)] * k,
        method="highs",
    )
    return res.status == 0


class BallQ(QBody):
    """Euclidean ball ``center + radius * B_2^m`` with ``|center| <= radius``."""

    def __init__(self, center, radius):
        c = np.atleast_1d(np.asarray(center, dtype=float))
        if c.ndim != 1:
            raise InputError("ball center must be a vector")
        if not radius > 0:
            raise InputError("ball radius must be positive")
        if np.linalg.norm(c) > radius * (1 + 1e-12):
            raise GeometryError("Q ball must contain the origin")
        self.m = c.shape[0]
        self.center = c
        self.radius = float(radius)

    def _support(self, X):
        return np.maximum(X @ self.center + self.radius * np.linalg.norm(X, axis=1), 0.0)

    def negate(self):
        return BallQ(-self.center, self.radius)

    def scale(self, b):
        if b <= 0:
            raise InputError("scale factor must be positive")
        return BallQ(b * self.center, b * self.radius)

    def key(self):
        return ("ball", tuple(self.center), self.radius)

    def __repr__(self):
        return f"BallQ(center={self.center.tolist()}, radius={self.radius})"


class LpSumQ(QBody):
    """Body with support ``(lam*h1**p + (1-lam)*h2**p)**(1/p)``."""

    def __init__(self, q1, q2, lam, p):
        if q1.m != q2.m:
            raise InputError(f"L_p sum needs equal dimensions, got {q1.m} and {q2.m}")
        if not 0.0 <= lam <= 1.0:
            raise InputError("lambda must lie in [0, 1]")
        if p < 1:
            raise InputError("L_p sums need p >= 1")
        self.m = q1.m
        self.q1, self.q2, self.lam, self.p = q1, q2, float(lam), float(p)

    def _support(self, X):
        h1 = self.q1._support(X)
        h2 = self.q2._support(X)
        return (self.lam * h1**self.p + (1.0 - self.lam) * h2**self.p) ** (1.0 / self.p)

    def negate(self):
        return LpSumQ(self.q1.negate(), self.q2.negate(), self.lam, self.p)

    def scale(self, b):
        return LpSumQ(self.q1.scale(b), self.q2.scale(b), self.lam, self.p)

    def key(self):
        return ("lpsum", self.q1.key(), self.q2.key(), self.lam, self.p)

    def __repr__(self):
        return f"LpSumQ({self.q1!r}, {self.q2!r}, lam={self.lam}, p={self.p})"


def support_Q(Q, x):
    """Support function of Q at ``x`` (vector or batch of row vectors)."""
    return Q.support(x)


def segment(a, b):
    """The segment [a, b] in R^1 with a <= 0 <= b."""
    if not a <= 0.0 <= b:
        raise GeometryError(f"segment [{a}, {b}] must contain the origin")
    if not b > a:
        raise GeometryError("segment must have positive length")
    return PolytopeQ([[a], [b]])


def box(lower, upper):
    """Axis box with opposite corners ``lower`` and ``upper``."""
    lo = np.atleast_1d(np.asarray(lower, dtype=float))
    hi = np.atleast_1d(np.asarray(upper, dtype=float))
    if lo.shape != hi.shape:
        raise InputError("box corners must have equal length")
    corners = np.array(np.meshgrid(*np.stack([lo, hi], axis=1), indexing="ij")).reshape(len(lo), -1).T
    return PolytopeQ(corners)


def unit_square():
    """The square [0, 1]^2; the origin is a vertex."""
    return box([0.0, 0.0], [1.0, 1.0])


def simplex_q(vertices):
    vertices = np.asarray(vertices, dtype=float)
    if vertices.shape[0] != vertices.shape[1] + 1:
        raise InputError("a simplex in R^m needs exactly m+1 vertices")
    return PolytopeQ(vertices)


def lp_sum_Q(q1, q2, lam, p):
    """Body whose support is ``(lam*h_{Q1}**p + (1-lam)*h_{Q2}**p)**(1/p)``."""
    return LpSumQ(q1, q2, lam, p)


def tau_segment(tau, p):
    """Segment whose p-th support power is ``(1+tau)/2 t_+^p + (1-tau)/2 t_-^p``."""
    if not -1.0 <= tau <= 1.0:
        raise InputError("tau must lie in [-1, 1]")
    if p < 1:
        raise InputError("p must be >= 1")
    return PolytopeQ([[-(((1.0 - tau) / 2.0) ** (1.0 / p))], [((1.0 + tau) / 2.0) ** (1.0 / p)]])


# ---------------------------------------------------------------------------
# Linear maps and boundary elements
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LinearMap:
    """Invertible n x n matrix with cached inverse and |det|."""

    matrix: np.ndarray
    inverse: np.ndarray
    absdet: float

    @classmethod
    def from_matrix(cls, matrix):
        M = np.atleast_2d(np.asarray(matrix, dtype=float))
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise InputError("a linear map must be a square matrix")
        if not np.all(np.isfinite(M)):
            raise InputError("linear map entries must be finite")
        det = np.linalg.det(M)
        scale = max(np.abs(M).max(), 1e-300) ** M.shape[0]
        if abs(det) <= 1e-13 * scale:
            raise InputError("linear map is singular")
        return cls(M, np.linalg.inv(M), abs(det))

    @property
    def n(self):
        return self.matrix.shape[0]


def _as_map(phi):
    return phi if isinstance(phi, LinearMap) else LinearMap.from_matrix(phi)


@dataclass(frozen=True, eq=False)
class BoundaryElements:
    """Boundary of a star body split into weighted elements.

    Attributes
    ----------
    points : (J, n) array
        Representative boundary points z.
    normals : (J, n) array
        Unit outer normals.
    weights : (J,) array
        (n-1)-dimensional measure carried by each element.
    cosines : (J,) array
        Support values ``c = z . nu``; all positive.
    exact : bool
        True when the decomposition is exact (facet bodies).
    level : int or None
        Resolution of the spherical rule behind a quadrature decomposition.
    """

    points: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    cosines: np.ndarray
    exact: bool
    level: int | None = None

    def __len__(self):
        return len(self.weights)

    def volume(self):
        """Divergence-theorem volume ``sum(w * c) / n``."""
        return float(np.sum(self.weights * self.cosines) / self.normals.shape[1])

    def surface_weights(self, p):
        """``w * c**(1-p)``; for p = 1 the cosines are not touched."""
        if p == 1:
            return self.weights
        return self.weights * self.cosines ** (1.0 - p)


def _elements(points, normals, weights, cosines, exact, level=None):
    if np.any(cosines <= 0) or not np.all(np.isfinite(cosines)):
        raise GeometryError("boundary element with non-positive z.nu: the origin is not interior")
    for arr in (points, normals, weights, cosines):
        arr.flags.writeable = False
    return BoundaryElements(points, normals, weights, cosines, exact, level)


def default_inner_level(n):
    return DEFAULT_INNER_LEVEL.get(n, 3)


# ---------------------------------------------------------------------------
# Star bodies
# ---------------------------------------------------------------------------


class StarBody(ABC):
    """Star body about the origin in R^n."""

    n: int
    convex: bool = False
    exact_boundary: bool = False

    def radial(self, theta):
        """Radial function on unit vectors (single vector or (N, n) array)."""
        T, single = _as_points(theta, self.n, "theta")
        return _unbatch(1.0 / self._gauge(T), single)

    def gauge(self, y):
        """Gauge (Minkowski functional) ``p_K(y) = |y| / rho_K(y/|y|)``."""
        Y, single = _as_points(y, self.n, "y")
        return _unbatch(self._gauge(Y), single)

    @abstractmethod
    def _gauge(self, Y):
        """Gauge for an (N, n) array."""

    @abstractmethod
    def gauge_grad(self, theta, return_jitter=False):
        """Gradient of the gauge at each row of ``theta`` (0-homogeneous).

        With ``return_jitter=True`` also returns the number of nodes that sat
        on a ridge and were perturbed by ``RIDGE_JITTER`` first.
        """

    @abstractmethod
    def boundary_elements(self, level=None) -> BoundaryElements:
        """Decomposition of the boundary; ``level`` sets the sphere rule for curved bodies."""

    @abstractmethod
    def volume_exact(self) -> float:
        """Closed-form or facet-formula volume."""

    def support(self, x):
        raise InputError(f"{type(self).__name__} has no support function")

    def nearest_point(self, x):
        raise InputError(f"{type(self).__name__} has no nearest-point map")

    def linear_image(self, phi):
        return LinearImage(self, _as_map(phi))

    def dist(self, x):
        """Euclidean distance to the body (0 inside)."""
        X = np.atleast_2d(np.asarray(x, dtype=float))
        return np.linalg.norm(X - self.nearest_point(X), axis=1)

    def min_radial(self):
        """A lower bound on min rho_K (exact for facet bodies)."""
        rule = sphere_rule(self.n, default_inner_level(self.n))
        return float(self.radial(rule.nodes).min())


def _jitter(theta, rows):
    rng = np.random.default_rng(0)
    T = theta.copy()
    T[rows] += RIDGE_JITTER * rng.standard_normal((len(rows), theta.shape[1]))
    return T


class FacetBody(StarBody):
    """Star body bounded by flat facets (one boundary element per facet)."""

    exact_boundary = True
    normals: np.ndarray
    offsets: np.ndarray
    measures: np.ndarray
    centroids: np.ndarray

    def boundary_elements(self, level=None):
        return self._elements

    def _set_facets(self, normals, offsets, measures, centroids):
        self.normals, self.offsets, self.measures, self.centroids = normals, offsets, measures, centroids
        self._elements = _elements(centroids, normals, measures, offsets, exact=True)
        self._scaled_normals = normals / offsets[:, None]

    def volume_exact(self):
        return float(np.sum(self.measures * self.offsets) / self.n)

    def min_radial(self):
        return float(self.offsets.min()) if self.convex else super().min_radial()

    @abstractmethod
    def _locate(self, T):
        """Facet index hit by each ray and a tie flag per ray."""

    def _gauge(self, Y):
        norms = np.linalg.norm(Y, axis=1)
        idx, _ = self._locate(Y / np.where(norms > 0, norms, 1.0)[:, None])
        return np.einsum("ij,ij->i", Y, self._scaled_normals[idx])

    def gauge_grad(self, theta, return_jitter=False):
        T, _ = _as_points(theta, self.n, "theta")
        idx, tie = self._locate(T)
        rows = np.flatnonzero(tie)
        if len(rows):
            idx = idx.copy()
            idx[rows] = self._locate(_jitter(T, rows)[rows])[0]
        grad = self._scaled_normals[idx]
        return (grad, len(rows)) if return_jitter else grad


def _simplex_measure(P):
    E = P[1:] - P[0]
    gram = E @ E.T
    return math.sqrt(max(np.linalg.det(gram), 0.0)) / math.factorial(len(E))


class Polytope(FacetBody):
    """Convex polytope with the origin in its interior, built from a vertex list."""

    convex = True

    def __init__(self, vertices):
        P = np.atleast_2d(np.asarray(vertices, dtype=float))
        if P.ndim != 2 or P.shape[1] < 2:
            raise InputError("polytope vertices must be an (N, n) array with n >= 2")
        if not np.all(np.isfinite(P)):
            raise InputError("polytope vertices must be finite")
        self.n = P.shape[1]
        try:
            hull = ConvexHull(P)
        except QhullError as exc:
            raise GeometryError(f"vertices do not span a full-dimensional polytope: {exc}") from None
        self.vertices = P[hull.vertices]
        scale = np.abs(self.vertices).max()
        # qhull triangulates facets; merge simplices lying in a common hyperplane
        groups = []
        for simplex, eq in zip(hull.simplices, hull.equations):
            for rep, members in groups:
                if np.abs(rep[:-1] - eq[:-1]).max() < 1e-9 and abs(rep[-1] - eq[-1]) < 1e-9 * scale:
                    members.append((simplex, eq))
                    break
            else:
                groups.append((eq, [(simplex, eq)]))
        normals, offsets, measures, centroids = [], [], [], []
        for _, members in groups:
            eq = np.mean([e for _, e in members], axis=0)
            nu = eq[:-1] / np.linalg.norm(eq[:-1])
            meas = np.array([_simplex_measure(P[s]) for s, _ in members])
            cents = np.array([P[s].mean(axis=0) for s, _ in members])
            total = meas.sum()
            normals.append(nu)
            offsets.append(np.mean([P[s] @ nu for s, _ in members]))
            measures.append(total)
            centroids.append(meas @ cents / total)
        offsets = np.array(offsets)
        if offsets.min() <= 1e-12 * scale:
            raise GeometryError("the origin is not an interior point of the polytope")
        self._set_facets(np.array(normals), offsets, np.array(measures), np.array(centroids))
        self.vertices.flags.writeable = False

    def _locate(self, T):
        R = T @ self._scaled_normals.T
        idx = np.argmax(R, axis=1)
        if R.shape[1] > 1:
            top = np.partition(R, -2, axis=1)[:, -2:]
            tie = top[:, 1] - top[:, 0] <= _TIE_RTOL * np.abs(top[:, 1])
        else:
            tie = np.zeros(len(T), dtype=bool)
        return idx, tie

    def _gauge(self, Y):
        return (Y @ self._scaled_normals.T).max(axis=1)

    def support(self, x):
        X, single = _as_points(x, self.n)
        return _unbatch((X @ self.vertices.T).max(axis=1), single)

    def linear_image(self, phi):
        phi = _as_map(phi)
        return Polytope(self.vertices @ phi.matrix.T)

    def nearest_point(self, x):
        X = np.atleast_2d(np.asarray(x, dtype=float))
        out = X.copy()
        outside = np.flatnonzero(self._gauge(X) > 1.0)
        if self.n == 2:
            out[outside] = self._nearest_polygon(X[outside])
            return out
        # min |V^T lam - x| over the simplex, via a heavily weighted sum-to-one row
        big = 1e4 * max(1.0, np.abs(self.vertices).max())
        A = np.vstack([self.vertices.T, big * np.ones(len(self.vertices))])
        for i in outside:
            lam, _ = nnls(A, np.r_[X[i], big], maxiter=50 * A.shape[1])
            out[i] = lam @ self.vertices / lam.sum()
        return out

    def _nearest_polygon(self, X):
        V = self.vertices[np.argsort(np.arctan2(self.vertices[:, 1], self.vertices[:, 0]))]
        A, B = V, np.roll(V, -1, axis=0)
        D = B - A
        t = np.einsum("ike,ke->ik", X[:, None, :] - A[None], D) / np.einsum("ke,ke->k", D, D)
        proj = A[None] + np.clip(t, 0.0, 1.0)[..., None] * D[None]
        k = np.argmin(np.linalg.norm(proj - X[:, None, :], axis=2), axis=1)
        return proj[np.arange(len(X)), k]

    def __repr__(self):
        return f"Polytope(n={self.n}, vertices={len(self.vertices)}, facets={len(self.offsets)})"


class Ellipsoid(StarBody):
    """Ellipsoid ``A . B_2^n`` for an invertible matrix A."""

    convex = True

    def __init__(self, A):
        lm = LinearMap.from_matrix(A)
        self.n = lm.n
        self.A, self.Ainv, self.absdet = lm.matrix, lm.inverse, lm.absdet
        self._M = self.Ainv.T @ self.Ainv
        evals, R = np.linalg.eigh(self.A @ self.A.T)
        self._evals, self._R = evals, R

    @property
    def radius(self):
        """Radius if the ellipsoid is a centered ball, else None."""
        r = math.sqrt(self._evals.mean())
        return r if np.allclose(self._evals, r * r, rtol=1e-14, atol=0.0) else None

    def _gauge(self, Y):
        return np.linalg.norm(Y @ self.Ainv.T, axis=1)

    def gauge_grad(self, theta, return_jitter=False):
        T, _ = _as_points(theta, self.n, "theta")
        grad = (T @ self._M) / self._gauge(T)[:, None]
        return (grad, 0) if return_jitter else grad

    def support(self, x):
        X, single = _as_points(x, self.n)
        return _unbatch(np.linalg.norm(X @ self.A, axis=1), single)

    def volume_exact(self):
        return self.absdet * ball_volume(self.n)

    def boundary_elements(self, level=None):
        level = default_inner_level(self.n) if level is None else level
        rule = sphere_rule(self.n, level, "gauss")
        v = rule.nodes
        g = v @ self.Ainv  # rows are A^{-T} v
        gn = np.linalg.norm(g, axis=1)
        return _elements(v @ self.A.T, g / gn[:, None], self.absdet * gn * rule.weights, 1.0 / gn, False, level)

    def linear_image(self, phi):
        phi = _as_map(phi)
        return Ellipsoid(phi.matrix @ self.A)

    def nearest_point(self, x):
        X = np.atleast_2d(np.asarray(x, dtype=float))
        out = X.copy()
        outside = np.flatnonzero(self._gauge(X) > 1.0)
        if not len(outside):
            return out
        r = self.radius
        if r is not None:
            Y = X[outside]
            out[outside] = r * Y / np.linalg.norm(Y, axis=1, keepdims=True)
            return out
        lam = self._evals
        Xr = X[outside] @ self._R
        lo = np.zeros(len(outside))
        hi = np.sqrt((Xr**2 * lam).sum(axis=1))
        # y_i = x_i / (1 + mu/lam_i); mu solves sum y_i^2/lam_i = 1 (monotone in mu)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            Yr = Xr / (1.0 + mid[:, None] / lam)
            big = (Yr**2 / lam).sum(axis=1) > 1.0
            lo = np.where(big, mid, lo)
            hi = np.where(big, hi, mid)
        Yr = Xr / (1.0 + hi[:, None] / lam)
        out[outside] = Yr @ self._R.T
        return out

    def __repr__(self):
        return f"Ellipsoid(A={self.A.tolist()})"


def _pushforward(body, level):
    """Boundary elements from a Gauss rule pushed out along rays (z = rho(theta) theta)."""
    rule = sphere_rule(body.n, level, "gauss")
    theta, omega = rule.nodes, rule.weights
    rho = 1.0 / body._gauge(theta)
    g = body.gauge_grad(theta)
    gn = np.linalg.norm(g, axis=1)
    return _elements(theta * rho[:, None], g / gn[:, None], omega * rho**body.n * gn, 1.0 / gn, False, level)


class LqBall(StarBody):
    """Ball of radius r in the l_q norm, 1 < q < infinity."""

    convex = True

    def __init__(self, n, q, radius=1.0):
        if n < 2:
            raise InputError("dimension must be >= 2")
        if not 1.0 < q < math.inf:
            raise InputError("LqBall needs 1 < q < inf; use lq_ball() for q = 1 or inf")
        if not radius > 0:
            raise InputError("radius must be positive")
        self.n, self.q, self.r = int(n), float(q), float(radius)
        self.q_dual = self.q / (self.q - 1.0)

    def _gauge(self, Y):
        return np.linalg.norm(Y, ord=self.q, axis=1) / self.r

    def gauge_grad(self, theta, return_jitter=False):
        T, _ = _as_points(theta, self.n, "theta")
        nq = np.linalg.norm(T, ord=self.q, axis=1)
        grad = np.sign(T) * (np.abs(T) / nq[:, None]) ** (self.q - 1.0) / self.r
        return (grad, 0) if return_jitter else grad

    def support(self, x):
        X, single = _as_points(x, self.n)
        return _unbatch(self.r * np.linalg.norm(X, ord=self.q_dual, axis=1), single)

    def volume_exact(self):
        q, n = self.q, self.n
        return (2.0 * math.gamma(1.0 + 1.0 / q)) ** n / math.gamma(1.0 + n / q) * self.r**n

    def boundary_elements(self, level=None):
        return _pushforward(self, default_inner_level(self.n) if level is None else level)

    def __repr__(self):
        return f"LqBall(n={self.n}, q={self.q}, radius={self.r})"


class RadialTable(FacetBody):
    """Star body from radial samples on a spherical grid, linearly interpolated.

    The boundary is the polyhedral surface through the points ``r_i * d_i``;
    grid cells are arcs (n = 2) or spherical triangles (n = 3).  Each cell is
    one flat facet, so the boundary decomposition is exact for the
    represented body.

    Parameters
    ----------
    directions : (k, n) array
        Unit grid directions.
    radii : (k,) array
        Positive radial samples.
    cells : (F, n) int array
        Grid cells, each listing n direction indices in counter-clockwise
        (outward) order.
    """

    def __init__(self, directions, radii, cells):
        D = np.asarray(directions, dtype=float)
        r = np.asarray(radii, dtype=float)
        cells = np.asarray(cells, dtype=int)
        self.n = D.shape[1]
        if self.n not in (2, 3):
            raise InputError("radial tables are supported for n = 2 and n = 3")
        if r.shape != (len(D),) or np.any(~(r > 0)) or not np.all(np.isfinite(r)):
            raise InputError("radial samples must be finite, positive and match the grid")
        self.directions, self.radii, self.cells = D, r, cells
        P = D * r[:, None]
        V = P[cells]  # (F, n, n)
        if self.n == 2:
            edge = V[:, 1] - V[:, 0]
            normals = np.column_stack([edge[:, 1], -edge[:, 0]])
            measures = np.linalg.norm(edge, axis=1)
        else:
            cross = np.cross(V[:, 1] - V[:, 0], V[:, 2] - V[:, 0])
            measures = 0.5 * np.linalg.norm(cross, axis=1)
            normals = cross
        normals = normals / np.linalg.norm(normals, axis=1, keepdims=True)
        offsets = np.einsum("fi,fi->f", normals, V[:, 0])
        if np.any(offsets <= 0):
            raise GeometryError("radial table is not star-shaped with respect to the origin (z.nu <= 0)")
        self._cone_inv = np.linalg.inv(np.transpose(D[cells], (0, 2, 1)))
        self._set_facets(normals, offsets, measures, V.mean(axis=1))

    def _locate(self, T):
        idx = np.empty(len(T), dtype=int)
        best = np.empty(len(T))
        step = max(1, 2_000_000 // len(self.cells))
        for s in range(0, len(T), step):
            coords = np.einsum("fij,nj->nfi", self._cone_inv, T[s : s + step])
            worst = coords.min(axis=2)
            idx[s : s + step] = np.argmax(worst, axis=1)
            best[s : s + step] = worst.max(axis=1)
        if np.any(best < -1e-9):
            raise GeometryError("a ray misses every grid cell")
        return idx, best <= _TIE_RTOL

    @classmethod
    def circle_grid(cls, radii):
        """Uniform angular grid ``theta_k = 2 pi k / N`` in the plane."""
        r = np.asarray(radii, dtype=float)
        N = len(r)
        if N < 3:
            raise InputError("a planar radial table needs at least 3 samples")
        phi = 2 * np.pi * np.arange(N) / N
        cells = np.column_stack([np.arange(N), (np.arange(N) + 1) % N])
        return cls(np.column_stack([np.cos(phi), np.sin(phi)]), r, cells)

    @classmethod
    def icosphere_grid(cls, radii, subdivisions):
        """Geodesic icosahedral grid refined ``subdivisions`` times."""
        D, cells = icosphere(subdivisions)
        return cls(D, radii, cells)

    @classmethod
    def sample(cls, body, resolution):
        """Tabulate the radial function of another body.

        ``resolution`` is the number of angles for n = 2 and the number of
        icosahedral subdivisions for n = 3.
        """
        if body.n == 2:
            phi = 2 * np.pi * np.arange(resolution) / resolution
            return cls.circle_grid(body.radial(np.column_stack([np.cos(phi), np.sin(phi)])))
        if body.n == 3:
            D, _ = icosphere(resolution)
            return cls.icosphere_grid(body.radial(D), resolution)
        raise InputError("radial tables are supported for n = 2 and n = 3")

    def __repr__(self):
        return f"RadialTable(n={self.n}, samples={len(self.radii)})"


def icosphere(subdivisions):
    """Vertices (unit vectors) and outward-oriented triangles of a geodesic icosahedron."""
    t = (1.0 + math.sqrt(5.0)) / 2.0
    V = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0), (0, -1, t), (0, 1, t),
         (0, -1, -t), (0, 1, -t), (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    F = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11), (1, 5, 9), (5, 11, 4),
         (11, 10, 2), (10, 7, 6), (7, 1, 8), (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8),
         (3, 8, 9), (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    verts = [np.array(v, dtype=float) / np.linalg.norm(v) for v in V]
    faces = list(F)
    for _ in range(int(subdivisions)):
        cache = {}

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                mid = verts[i] + verts[j]
                verts.append(mid / np.linalg.norm(mid))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    return np.array(verts), np.array(faces, dtype=int)


class LinearImage(StarBody):
    """The image ``phi . K`` of a star body, evaluated through K without resampling."""

    def __init__(self, body, phi):
        phi = _as_map(phi)
        if phi.n != body.n:
            raise InputError(f"map is {phi.n}x{phi.n} but the body lives in R^{body.n}")
        self.base, self.phi, self.n = body, phi, body.n
        self.convex = body.convex
        self.exact_boundary = body.exact_boundary

    def _gauge(self, Y):
        return self.base._gauge(Y @ self.phi.inverse.T)

    def gauge_grad(self, theta, return_jitter=False):
        T, _ = _as_points(theta, self.n, "theta")
        pre = T @ self.phi.inverse.T
        pre /= np.linalg.norm(pre, axis=1, keepdims=True)
        g, jittered = self.base.gauge_grad(pre, return_jitter=True)
        grad = g @ self.phi.inverse
        return (grad, jittered) if return_jitter else grad

    def support(self, x):
        X, single = _as_points(x, self.n)
        return _unbatch(self.base.support(X @ self.phi.matrix), single)

    def volume_exact(self):
        return self.phi.absdet * self.base.volume_exact()

    def boundary_elements(self, level=None):
        be = self.base.boundary_elements(level)
        F, Finv_T = self.phi.matrix, self.phi.inverse.T
        m = be.normals @ Finv_T.T  # rows are phi^{-T} nu
        mn = np.linalg.norm(m, axis=1)
        return _elements(
            be.points @ F.T, m / mn[:, None], self.phi.absdet * mn * be.weights, be.cosines / mn, be.exact, be.level
        )

    def linear_image(self, phi):
        phi = _as_map(phi)
        return LinearImage(self.base, phi.matrix @ self.phi.matrix)

    def __repr__(self):
        return f"LinearImage({self.base!r}, phi={self.phi.matrix.tolist()})"


def linear_image(K, phi):
    """Image of K under an invertible linear map (matrix or :class:`LinearMap`)."""
    return K.linear_image(phi)


def volume(K, rule=None):
    """Volume of K.

    Without a rule the exact (closed-form or facet) value is returned.  With
    a rule the radial integral ``(1/n) * int rho**n`` is evaluated instead.
    """
    from .quadrature import Estimate, integrate_sphere

    if rule is None:
        return Estimate(K.volume_exact(), 0.0, method="exact")
    if rule.dim != K.n:
        raise InputError(f"rule lives on S^{rule.dim - 1}, body in R^{K.n}")
    est = integrate_sphere(lambda T: K.radial(T) ** K.n, rule)
    return est.scale(1.0 / K.n)


# ---------------------------------------------------------------------------
# Named constructors
# ---------------------------------------------------------------------------


def ball(n, radius=1.0):
    return Ellipsoid(radius * np.eye(int(n)))


def ellipsoid(A=None, axes=None):
    """Ellipsoid from a matrix ``A`` or from semi-axis lengths ``axes``."""
    if (A is None) == (axes is None):
        raise InputError("give exactly one of A or axes")
    return Ellipsoid(np.diag(np.asarray(axes, dtype=float)) if axes is not None else A)


def cube(n, half_width=1.0):
    n = int(n)
    corners = np.array(np.meshgrid(*[[-half_width, half_width]] * n, indexing="ij")).reshape(n, -1).T
    return Polytope(corners)


def cross_polytope(n, radius=1.0):
    E = radius * np.eye(int(n))
    return Polytope(np.vstack([E, -E]))


def lq_ball(n, q, radius=1.0):
    """l_q ball; q = 1 and q = inf give the cross-polytope and the cube."""
    if q == 1:
        return cross_polytope(n, radius)
    if q == math.inf:
        return cube(n, radius)
    return LqBall(n, q, radius)


def simplex(vertices):
    return Polytope(vertices)

"""Integration over unit spheres with error estimates.

Deterministic product-Gauss rules cover S^1, S^2 and S^3.  Higher-dimensional
spheres use normalized Gaussian samples, either scrambled Sobol points
(``"qmc"``, three independent replicates) or plain pseudo-random points
(``"mc"``, ten batches).  Errors are the difference between the rule and its
next-coarser level for Gauss rules and the standard error of the replicate
means for stochastic rules.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi
from scipy.stats import norm, qmc

from .errors import InputError, IntegrandError, PositivityError

POSITIVITY_FLOOR = 1e-12
QMC_REPLICATES = 3
MC_BATCHES = 10
KINDS = ("gauss", "qmc", "mc")

# Default levels per sphere dimension d (the ambient dimension of S^{d-1}).
DEFAULT_GAUSS_LEVEL = {2: 7, 3: 5, 4: 4}
# Boundary rules sit inside the outer loop, so they default to coarser levels.
DEFAULT_INNER_LEVEL = {2: 7, 3: 4, 4: 3}
DEFAULT_QMC_LEVEL = 3
# Largest rule built on request; beyond this memory, not accuracy, is the limit.
MAX_NODES = 2**23


def sphere_measure(d):
    """Surface measure of S^{d-1} in R^d."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def ball_volume(n):
    """Volume omega_n of the Euclidean unit ball in R^n."""
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


@dataclass(frozen=True, eq=False)
class Estimate:
    """A numerical value with an error bar and provenance.

    ``value`` and ``err`` are floats, or arrays of equal shape for batched
    evaluations.  ``err`` is a standard error for stochastic rules and a
    two-level difference for deterministic ones; it is zero on exact paths.
    """

    value: float | np.ndarray
    err: float | np.ndarray = 0.0
    nodes: int = 0
    seed: int | None = None
    method: str = "exact"
    meta: dict = field(default_factory=dict)

    def __float__(self):
        return float(self.value)

    @property
    def rel_err(self):
        return np.abs(self.err) / np.abs(self.value)

    def replace(self, **changes):
        data = dict(
            value=self.value, err=self.err, nodes=self.nodes, seed=self.seed,
            method=self.method, meta=dict(self.meta),
        )
        data.update(changes)
        return Estimate(**data)

    def scale(self, c):
        return self.replace(value=c * self.value, err=abs(c) * self.err)

    def power(self, a):
        """``value**a`` with first-order error propagation."""
        v = self.value**a
        return self.replace(value=v, err=np.abs(a * v / self.value) * self.err)

    def times(self, other):
        """Product of two independent estimates, relative errors in quadrature."""
        v = self.value * other.value
        rel = np.hypot(self.err / np.abs(self.value), other.err / np.abs(other.value))
        return self.replace(
            value=v,
            err=np.abs(v) * rel,
            nodes=self.nodes + other.nodes,
            method=_join(self.method, other.method),
        )

    def to_dict(self):
        return {
            "value": _plain(self.value),
            "err": _plain(self.err),
            "nodes": int(self.nodes),
            "seed": self.seed,
            "method": self.method,
        }


def _join(a, b):
    if a == b or not b:
        return a
    if not a:
        return b
    return f"{a}+{b}"


def _plain(x):
    return x.tolist() if isinstance(x, np.ndarray) else float(x)


@dataclass(frozen=True, eq=False)
class SphereRule:
    """Nodes and positive weights on S^{d-1}.

    For stochastic kinds the nodes are split into ``groups`` (index ranges),
    each of which is an independent estimator of the full integral.  The
    weights of the whole rule sum to the sphere measure.
    """

    dim: int
    kind: str
    level: int
    nodes: np.ndarray
    weights: np.ndarray
    seed: int | None = None
    groups: tuple = ()

    @property
    def size(self):
        return len(self.weights)

    def coarse(self):
        """The next-coarser Gauss rule, used for the two-level error estimate."""
        if self.kind != "gauss":
            raise InputError("only Gauss rules have a coarse companion")
        if self.level < 1:
            raise InputError("Gauss rules need level >= 1 to estimate their error")
        return sphere_rule(self.dim, self.level - 1, kind="gauss")

    def descriptor(self):
        out = {"kind": self.kind, "level": int(self.level)}
        if self.kind != "gauss":
            out["seed"] = int(self.seed)
        return out


def _gauss_product(d, level):
    if d == 2:
        N = 2 ** (level + 2)
        phi = 2.0 * np.pi * np.arange(N) / N
        return np.column_stack([np.cos(phi), np.sin(phi)]), np.full(N, 2.0 * np.pi / N)
    sub_nodes, sub_w = _gauss_product(d - 1, level)
    a = (d - 3) / 2.0
    t, wt = roots_jacobi(2 ** (level + 1), a, a)
    s = np.sqrt(1.0 - t * t)
    nodes = np.concatenate(
        [np.column_stack([np.full(len(sub_w), ti), si * sub_nodes]) for ti, si in zip(t, s)]
    )
    weights = np.outer(wt, sub_w).ravel()
    return nodes, weights


def _qmc_per_replicate(level):
    return 2 ** max(4, round(math.log2(4**level * 1000 / QMC_REPLICATES)))


def rule_size(d, level, kind):
    """Number of nodes a rule would have, without building it."""
    if kind == "gauss":
        return 2 ** (level + 2) * (2 ** (level + 1)) ** (d - 2)
    if kind == "qmc":
        return QMC_REPLICATES * _qmc_per_replicate(level)
    return 4**level * 1000 // MC_BATCHES * MC_BATCHES


def _stochastic(d, level, kind, seed):
    children = np.random.SeedSequence(seed).spawn(QMC_REPLICATES if kind == "qmc" else MC_BATCHES)
    parts = []
    if kind == "qmc":
        n_rep = _qmc_per_replicate(level)
        for child in children:
            engine = qmc.Sobol(d, scramble=True, seed=np.random.default_rng(child))
            pts = engine.random_base2(int(math.log2(n_rep)))
            parts.append(norm.ppf(np.clip(pts, 2.0**-53, 1.0 - 2.0**-53)))
    else:
        n_rep = 4**level * 1000 // MC_BATCHES
        for child in children:
            parts.append(np.random.default_rng(child).standard_normal((n_rep, d)))
    X = np.concatenate(parts)
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    groups = tuple((i * n_rep, (i + 1) * n_rep) for i in range(len(parts)))
    return X, np.full(len(X), sphere_measure(d) / len(X)), groups


@lru_cache(maxsize=64)
def _cached_rule(d, level, kind, seed):
    if kind == "gauss":
        nodes, weights = _gauss_product(d, level)
        groups = ()
    else:
        nodes, weights, groups = _stochastic(d, level, kind, seed)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return SphereRule(d, kind, level, nodes, weights, seed, groups)


def sphere_rule(d, level, kind="auto", seed=0):
    """Build a quadrature rule on S^{d-1}.

    Parameters
    ----------
    d : int
        Ambient dimension, at least 2.
    level : int
        Resolution.  Gauss rules use ``2**(level+2)`` points on each circle
        factor and ``2**(level+1)`` Gauss-Jacobi points per extra dimension;
        stochastic rules use about ``4**level * 1000`` points.
    kind : {"auto", "gauss", "qmc", "mc"}
        ``"auto"`` picks Gauss for d <= 4 and QMC otherwise.
    seed : int
        Seed for the stochastic kinds (ignored by Gauss rules).
    """
    d, level = int(d), int(level)
    if d < 2:
        raise InputError(f"sphere dimension must be >= 2, got {d}")
    if level < 0:
        raise InputError(f"level must be >= 0, got {level}")
    if kind == "auto":
        kind = "gauss" if d <= 4 else "qmc"
    if kind not in KINDS:
        raise InputError(f"unknown rule kind {kind!r}; expected one of {KINDS}")
    if kind == "gauss":
        if d > 4:
            raise InputError("product-Gauss rules are only provided for d <= 4")
        seed = None
    else:
        seed = int(seed) if seed is not None else 0
        if not 0 <= seed < 2**64:
            raise InputError("seed must be an unsigned 64-bit integer")
    if rule_size(d, level, kind) > MAX_NODES:
        raise InputError(f"{kind} rule of level {level} on S^{d - 1} exceeds {MAX_NODES} nodes")
    return _cached_rule(d, level, kind, seed)


def default_rule(d, seed=0):
    """Rule used when the caller does not supply one."""
    if d in DEFAULT_GAUSS_LEVEL:
        return sphere_rule(d, DEFAULT_GAUSS_LEVEL[d], "gauss")
    return sphere_rule(d, DEFAULT_QMC_LEVEL, "qmc", seed)


def rule_from_descriptor(desc, d):
    """Build a rule from a config descriptor such as ``{"kind": "gauss", "level": 4}``."""
    if desc is None:
        return default_rule(d)
    if not isinstance(desc, dict) or "level" not in desc:
        raise InputError(f"rule descriptor needs 'kind' and 'level': {desc!r}")
    kind, level = desc.get("kind", "auto"), desc["level"]
    if kind == "gauss" and d > 4:
        # Gauss levels do not carry over; use the finest QMC level that fits
        kind = "qmc"
        if isinstance(level, int) and level >= 0:
            level = min(level, max(lv for lv in range(12) if rule_size(d, lv, "qmc") <= MAX_NODES))
    return sphere_rule(d, level, kind, desc.get("seed", 0))


def weighted_sum(weights, values):
    """Pairwise (numpy) summation of ``weights * values`` over the last axis."""
    return np.sum(np.asarray(values) * weights, axis=-1)


def rule_estimate(rule, evaluate):
    """Apply a rule to an integral evaluator and attach an error estimate.

    Parameters
    ----------
    rule : SphereRule
    evaluate : callable
        ``evaluate(nodes, weights)`` returns the weighted integral (a float or
        an array of floats) for the given node set.

    Returns
    -------
    Estimate
    """
    if rule.kind == "gauss":
        fine = np.asarray(evaluate(rule.nodes, rule.weights), dtype=float)
        coarse_rule = rule.coarse()
        coarse = np.asarray(evaluate(coarse_rule.nodes, coarse_rule.weights), dtype=float)
        value, err, nodes = fine, np.abs(fine - coarse), rule.size + coarse_rule.size
    else:
        R = len(rule.groups)
        parts = np.array(
            [evaluate(rule.nodes[a:b], rule.weights[a:b] * R) for a, b in rule.groups], dtype=float
        )
        value = parts.mean(axis=0)
        err = parts.std(axis=0, ddof=1) / math.sqrt(R)
        nodes = rule.size
    if value.ndim == 0:
        value, err = float(value), float(err)
    return Estimate(value, err, nodes=nodes, seed=rule.seed, method=f"{rule.kind}-L{rule.level}")


def _check_finite(values, nodes):
    values = np.asarray(values, dtype=float)
    bad = ~np.isfinite(values)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise IntegrandError(f"integrand is not finite at node {nodes[i].tolist()}", node=nodes[i])
    return values


def check_positive(values, nodes, floor=POSITIVITY_FLOOR):
    """Raise :class:`PositivityError` if any value is at or below ``floor``."""
    values = np.asarray(values, dtype=float)
    bad = ~(values > floor)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise PositivityError(
            f"support value {values[i]!r} <= {floor} at direction {np.asarray(nodes[i]).tolist()}",
            node=nodes[i],
            value=values[i],
        )
    return values


def integrate_sphere(f, rule):
    """Integrate a vectorized function ``f: (N, d) -> (N,)`` over S^{d-1}."""
    return rule_estimate(rule, lambda X, w: weighted_sum(w, _check_finite(f(X), X)))


def neg_power_moment(h, d, rule):
    """``(1/d) * integral of h**(-d)``: the volume of the polar of the body with support ``h``.

    ``h`` is a vectorized positive function on S^{d-1}.
    """
    if rule.dim != d:
        raise InputError(f"rule lives on S^{rule.dim - 1}, expected S^{d - 1}")

    def evaluate(X, w):
        return weighted_sum(w, check_positive(h(X), X) ** (-float(d))) / d

    return rule_estimate(rule, evaluate)

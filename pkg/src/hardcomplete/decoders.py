"""Recover independent sets and colorings from bounded factorizations of graph completions."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .graphs import Coloring, Graph
from .matrix import Factorization, PartialMatrix, revealed_errors


class DecodingError(RuntimeError):
    pass


@dataclass(frozen=True)
class ConeRoundingParams:
    c: float
    r: int
    delta: float | None = None
    seed: int | None = 0

    def __post_init__(self):
        if self.delta is None:
            object.__setattr__(self, "delta", 1.0 / (2 * self.c * self.r))
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if not 0 < self.cos_phi < 1:
            raise ValueError(f"cone angle undefined: cos(phi) = {self.cos_phi:.4f} not in (0, 1)")

    @property
    def cos_phi(self) -> float:
        return self.delta * math.sqrt(self.c * self.r) / (1 - self.delta) ** 2

    @property
    def phi(self) -> float:
        return math.acos(self.cos_phi)

    @property
    def threshold(self) -> float:
        """Both normalized vectors must have dot product above this with the direction."""
        return math.cos(self.phi / 2)


@dataclass(frozen=True)
class IndependentSet:
    vertices: np.ndarray
    direction: np.ndarray | None = None
    seed: int | None = None

    def __len__(self):
        return len(self.vertices)

    def violated_edge(self, g: Graph):
        return g.has_edge_inside(self.vertices) if len(self.vertices) else None

    def is_independent(self, g: Graph) -> bool:
        return self.violated_edge(g) is None


@dataclass(frozen=True)
class NetColoringParams:
    c: float
    r: int
    eps: float
    delta_net: float | None = None
    slack: float = 1e-6

    def __post_init__(self):
        if not 0 <= self.eps < 0.5:
            raise ValueError("entrywise error eps must lie in [0, 1/2)")
        limit = (1 - 2 * self.eps) * (self.c * self.r) ** -0.25 / 2
        if self.delta_net is None:
            object.__setattr__(self, "delta_net", limit * (1 - 1e-6))
        if not 0 < self.delta_net < limit:
            raise ValueError(f"delta_net must lie in (0, {limit})")

    @property
    def half_side(self) -> float:
        return (self.c * self.r) ** 0.25


@dataclass
class TrialSummary:
    sets: list = field(default_factory=list)

    @property
    def sizes(self) -> np.ndarray:
        return np.array([len(t) for t in self.sets])

    @property
    def best(self) -> IndependentSet:
        return max(self.sets, key=len)

    @property
    def mean_size(self) -> float:
        return float(self.sizes.mean()) if self.sets else 0.0


def filter_accurate_submatrix(pm: PartialMatrix, m, delta: float) -> np.ndarray:
    """Indices whose revealed row and column entries all lie within ``delta`` of ``pm``."""
    m = np.asarray(m, dtype=float)
    err = np.abs(revealed_errors(pm, m))
    nc = pm.n_canonical
    off = pm.rows != pm.cols
    bad_fwd = err[:nc] > delta
    bad_bwd = err[nc:] > delta
    bad = np.zeros(pm.n, dtype=bool)
    bad[pm.rows[bad_fwd]] = True
    bad[pm.cols[bad_fwd]] = True
    bad[pm.rows[off][bad_bwd]] = True
    bad[pm.cols[off][bad_bwd]] = True
    return np.flatnonzero(~bad)


def independent_set_bound(n: int, c: float, r: int, eps: float = 0.0) -> dict:
    """Expected-size lower bounds for cone rounding, as displayed and as derived in the proof."""
    delta = 1.0 / (2 * c * r)
    base = r * math.sqrt(math.pi) * (8 * math.sqrt(c * r)) ** r
    return {
        "stated": (1 - 4 * (c * r) ** 2 * eps) * n / base,
        "proof": (1 - eps / delta**2) * n / (2 * base),
        "per_vertex_probability": 1.0 / base,
    }


def decode_independent_set(fact: Factorization, params: ConeRoundingParams, survivors=None, rng=None) -> IndependentSet:
    """One round of random-cone rounding.

    Keeps every survivor whose normalized ``u`` and ``v`` both lie within
    angle ``phi/2`` of a uniformly random direction.  Pairs inside the
    result are checked to satisfy ``u_i . v_j > delta``.
    """
    n = fact.u.shape[0]
    idx = np.arange(n) if survivors is None else np.asarray(survivors, dtype=np.int64)
    if len(idx) and (idx.min() < 0 or idx.max() >= n):
        raise IndexError("survivor index out of range")
    if rng is None:
        rng = np.random.default_rng(params.seed)
    x = rng.standard_normal(fact.r)
    x /= np.linalg.norm(x)
    u = np.asarray(fact.u)
    v = np.asarray(fact.v)
    nu = np.linalg.norm(u, axis=1)
    nv = np.linalg.norm(v, axis=1)
    valid = np.zeros(n, dtype=bool)
    valid[idx] = True
    degenerate = valid & ((nu < 1e-12) | (nv < 1e-12))
    if degenerate.any():
        warnings.warn(f"skipping {int(degenerate.sum())} degenerate factor vectors", RuntimeWarning, stacklevel=2)
        valid &= ~degenerate
    with np.errstate(divide="ignore", invalid="ignore"):
        cu = (u @ x) / nu
        cv = (v @ x) / nv
    t = params.threshold
    chosen = np.flatnonzero(valid & (cu > t) & (cv > t))
    if len(chosen) > 1:
        prod = fact.u[chosen] @ fact.v[chosen].T
        if prod.min() <= params.delta:
            raise DecodingError(
                f"cone rounding produced a pair with u.v = {prod.min():.4g} <= delta = {params.delta:.4g}; "
                "factor rows violate the norm bounds"
            )
    return IndependentSet(chosen, x, params.seed)


def independent_set_trials(
    fact: Factorization, params: ConeRoundingParams, survivors=None, trials: int = 1
) -> TrialSummary:
    """Independent rounding trials, each seeded from a child of ``params.seed``."""
    children = np.random.SeedSequence(params.seed).spawn(trials)
    out = TrialSummary()
    for t, child in enumerate(children):
        rng = np.random.default_rng(child)
        s = decode_independent_set(fact, params, survivors, rng=rng)
        out.sets.append(IndependentSet(s.vertices, s.direction, t))
    return out


def coloring_color_bound(c: float, r: int, eps: float) -> float:
    return (4 * math.sqrt(c * r) / (1 - 2 * eps)) ** (2 * r)


def decode_coloring(fact: Factorization, params: NetColoringParams) -> Coloring:
    """Color vertex ``i`` by the pair of grid cells containing ``u_i`` and ``v_i``.

    The grid has cell side ``2 delta_net / sqrt(r)`` so each cell has
    diameter ``2 delta_net``; colors are numbered in order of first appearance.
    """
    r = fact.r
    half = params.half_side
    u = np.asarray(fact.u)
    v = np.asarray(fact.v)
    limit = half * (1 + params.slack)
    for name, x in (("u", u), ("v", v)):
        if x.size and np.abs(x).max() > limit:
            i = int(np.argmax(np.abs(x).max(axis=1)))
            raise DecodingError(
                f"vector {name}_{i} leaves the hypercube of half-side {half:.6g} "
                f"(max coordinate {np.abs(x[i]).max():.6g})"
            )
    side = 2 * params.delta_net / math.sqrt(r)
    cu = np.floor((u + half) / side).astype(np.int64)
    cv = np.floor((v + half) / side).astype(np.int64)
    keys = np.hstack([cu, cv])
    _, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.reshape(-1)
    order = np.argsort(first)
    relabel = np.empty_like(order)
    relabel[order] = np.arange(len(order))
    return Coloring(len(order), relabel[inverse])

"""Graph to partial-matrix reduction and the completions induced by colorings."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matrix import PartialMatrix


class ImproperColoringError(ValueError):
    def __init__(self, edge):
        self.edge = edge
        super().__init__(f"edge ({edge[0]}, {edge[1]}) joins two vertices of the same color")


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices ``0..n-1``; ``edges`` is an ``m x 2`` array with ``i < j``."""

    n: int
    edges: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if len(e):
            if np.any(e[:, 0] == e[:, 1]):
                raise ValueError("self-loops are not allowed")
            if e.min() < 0 or e.max() >= self.n:
                raise IndexError("edge endpoint out of range")
        e = np.sort(e, axis=1)
        e = np.unique(e, axis=0) if len(e) else e
        e.setflags(write=False)
        object.__setattr__(self, "edges", e)

    @property
    def m(self) -> int:
        return len(self.edges)

    def adjacency(self) -> list[list[int]]:
        adj = [[] for _ in range(self.n)]
        for i, j in self.edges.tolist():
            adj[i].append(j)
            adj[j].append(i)
        return adj

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=bool)
        a[self.edges[:, 0], self.edges[:, 1]] = True
        a[self.edges[:, 1], self.edges[:, 0]] = True
        return a

    def has_edge_inside(self, vertices) -> tuple[int, int] | None:
        """First edge with both endpoints in ``vertices``, else ``None``."""
        inside = np.zeros(self.n, dtype=bool)
        inside[np.asarray(list(vertices), dtype=np.int64)] = True
        bad = np.flatnonzero(inside[self.edges[:, 0]] & inside[self.edges[:, 1]])
        if len(bad):
            i, j = self.edges[bad[0]]
            return int(i), int(j)
        return None


@dataclass(frozen=True)
class Coloring:
    """Color of each vertex, in ``0..k-1``."""

    k: int
    colors: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.colors, dtype=np.int64).reshape(-1)
        if len(c) and (c.min() < 0 or c.max() >= self.k):
            raise ValueError(f"colors must lie in 0..{self.k - 1}")
        c.setflags(write=False)
        object.__setattr__(self, "colors", c)

    def classes(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.colors == t) for t in range(self.k)]

    def class_sizes(self) -> np.ndarray:
        return np.bincount(self.colors, minlength=self.k)

    def violated_edge(self, g: Graph) -> tuple[int, int] | None:
        if len(self.colors) != g.n:
            raise ValueError(f"coloring covers {len(self.colors)} vertices, graph has {g.n}")
        same = self.colors[g.edges[:, 0]] == self.colors[g.edges[:, 1]]
        bad = np.flatnonzero(same)
        if len(bad):
            i, j = g.edges[bad[0]]
            return int(i), int(j)
        return None

    def is_proper(self, g: Graph) -> bool:
        return self.violated_edge(g) is None

    def verify(self, g: Graph) -> None:
        edge = self.violated_edge(g)
        if edge is not None:
            raise ImproperColoringError(edge)


def graph_to_partial(g: Graph) -> PartialMatrix:
    """Unit diagonal, zero on edges, everything else unrevealed; ``c = 1``."""
    diag = np.arange(g.n)
    rows = np.concatenate([diag, g.edges[:, 0]])
    cols = np.concatenate([diag, g.edges[:, 1]])
    vals = np.concatenate([np.ones(g.n), np.zeros(g.m)])
    return PartialMatrix(g.n, 1.0, rows, cols, vals)


def completion_from_coloring(g: Graph, f: Coloring, require_all_classes: bool = False) -> np.ndarray:
    """Sum of indicator outer products of the color classes.

    With ``require_all_classes`` an empty color class is an error (the
    coherence formula for unbalanced colorings divides by the smallest class).
    """
    f.verify(g)
    if require_all_classes and np.any(f.class_sizes() == 0):
        raise ValueError("every color class must be nonempty")
    return (f.colors[:, None] == f.colors[None, :]).astype(float)


def indicator_factorization(f: Coloring):
    """Factor vectors ``u_i = v_i = e_{f(i)}`` of the coloring completion."""
    from .matrix import Factorization

    e = np.eye(f.k)[f.colors]
    return Factorization(e, e.copy())


def balance_by_copies(g: Graph, f: Coloring) -> tuple[Graph, Coloring]:
    """``k`` disjoint copies of ``g``; copy ``t`` has its colors shifted by ``t`` mod ``k``.

    Every color class of the result has exactly ``n`` vertices.
    """
    f.verify(g)
    k = f.k
    edges = np.concatenate([g.edges + t * g.n for t in range(k)]) if g.m else np.zeros((0, 2), np.int64)
    colors = np.concatenate([(f.colors + t) % k for t in range(k)])
    return Graph(k * g.n, edges), Coloring(k, colors)


def pad_partial(pm: PartialMatrix, factor: int = 10) -> PartialMatrix:
    """Embed ``pm`` as the top-left block of a ``factor*n`` matrix whose other entries are revealed zeros."""
    if factor < 1:
        raise ValueError("factor must be >= 1")
    n, big = pm.n, factor * pm.n
    if factor == 1:
        return pm
    i, j = np.triu_indices(big)
    outside = j >= n
    rows = np.concatenate([pm.rows, i[outside]])
    cols = np.concatenate([pm.cols, j[outside]])
    vals = np.concatenate([pm.vals, np.zeros(int(outside.sum()))])
    return PartialMatrix(big, pm.c, rows, cols, vals)


def pad_completion(m: np.ndarray, factor: int = 10) -> np.ndarray:
    """``diag(m, 0)``: the completion of the padded matrix induced by a completion of the block."""
    n = m.shape[0]
    out = np.zeros((factor * n, factor * n))
    out[:n, :n] = m
    return out


def planted_graph(n: int, k: int, p: float, seed=None, balanced: bool = True) -> tuple[Graph, Coloring]:
    """Random graph with a hidden proper ``k``-coloring; cross-class pairs become edges with probability ``p``."""
    rng = np.random.default_rng(seed)
    if balanced:
        colors = np.arange(n) % k
        rng.shuffle(colors)
    else:
        colors = rng.integers(0, k, size=n)
    i, j = np.triu_indices(n, 1)
    keep = (colors[i] != colors[j]) & (rng.random(len(i)) < p)
    return Graph(n, np.column_stack([i[keep], j[keep]])), Coloring(k, colors)

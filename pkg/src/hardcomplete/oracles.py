"""Exact brute-force oracles for small Coloring, Partition and Exact-one-in-k-SAT instances.

The search loops live in a compiled extension when it is available.  Set
``HARDCOMPLETE_PURE_PYTHON=1`` to force the pure-Python kernels, which
return identical results.
"""

from __future__ import annotations

import math
import os

import numpy as np

from . import _kernels_py
from .gadgets import Assignment, OneInKSatInstance, PartitionInstance, PartitionSplit
from .graphs import Coloring, Graph


class OracleSizeError(ValueError):
    pass


def _select_backend():
    if os.environ.get("HARDCOMPLETE_PURE_PYTHON", "") not in ("", "0"):
        return _kernels_py, "python"
    try:
        from . import _kernels
    except ImportError:
        return _kernels_py, "python"
    return _kernels, "cython"


_backend, BACKEND = _select_backend()

MAX_COLORING_BITS = 25
MAX_PARTITION_ITEMS = 24
MAX_SAT_VARS = 24


def _kernels(backend: str | None):
    if backend is None:
        return _backend
    if backend == "python":
        return _kernels_py
    if backend == "cython":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {backend!r}")


def brute_coloring(g: Graph, k: int, max_bits: float = MAX_COLORING_BITS, backend: str | None = None) -> Coloring | None:
    """The lexicographically first proper ``k``-coloring of ``g``, or None."""
    if k < 1:
        raise ValueError("k must be >= 1")
    bits = g.n * math.log2(k) if k > 1 else 0.0
    if bits > max_bits:
        raise OracleSizeError(f"search space 2^{bits:.1f} exceeds the 2^{max_bits} guard")
    adj = g.adjacency()
    indptr = np.zeros(g.n + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(a) for a in adj])
    indices = np.array([u for a in adj for u in a], dtype=np.int64)
    kern = _kernels(backend)
    if kern is _kernels_py:
        indptr, indices = indptr.tolist(), indices.tolist()
    colors = kern.coloring_search(g.n, indptr, indices, k)
    return None if colors is None else Coloring(k, np.array(colors, dtype=np.int64))


def integer_weights(inst: PartitionInstance) -> list[int]:
    """Weights scaled by the lcm of their denominators; splits are unchanged."""
    lcm = math.lcm(*(w.denominator for w in inst.weights))
    return [int(w * lcm) for w in inst.weights]


def brute_partition(inst: PartitionInstance, backend: str | None = None) -> PartitionSplit | None:
    """A split with exactly equal sums, or None.  Item 0 is always on the returned side."""
    if inst.n > MAX_PARTITION_ITEMS:
        raise OracleSizeError(f"{inst.n} items exceeds the guard of {MAX_PARTITION_ITEMS}")
    w = integer_weights(inst)
    if 2 * sum(w) >= 2**62:
        backend = "python"  # exact big integers
    if sum(w) % 2:
        return None
    mask = _kernels(backend).partition_search(w)
    if mask < 0:
        return None
    split = PartitionSplit(frozenset(i for i in range(inst.n) if (mask >> i) & 1))
    assert split.is_balanced(inst)
    return split


def brute_one_in_k(inst: OneInKSatInstance, backend: str | None = None) -> Assignment | None:
    """A satisfying +-1 assignment, or None.

    Among all solutions the one whose set of ``-1`` variables has the smallest
    bitmask (bit ``v`` for variable ``v``) is returned.
    """
    if inst.n_vars > MAX_SAT_VARS:
        raise OracleSizeError(f"{inst.n_vars} variables exceeds the guard of {MAX_SAT_VARS}")
    k = inst.k
    cv = np.array([[v for v, _ in c] for c in inst.clauses], dtype=np.int64).reshape(-1, k)
    cs = np.array([[s for _, s in c] for c in inst.clauses], dtype=np.int64).reshape(-1, k)
    occ = [[] for _ in range(inst.n_vars)]
    for j, c in enumerate(inst.clauses):
        for v, _ in c:
            occ[v].append(j)
    ptr = np.zeros(inst.n_vars + 1, dtype=np.int64)
    ptr[1:] = np.cumsum([len(o) for o in occ])
    idx = np.array([j for o in occ for j in o], dtype=np.int64)
    kern = _kernels(backend)
    if kern is _kernels_py:
        values = kern.one_in_k_search(inst.n_vars, k, cv.tolist(), cs.tolist(), ptr.tolist(), idx.tolist())
    else:
        values = kern.one_in_k_search(inst.n_vars, k, cv, cs, ptr, idx)
    if values is None:
        return None
    out = Assignment(np.array(values, dtype=np.int64))
    assert out.satisfies(inst)
    return out

"""Compare the compiled and pure-Python brute-force oracle kernels.

Usage: python3 benchmarks/bench_oracles.py [--repeat N] [--seed S]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from hardcomplete.gadgets import OneInKSatInstance, PartitionInstance, planted_one_in_k
from hardcomplete.graphs import Graph
from hardcomplete.oracles import brute_coloring, brute_one_in_k, brute_partition


def _timed(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _cases(seed):
    rng = np.random.default_rng(seed)
    rest = [int(x) for x in rng.integers(1, 1000, 21)]
    # a dominant (even-total) first item admits no split: full sweep of 2^(n-1) masks
    noparts = PartitionInstance((sum(rest) + 2,) + tuple(rest))
    part = PartitionInstance((sum(rest[:10]),) + tuple(rest))
    # K_5 has no 4-coloring; pad with 7 isolated vertices the DFS must sweep
    k5 = [(i, j) for i in range(5) for j in range(i + 1, 5)]
    nocolor = Graph(12, tuple((i + 7, j + 7) for i, j in k5))
    rnd_edges = tuple((int(i), int(j)) for i, j in rng.integers(0, 16, (40, 2)) if i != j)
    color = Graph(16, rnd_edges)
    sat, _ = planted_one_in_k(3, 22, 30, seed=seed)
    unsat = OneInKSatInstance(3, 20, (((0, 1), (1, 1), (2, 1)), ((0, -1), (1, -1), (2, -1)), ((0, 1), (1, -1), (2, 1))))
    return [
        ("partition n=22 (balanced)", lambda b: brute_partition(part, backend=b)),
        ("partition n=22 (none)", lambda b: brute_partition(noparts, backend=b)),
        ("coloring n=16 k=3", lambda b: brute_coloring(color, 3, max_bits=30, backend=b)),
        ("coloring K5+7 k=4 (none)", lambda b: brute_coloring(nocolor, 4, max_bits=30, backend=b)),
        ("one-in-3 n=22 m=30", lambda b: brute_one_in_k(sat, backend=b)),
        ("one-in-3 n=20 (unsat)", lambda b: brute_one_in_k(unsat, backend=b)),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    try:
        from hardcomplete import _kernels  # noqa: F401
    except ImportError:
        raise SystemExit("compiled kernels not built; run: pip install -e . --no-build-isolation")
    print(f"{'case':30s} {'cython s':>10s} {'python s':>10s} {'speedup':>8s}  agree")
    for name, fn in _cases(args.seed):
        tc, oc = _timed(lambda: fn("cython"), args.repeat)
        tp, op = _timed(lambda: fn("python"), max(1, args.repeat // 3))
        same = _key(oc) == _key(op)
        print(f"{name:30s} {tc:10.4f} {tp:10.4f} {tp / max(tc, 1e-9):8.1f}  {same}")


def _key(x):
    if x is None:
        return None
    for attr in ("colors", "values"):
        if hasattr(x, attr):
            return tuple(int(v) for v in getattr(x, attr))
    return tuple(sorted(x.in_set))


if __name__ == "__main__":
    main()

import itertools
import os
import subprocess
import sys
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import complete, cycle
from hardcomplete import oracles
from hardcomplete.gadgets import (
    OneInKSatInstance,
    PartitionInstance,
    csp_completeness,
    csp_gadget,
    partition_completeness,
    partition_gadget,
    max_residual,
)
from hardcomplete.graphs import Graph, completion_from_coloring, graph_to_partial, planted_graph
from hardcomplete.matrix import consistency
from hardcomplete.oracles import OracleSizeError, brute_coloring, brute_one_in_k, brute_partition
from hardcomplete.psd_decoders import decode_assignment, decode_partition

BACKENDS = ["python"] + (["cython"] if oracles.BACKEND == "cython" else [])


@pytest.mark.parametrize("backend", BACKENDS)
def test_coloring_examples(backend):
    assert list(brute_coloring(complete(3), 3, backend=backend).colors) == [0, 1, 2]
    assert brute_coloring(complete(3), 2, backend=backend) is None
    assert brute_coloring(cycle(5), 2, backend=backend) is None
    f = brute_coloring(cycle(5), 3, backend=backend)
    assert list(f.colors) == [0, 1, 0, 1, 2]


def test_coloring_guard():
    with pytest.raises(OracleSizeError):
        brute_coloring(cycle(30), 3)


def test_coloring_empty_graph():
    assert brute_coloring(Graph(0, ()), 2).colors.size == 0
    assert list(brute_coloring(Graph(3, ()), 1).colors) == [0, 0, 0]


@pytest.mark.parametrize("backend", BACKENDS)
def test_partition_examples(backend):
    for w in [(F(1, 2), F(1, 2)), (F(1, 2), F(1, 4), F(1, 4)), (F(3, 6), F(2, 6), F(1, 6))]:
        assert brute_partition(PartitionInstance(w), backend=backend).in_set == {0}
    assert brute_partition(PartitionInstance((1, 2, 4)), backend=backend) is None
    assert brute_partition(PartitionInstance((2, 2, 2, 10)), backend=backend) is None


def test_partition_guard():
    with pytest.raises(OracleSizeError):
        brute_partition(PartitionInstance((1,) * 25))


def test_partition_huge_integers_fall_back_to_exact():
    big = 2**70
    inst = PartitionInstance((big, big + 1, 1))
    assert brute_partition(inst).in_set == {0, 2}


@pytest.mark.parametrize("backend", BACKENDS)
def test_one_in_k_examples(backend):
    f = brute_one_in_k(OneInKSatInstance(3, 3, (((0, 1), (1, 1), (2, 1)),)), backend=backend)
    assert sorted(f.values) == [-1, 1, 1]
    assert list(f.values) == [-1, 1, 1]
    # the second clause needs exactly two of the same variables at -1
    contradictory = OneInKSatInstance(3, 3, (((0, 1), (1, 1), (2, 1)), ((0, -1), (1, -1), (2, -1))))
    assert brute_one_in_k(contradictory, backend=backend) is None
    assert list(brute_one_in_k(OneInKSatInstance(3, 4, ()), backend=backend).values) == [1, 1, 1, 1]


def test_one_in_k_guard():
    with pytest.raises(OracleSizeError):
        brute_one_in_k(OneInKSatInstance(3, 25, ()))


def smallest_solution(inst):
    for mask in range(1 << inst.n_vars):
        vals = [-1 if (mask >> v) & 1 else 1 for v in range(inst.n_vars)]
        if inst.violated_clause(vals) is None:
            return vals
    return None


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 9), st.integers(3, 4), st.integers(0, 7), st.integers(0, 2**31 - 1))
def test_one_in_k_matches_enumeration(n, k, m, seed):
    if n < k:
        n = k
    rng = np.random.default_rng(seed)
    clauses = tuple(
        tuple((int(v), int(rng.choice([-1, 1]))) for v in rng.choice(n, k, replace=False)) for _ in range(m)
    )
    inst = OneInKSatInstance(k, n, clauses)
    expected = smallest_solution(inst)
    for backend in BACKENDS:
        got = brute_one_in_k(inst, backend=backend)
        assert (got is None) == (expected is None)
        if got is not None:
            assert list(got.values) == expected


def first_coloring(g, k):
    for colors in itertools.product(range(k), repeat=g.n):
        if all(colors[i] != colors[j] for i, j in g.edges):
            return list(colors)
    return None


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 7), st.integers(1, 4), st.floats(0, 1), st.integers(0, 2**31 - 1))
def test_coloring_matches_enumeration(n, k, p, seed):
    rng = np.random.default_rng(seed)
    i, j = np.triu_indices(n, 1)
    keep = rng.random(len(i)) < p
    g = Graph(n, np.column_stack([i[keep], j[keep]]))
    expected = first_coloring(g, k)
    for backend in BACKENDS:
        got = brute_coloring(g, k, backend=backend)
        assert (got is None) == (expected is None)
        if got is not None:
            assert list(got.colors) == expected


@settings(max_examples=60, deadline=None)
@given(st.lists(st.fractions(min_value=F(1, 10), max_value=5, max_denominator=12), min_size=2, max_size=10))
def test_partition_matches_enumeration(weights):
    inst = PartitionInstance(tuple(weights))
    exists = any(
        sum(w if (mask >> t) & 1 else -w for t, w in enumerate(inst.weights)) == 0 for mask in range(1 << inst.n)
    )
    results = [brute_partition(inst, backend=b) for b in BACKENDS]
    for r in results:
        assert (r is not None) == exists
        if r is not None:
            assert r.is_balanced(inst) and 0 in r.in_set
    assert len({None if r is None else r.in_set for r in results}) == 1


def test_oracle_agreement_coloring():
    g, _ = planted_graph(12, 3, 0.6, seed=3)
    f = brute_coloring(g, 3)
    m = completion_from_coloring(g, f)
    assert consistency(graph_to_partial(g), m).rmse_sum == 0


def test_oracle_agreement_partition():
    inst = PartitionInstance((F(1, 4), F(1, 4), F(1, 4), F(1, 4)))
    split = brute_partition(inst)
    sys = partition_gadget(inst)
    va = partition_completeness(inst, split)
    assert max_residual(sys, va) <= 1e-12
    assert decode_partition(sys, va).is_balanced(inst)


def test_oracle_agreement_csp():
    inst = OneInKSatInstance(3, 5, (((0, 1), (1, -1), (2, 1)), ((2, 1), (3, 1), (4, -1))))
    f = brute_one_in_k(inst)
    assert decode_assignment(csp_gadget(inst), csp_completeness(inst, f)) == f


def test_env_var_forces_pure_python():
    code = "from hardcomplete import oracles; print(oracles.BACKEND)"
    env = dict(os.environ, HARDCOMPLETE_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_unknown_backend():
    with pytest.raises(ValueError):
        brute_coloring(complete(2), 2, backend="fortran")

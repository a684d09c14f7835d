import math
from fractions import Fraction as F
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardcomplete.gadgets import (
    Assignment,
    GramConstraintSystem,
    OneInKSatInstance,
    PartitionInstance,
    PartitionSplit,
    UnsatisfiedInstanceError,
    VectorAssignment,
    amplify_assignment,
    amplify_block_diagonal,
    clause_label,
    csp_completeness,
    csp_gadget,
    gram_system_to_partial,
    max_residual,
    p_partner,
    partition_completeness,
    partition_gadget,
    partition_label,
    planted_one_in_k,
    random_partitionable,
    var_label,
)
from hardcomplete.matrix import consistency, is_psd, numerical_rank

HALF = PartitionInstance((F(1, 2), F(1, 2)))
QUARTERS = PartitionInstance((F(1, 4),) * 4)
ONE_CLAUSE = OneInKSatInstance(3, 3, (((0, 1), (1, 1), (2, 1)),))


def test_partition_counts_n2():
    sys = partition_gadget(HALF)
    assert len(sys.labels) == 6
    # 3n unit + n orth + 2n sum + 3n rotation
    assert len(sys) == 18
    assert sys.family_counts() == {"unit": 6, "orth": 2, "sum": 4, "rotation": 6}


def test_partition_rotation_targets():
    _, _, tg = partition_gadget(HALF).arrays("rotation")
    assert np.allclose(tg, math.cos(0.5))
    assert tg[0] == pytest.approx(0.877583, abs=1e-6)


def test_partition_counts_n3():
    sys = partition_gadget(PartitionInstance((F(1, 3),) * 3))
    assert len(sys.labels) == 9
    assert len(sys) == 27


def test_partition_normalizes_weights():
    inst = PartitionInstance((3, 2, 1))
    assert inst.normalized == (F(1, 2), F(1, 3), F(1, 6))
    assert inst.scale == 6


@pytest.mark.parametrize("in_set", [{0}, {1}])
def test_partition_completeness_half(in_set):
    sys = partition_gadget(HALF)
    va = partition_completeness(HALF, PartitionSplit(in_set))
    assert max_residual(sys, va) <= 1e-12
    assert numerical_rank(va.gram()) <= 2


def test_partition_completeness_quarters_angles():
    va = partition_completeness(QUARTERS, PartitionSplit({0, 1}))
    theta = [math.atan2(va[partition_label(i, 1)][1], va[partition_label(i, 1)][0]) for i in range(4)]
    assert np.allclose(theta, [0, 0.25, 0.5, 0.25])
    assert max_residual(partition_gadget(QUARTERS), va) <= 1e-12


def test_partition_completeness_rejects_unbalanced():
    with pytest.raises(UnsatisfiedInstanceError):
        partition_completeness(QUARTERS, PartitionSplit({0}))


def test_partition_gram_is_psd():
    va = partition_completeness(QUARTERS, PartitionSplit({0, 2}))
    assert is_psd(va.gram())


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**31 - 1))
def test_random_partitionable_completeness(n, seed):
    inst, split = random_partitionable(n, seed=seed)
    assert split.is_balanced(inst)
    va = partition_completeness(inst, split)
    assert max_residual(partition_gadget(inst), va) <= 1e-12


def test_csp_label_count_single_variable():
    sys = csp_gadget(OneInKSatInstance(3, 1, ()))
    per_block = 6 + 2 * comb(6, 2)
    assert per_block == 36
    assert len(sys.labels) == 2 * per_block + 1


def test_csp_clause_target():
    sys = csp_gadget(ONE_CLAUSE)
    _, _, tg = sys.arrays("clause_ext")
    assert list(tg) == [pytest.approx(1 / 3)]


def test_csp_external_variable_count():
    sys = csp_gadget(OneInKSatInstance(3, 1, ()))
    assert sys.family_counts()["ext_var"] == 6 * 5


def test_csp_pairing():
    assert [p_partner(i) for i in range(1, 7)] == [2, 1, 4, 3, 6, 5]


def test_csp_completeness_clause_value():
    f = Assignment([-1, 1, 1])
    va = csp_completeness(ONE_CLAUSE, f)
    assert va[clause_label(0)] @ va[clause_label(1)] == pytest.approx(1 / 3)
    assert max_residual(csp_gadget(ONE_CLAUSE), va) <= 1e-12
    assert va.dim == 6


def test_csp_completeness_rejects_unsatisfying():
    with pytest.raises(UnsatisfiedInstanceError):
        csp_completeness(ONE_CLAUSE, Assignment([1, 1, 1]))


def test_csp_zero_clauses_any_assignment():
    inst = OneInKSatInstance(4, 3, ())
    for values in ([1, 1, 1], [-1, 1, -1]):
        va = csp_completeness(inst, Assignment(values))
        assert max_residual(csp_gadget(inst), va) <= 1e-12
        assert is_psd(va.gram())


def test_csp_rotation_coupling_is_satisfied():
    inst, f = planted_one_in_k(3, 5, 3, seed=4)
    sys = csp_gadget(inst, rotation_coupling=True)
    assert "ext_var_couple" in sys.family_counts()
    assert max_residual(sys, csp_completeness(inst, f)) <= 1e-12


def test_csp_reading_vector():
    inst, f = planted_one_in_k(3, 6, 4, seed=1)
    va = csp_completeness(inst, f)
    for v in range(6):
        assert va[var_label(0, 1)] @ va[var_label(v + 1, 2)] == pytest.approx(f.values[v])


@settings(max_examples=20, deadline=None)
@given(st.integers(3, 5), st.integers(5, 10), st.integers(0, 6), st.integers(0, 2**31 - 1))
def test_planted_csp_completeness(k, n, m, seed):
    inst, f = planted_one_in_k(k, n, m, seed=seed)
    va = csp_completeness(inst, f)
    assert max_residual(csp_gadget(inst), va) <= 1e-12


def test_amplify_partition_counts():
    sys = partition_gadget(HALF)
    amp = amplify_block_diagonal(sys, 2)
    assert len(amp.labels) == 12
    assert len(amp) == 2 * len(sys) + 36
    assert amplify_block_diagonal(sys, 1) is sys


def test_amplified_completeness():
    sys = partition_gadget(QUARTERS)
    va = partition_completeness(QUARTERS, PartitionSplit({0, 1}))
    amp = amplify_block_diagonal(sys, 3)
    ava = amplify_assignment(va, 3)
    assert ava.dim == 6
    assert max_residual(amp, ava) <= 1e-12


def test_gram_to_partial_small():
    sys = GramConstraintSystem("x", ("a", "b"), (("a", "a", 1.0), ("b", "b", 1.0), ("a", "b", 0.0)))
    pm = gram_system_to_partial(sys)
    assert pm.n_revealed == 4
    assert np.array_equal(pm.values(), np.eye(2))


def test_gram_to_partial_partition():
    sys = partition_gadget(HALF)
    pm = gram_system_to_partial(sys)
    assert pm.n == 6
    # two of the rotation constraints coincide on the 2-cycle
    assert pm.n_canonical == 15
    va = partition_completeness(HALF, PartitionSplit({0}))
    assert consistency(pm, va.gram()).rmse_sum <= 1e-24


def test_gram_to_partial_empty():
    sys = GramConstraintSystem("x", ("a", "b", "c"), ())
    assert gram_system_to_partial(sys).n_revealed == 0


def test_gram_to_partial_conflict():
    sys = GramConstraintSystem("x", ("a", "b"), (("a", "b", 0.0), ("b", "a", 0.5)))
    with pytest.raises(ValueError):
        gram_system_to_partial(sys)


def test_system_validation():
    with pytest.raises(KeyError):
        GramConstraintSystem("x", ("a",), (("a", "z", 1.0),))
    with pytest.raises(ValueError):
        GramConstraintSystem("x", ("a", "a"), ())


def test_perturbed_moves_by_eps_over_3():
    va = partition_completeness(HALF, PartitionSplit({0}))
    pv = va.perturbed(0.3, seed=1)
    assert np.allclose(np.linalg.norm(pv.vectors - va.vectors, axis=1), 0.1)
    assert max_residual(partition_gadget(HALF), pv) <= 0.3


def test_embedded_preserves_gram():
    va = partition_completeness(QUARTERS, PartitionSplit({0, 1}))
    emb = va.embedded(3, seed=2)
    assert emb.dim == 3
    assert np.allclose(emb.gram(), va.gram())


def test_instance_validation():
    with pytest.raises(ValueError):
        OneInKSatInstance(2, 3, ())
    with pytest.raises(ValueError):
        OneInKSatInstance(3, 3, (((0, 1), (0, 1), (1, 1)),))
    with pytest.raises(ValueError):
        PartitionInstance((1,))
    with pytest.raises(ValueError):
        PartitionInstance((1, -1))
    with pytest.raises(ValueError):
        Assignment([1, 0])
    assert VectorAssignment(("a",), [[1.0, 0.0]]).dim == 2

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardcomplete.graphs import Coloring, completion_from_coloring, graph_to_partial
from hardcomplete.matrix import (
    DimensionError,
    Factorization,
    PartialMatrix,
    coherence,
    consistency,
    is_psd,
    numerical_rank,
    revealed_errors,
)


def revealed_identity(n=2):
    return PartialMatrix.from_entries(n, {(i, i): 1.0 for i in range(n)})


def test_partial_matrix_symmetric_storage():
    pm = PartialMatrix.from_entries(3, {(2, 0): 0.5, (1, 1): 1.0})
    assert pm.get(0, 2) == pm.get(2, 0) == 0.5
    assert pm.get(0, 1) is None
    assert pm.n_canonical == 2
    assert pm.n_revealed == 3
    m = pm.mask()
    assert np.array_equal(m, m.T) and m.sum() == 3


def test_partial_matrix_rejects_bad_input():
    with pytest.raises(ValueError):
        PartialMatrix.from_entries(2, {(0, 0): 2.0}, c=1.0)
    with pytest.raises((IndexError, ValueError)):
        PartialMatrix.from_entries(2, {(0, 2): 0.0})
    with pytest.raises(ValueError):
        PartialMatrix(2, 1.0, np.array([0, 1]), np.array([1, 0]), np.array([0.1, 0.2]))


def test_consistency_identity():
    rep = consistency(revealed_identity(), np.eye(2))
    assert rep.rmse_sum == 0 and rep.max_entry_err == 0


def test_consistency_one_entry_off():
    rep = consistency(revealed_identity(), np.array([[1.0, 0], [0, 0]]))
    assert rep.rmse_sum == 1 and rep.max_entry_err == 1


def test_consistency_k3_all_ones(k3):
    rep = consistency(graph_to_partial(k3), np.ones((3, 3)))
    assert rep.rmse_sum == 6
    assert rep.n_revealed == 9


def test_consistency_dimension_mismatch():
    with pytest.raises(DimensionError):
        consistency(revealed_identity(), np.eye(3))


def test_revealed_errors_counts_both_orientations():
    pm = PartialMatrix.from_entries(2, {(0, 1): 0.0})
    b = np.array([[0, 1.0], [2.0, 0]])
    assert sorted(np.abs(revealed_errors(pm, b))) == [1.0, 2.0]


def test_numerical_rank_examples(c4):
    assert numerical_rank(np.eye(3)) == 3
    assert numerical_rank(np.ones((4, 4))) == 1
    m = completion_from_coloring(c4, Coloring(2, np.array([0, 1, 0, 1])))
    assert numerical_rank(m) == 2 == np.linalg.matrix_rank(m)


@pytest.mark.parametrize("n", [1, 3, 7])
def test_coherence_identity_and_ones(n):
    assert coherence(np.eye(n)) == pytest.approx(1.0, abs=1e-12)
    assert coherence(np.ones((n, n))) == pytest.approx(1.0, abs=1e-12)


def test_coherence_spiky_matrix():
    m = np.zeros((5, 5))
    m[0, 0] = 1.0
    assert coherence(m) == pytest.approx(5.0)


def test_coherence_zero_matrix_errors():
    with pytest.raises(ValueError):
        coherence(np.zeros((3, 3)))


def test_is_psd():
    assert is_psd(np.eye(2))
    assert not is_psd(np.array([[0.0, 1], [1, 0]]))
    with pytest.raises(ValueError):
        is_psd(np.array([[1.0, 2], [0, 1]]))


def test_factorization_row_norms():
    f = Factorization(np.array([[3.0, 4.0]]), np.array([[1.0, 0.0]]))
    assert f.r == 2
    assert f.max_row_norm() == 5.0
    assert np.array_equal(f.reconstruct(), [[3.0]])


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 8), st.integers(1, 4), st.integers(0, 2**31 - 1))
def test_rank_of_random_product(n, r, seed):
    rng = np.random.default_rng(seed)
    r = min(r, n)
    m = rng.standard_normal((n, r)) @ rng.standard_normal((r, n))
    assert numerical_rank(m) == r


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.integers(0, 2**31 - 1))
def test_consistency_zero_iff_agrees(n, seed):
    rng = np.random.default_rng(seed)
    b = rng.uniform(-1, 1, (n, n))
    b = (b + b.T) / 2
    mask = np.triu(rng.random((n, n)) < 0.5)
    mask = mask | mask.T
    pm = PartialMatrix.from_dense(b, mask, c=1.0)
    assert consistency(pm, b).rmse_sum == 0
    assert pm.n_revealed == mask.sum()
    bumped = b + 0.1
    assert consistency(pm, bumped).rmse_sum == pytest.approx(0.01 * mask.sum())

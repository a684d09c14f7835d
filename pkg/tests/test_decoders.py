import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardcomplete.decoders import (
    ConeRoundingParams,
    DecodingError,
    NetColoringParams,
    coloring_color_bound,
    decode_coloring,
    decode_independent_set,
    filter_accurate_submatrix,
    independent_set_bound,
    independent_set_trials,
)
from hardcomplete.factorize import bounded_factorize
from hardcomplete.graphs import (
    Coloring,
    Graph,
    completion_from_coloring,
    graph_to_partial,
    indicator_factorization,
    planted_graph,
)
from hardcomplete.matrix import Factorization, consistency


def test_cone_params_defaults():
    p = ConeRoundingParams(1.0, 2)
    assert p.delta == 0.25
    assert p.cos_phi == pytest.approx(0.25 * math.sqrt(2) / 0.75**2)
    assert p.threshold == pytest.approx(math.cos(p.phi / 2))


def test_cone_params_invalid_angle():
    with pytest.raises(ValueError):
        ConeRoundingParams(1.0, 1, delta=0.6)


def test_filter_exact_keeps_everything(c5):
    g = c5
    f = Coloring(3, np.array([0, 1, 0, 1, 2]))
    m = completion_from_coloring(g, f)
    assert np.array_equal(filter_accurate_submatrix(graph_to_partial(g), m, 0.1), np.arange(5))


def test_filter_drops_corrupted_diagonal(c5):
    f = Coloring(3, np.array([0, 1, 0, 1, 2]))
    m = completion_from_coloring(c5, f)
    m[3, 3] += 0.2
    assert list(filter_accurate_submatrix(graph_to_partial(c5), m, 0.1)) == [0, 1, 2, 4]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0.01, 0.3))
def test_filter_size_bound(seed, delta):
    rng = np.random.default_rng(seed)
    g, f = planted_graph(20, 3, 0.5, seed=seed)
    pm = graph_to_partial(g)
    m = completion_from_coloring(g, f) + rng.normal(0, 0.1, (20, 20))
    s = filter_accurate_submatrix(pm, m, delta)
    assert len(s) >= 20 - consistency(pm, m).rmse_sum / delta**2
    for i in s:
        for j in s:
            if pm.get(i, j) is not None:
                assert abs(m[i, j] - pm.get(i, j)) <= delta


def test_independent_sets_are_independent():
    g, f = planted_graph(60, 2, 0.3, seed=1)
    fac = indicator_factorization(f)
    trials = independent_set_trials(fac, ConeRoundingParams(1.0, 2, seed=4), trials=100)
    assert all(t.is_independent(g) for t in trials.sets)
    assert trials.mean_size > 0


def test_independent_set_after_bounded_factorization():
    g, f = planted_graph(40, 2, 0.5, seed=2)
    fac = bounded_factorize(completion_from_coloring(g, f))
    for t in independent_set_trials(fac, ConeRoundingParams(1.0, fac.r, seed=9), trials=50).sets:
        assert t.is_independent(g)


def test_single_vertex_cap_probability():
    fac = Factorization(np.array([[1.0, 0.0]]), np.array([[1.0, 0.0]]))
    params = ConeRoundingParams(1.0, 2, seed=0)
    trials = independent_set_trials(fac, params, trials=10_000)
    rate = trials.mean_size
    assert rate >= independent_set_bound(1, 1.0, 2)["per_vertex_probability"] / 2
    # in the plane the cap is an arc of length phi
    assert rate == pytest.approx(params.phi / (2 * math.pi), abs=0.02)


def test_trials_reproducible():
    _, f = planted_graph(30, 2, 0.3, seed=3)
    fac = indicator_factorization(f)
    a = independent_set_trials(fac, ConeRoundingParams(1.0, 2, seed=11), trials=5)
    b = independent_set_trials(fac, ConeRoundingParams(1.0, 2, seed=11), trials=5)
    assert [list(s.vertices) for s in a.sets] == [list(s.vertices) for s in b.sets]


def test_decoder_detects_bad_factorization():
    # rows pointing the same way with a tiny product violate the delta separation
    u = np.array([[1.0, 0.0], [0.1, 0.0]])
    fac = Factorization(u, 0.1 * u)
    params = ConeRoundingParams(1.0, 2, seed=0)
    with pytest.raises(DecodingError):
        for s in range(200):
            decode_independent_set(fac, params, rng=np.random.default_rng(s))


def test_bound_formulas():
    b = independent_set_bound(2000, 1.0, 2, 0.0)
    base = 2 * math.sqrt(math.pi) * (8 * math.sqrt(2)) ** 2
    assert b["stated"] == pytest.approx(2000 / base)
    assert b["proof"] == pytest.approx(2000 / (2 * base))
    assert coloring_color_bound(1, 3, 0) == pytest.approx((4 * math.sqrt(3)) ** 6)


def test_coloring_k2_distinct(k2):
    fac = bounded_factorize(np.eye(2))
    col = decode_coloring(fac, NetColoringParams(1.0, fac.r, 0.0))
    assert col.colors[0] != col.colors[1]


def test_coloring_planted_n30():
    g, f = planted_graph(30, 3, 0.5, seed=7)
    fac = bounded_factorize(completion_from_coloring(g, f))
    col = decode_coloring(fac, NetColoringParams(1.0, fac.r, 0.0))
    assert col.is_proper(g)
    assert col.k <= coloring_color_bound(1.0, 3, 0.0)


def test_coloring_with_entrywise_noise():
    g, f = planted_graph(30, 3, 0.5, seed=8)
    fac = indicator_factorization(f)
    rng = np.random.default_rng(0)
    noisy = Factorization(fac.u + rng.uniform(-0.02, 0.02, fac.u.shape), fac.v + rng.uniform(-0.02, 0.02, fac.v.shape))
    eps = np.abs(noisy.reconstruct() - fac.reconstruct()).max()
    col = decode_coloring(noisy, NetColoringParams(1.0, 3, eps))
    assert col.is_proper(g)


def test_coloring_rejects_long_rows():
    fac = Factorization(np.array([[3.0, 0.0]]), np.array([[0.1, 0.0]]))
    with pytest.raises(DecodingError):
        decode_coloring(fac, NetColoringParams(1.0, 2, 0.0))


def test_coloring_labels_by_first_appearance():
    fac = indicator_factorization(Coloring(2, np.array([1, 0, 1])))
    col = decode_coloring(fac, NetColoringParams(1.0, 2, 0.0))
    assert list(col.colors) == [0, 1, 0]


def test_net_params_validation():
    with pytest.raises(ValueError):
        NetColoringParams(1.0, 2, 0.5)
    with pytest.raises(ValueError):
        NetColoringParams(1.0, 2, 0.1, delta_net=10.0)
    assert Graph(1, ()).m == 0

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardcomplete.factorize import (
    SdpConvergenceError,
    bounded_factorize,
    lemma_row_norm_bound,
    polish_factorization,
    project_rows_to_rowspace,
    rebase_factorization,
    scale_consistent_row_norm_bound,
    sdp_min_rownorm_factor,
)
from hardcomplete.graphs import Coloring, balance_by_copies, completion_from_coloring, planted_graph
from hardcomplete.matrix import numerical_rank


def random_low_rank(rng, n, r, c=1.0):
    m = rng.standard_normal((n, r)) @ rng.standard_normal((r, n))
    return c * m / np.abs(m).max()


def test_sdp_identity():
    sol = sdp_min_rownorm_factor(np.eye(2))
    assert sol.eta <= np.sqrt(2) + 1e-6
    assert sol.eta == pytest.approx(1.0, abs=1e-5)


def test_sdp_all_ones():
    sol = sdp_min_rownorm_factor(np.ones((3, 3)))
    assert sol.eta == pytest.approx(1.0, abs=1e-5)
    assert sol.constraint_residual <= 1e-7


def test_sdp_random_rank2(rng):
    sol = sdp_min_rownorm_factor(random_low_rank(rng, 10, 2))
    assert sol.eta <= np.sqrt(2) + 1e-6


def test_sdp_rectangular(rng):
    a = rng.uniform(-1, 1, (4, 6))
    sol = sdp_min_rownorm_factor(a)
    assert np.abs(sol.u @ sol.v.T - a).max() <= 1e-7


def test_sdp_nonconvergence_raises():
    with pytest.raises(SdpConvergenceError):
        sdp_min_rownorm_factor(np.array([[1.0, 0.3], [0.2, -1.0]]), tol=1e-14, max_iter=3)


def test_sdp_zero_matrix():
    with pytest.raises(ValueError):
        sdp_min_rownorm_factor(np.zeros((2, 2)))


def test_project_examples():
    assert np.allclose(project_rows_to_rowspace([[1.0, 0.0]], [[1.0, 1.0]]), [[1.0, 0.0]])
    v = np.array([[0.3, 0.0], [-2.0, 0.0]])
    assert np.allclose(project_rows_to_rowspace([[5.0, 0.0]], v), v)


def test_projected_rank_equals_rank(rng):
    m = random_low_rank(rng, 8, 2)
    sol = sdp_min_rownorm_factor(m)
    vp = project_rows_to_rowspace(sol.u, sol.v)
    assert numerical_rank(vp, 1e-6) == 2
    assert np.abs(sol.u @ vp.T - m).max() <= 1e-6


def test_rebase_orthonormal_input(rng):
    q, _ = np.linalg.qr(rng.standard_normal((5, 3)))
    u = rng.standard_normal((5, 3))
    v = rng.standard_normal((5, 3))
    out = rebase_factorization(u, v, 3)
    assert np.allclose(out.reconstruct(), u @ v.T)
    assert np.allclose(out.row_norms()[0], np.linalg.norm(u, axis=1))


def test_rebase_all_ones_to_dimension_one():
    sol = sdp_min_rownorm_factor(np.ones((4, 4)))
    fac = rebase_factorization(sol.u, project_rows_to_rowspace(sol.u, sol.v), 1)
    assert fac.r == 1
    assert fac.max_row_norm() <= 1 + 1e-6


def test_rebase_rank_deficient_flag():
    u = np.array([[1.0, 0.0], [2.0, 0.0]])
    out = rebase_factorization(u, u, 2)
    assert out.info["rank_deficient"] and out.info["detected_rank"] == 1


def test_c4_meets_bound(c4):
    m = completion_from_coloring(c4, Coloring(2, np.array([0, 1, 0, 1])))
    fac = bounded_factorize(m)
    assert fac.r == 2
    assert fac.max_row_norm() <= 2**0.25 + 1e-6


def test_identity_meets_bound():
    fac = bounded_factorize(np.eye(2))
    assert fac.max_row_norm() <= 2**0.25 + 1e-6
    assert fac.info["lemma_bound_met"]


def test_all_ones_norms():
    fac = bounded_factorize(np.ones((6, 6)))
    assert fac.r == 1
    assert fac.max_row_norm() <= 1 + 1e-6


def test_balanced_3_coloring_n12():
    g, f = planted_graph(4, 3, 0.8, seed=2, balanced=True)
    g, f = balance_by_copies(g, f)
    assert g.n == 12
    m = completion_from_coloring(g, f)
    fac = bounded_factorize(m)
    assert fac.max_row_norm() <= 3**0.25 + 1e-6
    assert fac.info["reconstruction_error"] <= 1e-6


def test_stated_bound_fails_when_c_exceeds_one():
    # 2J has rank 1 and max entry 2, so u_1.v_1 = 2 forces a row of norm >= sqrt(2) > 2^(1/4)
    fac = bounded_factorize(2 * np.ones((3, 3)))
    assert fac.max_row_norm() == pytest.approx(np.sqrt(2), abs=1e-5)
    assert not fac.info["lemma_bound_met"]
    assert fac.max_row_norm() <= scale_consistent_row_norm_bound(2, 1) + 1e-6
    assert lemma_row_norm_bound(2, 1) < np.sqrt(2)


@settings(max_examples=15, deadline=None)
@given(st.integers(3, 12), st.integers(1, 3), st.sampled_from([1.0, 2.0]), st.integers(0, 2**31 - 1))
def test_scale_consistent_bound_holds(n, r, c, seed):
    rng = np.random.default_rng(seed)
    r = min(r, n)
    m = random_low_rank(rng, n, r, c)
    fac = bounded_factorize(m)
    assert fac.r == numerical_rank(m)
    assert fac.info["reconstruction_error"] <= 1e-6
    assert fac.max_row_norm() <= scale_consistent_row_norm_bound(c, fac.r) * 1.001


def test_polish_restores_exact_products(rng):
    x0, y0 = rng.standard_normal((12, 3)), rng.standard_normal((10, 3))
    m = x0 @ y0.T
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    x, y = x0 @ q + 1e-4 * rng.standard_normal((12, 3)), y0 @ q + 1e-4 * rng.standard_normal((10, 3))
    xp, yp = polish_factorization(x, y, m, 3)
    assert np.abs(xp @ yp.T - m).max() < 1e-12
    assert np.abs(np.linalg.norm(xp, axis=1) - np.linalg.norm(x, axis=1)).max() < 1e-2


def test_bounded_factorize_exact_despite_near_null_sdp_directions():
    rng = np.random.default_rng(202)
    worst = 0.0
    for _ in range(12):
        m = rng.standard_normal((20, 4)) @ rng.standard_normal((4, 20))
        fac = bounded_factorize(m / np.abs(m).max())
        worst = max(worst, fac.info["reconstruction_error"])
    assert worst <= 1e-9

"""Best-effort heuristics: bounded low-rank completion and Gram-vector search.

Neither solver certifies anything.  They exist to produce candidate
completions that the verifiers and decoders can then be run against.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .gadgets import GramConstraintSystem, VectorAssignment
from .matrix import PartialMatrix, revealed_errors

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    rank: int = 2
    c: float | None = None
    max_iter: int = 500
    tol: float = 1e-12
    seed: int = 0
    restarts: int = 1
    ridge: float = 1e-10
    bound_weight: float = 1e-2

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank budget must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass
class CompletionResult:
    matrix: np.ndarray
    rmse_sum: float
    restart: int
    history: list = field(default_factory=list)
    rescaled: bool = False


def _als_pass(x, y, target, weight, ridge):
    """Row-wise weighted least squares for ``x`` with ``y`` fixed."""
    r = x.shape[1]
    gram = np.einsum("ij,jk,jl->ikl", weight, y, y) + ridge * np.eye(r)
    rhs = (weight * target) @ y
    return np.linalg.solve(gram, rhs[..., None])[..., 0]


def _one_completion(pm: PartialMatrix, cfg: SolverConfig, c: float, rng) -> tuple[np.ndarray, float, list]:
    n, r = pm.n, cfg.rank
    mask = pm.mask()
    vals = pm.values()
    x = rng.standard_normal((n, r)) / np.sqrt(r)
    y = rng.standard_normal((n, r)) / np.sqrt(r)
    history = []
    prev = np.inf
    for it in range(cfg.max_iter):
        b = x @ y.T
        # unrevealed entries are pulled toward their clipped value, so
        # in-bound completions are fixed points
        target = np.where(mask, vals, np.clip(b, -c, c))
        weight = np.where(mask, 1.0, cfg.bound_weight)
        x = _als_pass(x, y, target, weight, cfg.ridge)
        y = _als_pass(y, x, target.T, weight.T, cfg.ridge)
        b = x @ y.T
        err = float(np.sum(revealed_errors(pm, b) ** 2))
        excess = float(np.abs(b).max() - c)
        history.append(err)
        if err < cfg.tol and excess <= 0:
            break
        if it > 20 and abs(prev - err) < 1e-16 * max(1.0, err) and excess <= 0:
            break
        prev = err
    return x @ y.T, err, history


def complete_bounded_rank(pm: PartialMatrix, cfg: SolverConfig) -> CompletionResult:
    """Alternating minimisation for a rank-``r`` matrix fitting the revealed entries.

    Unrevealed entries outside ``[-c, c]`` are penalised toward the box during
    the iterations.  If the final product still exceeds ``c`` it is scaled
    down uniformly, which keeps its rank; an entrywise clip would not.
    Restart ``t`` uses seed ``cfg.seed + t``; the lowest error wins.
    """
    c = pm.c if cfg.c is None else cfg.c
    best = None
    for t in range(cfg.restarts):
        rng = np.random.default_rng(cfg.seed + t)
        b, err, hist = _one_completion(pm, cfg, c, rng)
        rescaled = False
        peak = float(np.abs(b).max(initial=0.0))
        if peak > c:
            b = b * (c / peak)
            err = float(np.sum(revealed_errors(pm, b) ** 2))
            rescaled = True
        log.debug("restart %d: rmse_sum %.3e", t, err)
        if best is None or err < best.rmse_sum:
            best = CompletionResult(b, err, t, hist, rescaled)
    return best


@dataclass
class GramSolveResult:
    assignment: VectorAssignment
    max_residual: float
    restart: int
    residuals_by_restart: list


def _gram_objective(flat, shape, ia, ib, tg):
    x = flat.reshape(shape)
    res = np.einsum("ij,ij->i", x[ia], x[ib]) - tg
    grad = np.zeros(shape)
    np.add.at(grad, ia, 2 * res[:, None] * x[ib])
    np.add.at(grad, ib, 2 * res[:, None] * x[ia])
    return float(res @ res), grad.ravel()


def solve_gram_system(sys: GramConstraintSystem, dim: int, cfg: SolverConfig | None = None) -> GramSolveResult:
    """Minimise ``sum (<u_a,u_b> - target)^2`` over vectors in ``R^dim`` (L-BFGS with restarts).

    The best restart by maximum absolute residual is returned.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    cfg = cfg or SolverConfig()
    ia, ib, tg = sys.arrays()
    shape = (len(sys.labels), dim)
    best = None
    per_restart = []
    for t in range(cfg.restarts):
        rng = np.random.default_rng(cfg.seed + t)
        x0 = rng.standard_normal(shape) / np.sqrt(dim)
        out = minimize(
            _gram_objective,
            x0.ravel(),
            args=(shape, ia, ib, tg),
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": cfg.max_iter * 10, "ftol": 1e-30, "gtol": 1e-14, "maxcor": 30},
        )
        x = out.x.reshape(shape)
        res = float(np.abs(np.einsum("ij,ij->i", x[ia], x[ib]) - tg).max(initial=0.0))
        per_restart.append(res)
        if best is None or res < best[0]:
            best = (res, t, x)
    res, t, x = best
    return GramSolveResult(VectorAssignment(sys.labels, x), res, t, per_restart)

"""Partial matrices, factorizations and the basic checks run on them.

A :class:`PartialMatrix` keeps only its revealed entries, as canonical
``(i, j)`` pairs with ``i <= j``; the mirror entry is implied.  Dense matrices
are plain ``numpy`` arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_RANK_TOL = 1e-9


class DimensionError(ValueError):
    """Raised when two matrices that must agree in shape do not."""


@dataclass(frozen=True)
class PartialMatrix:
    """Symmetric ``n x n`` matrix with a revealed-entry set and coefficient bound ``c``.

    ``rows``, ``cols`` and ``vals`` hold the canonical revealed entries
    (``rows[t] <= cols[t]``), sorted and unique.  Unrevealed entries are
    simply absent.
    """

    n: int
    c: float
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64).reshape(-1)
        cols = np.asarray(self.cols, dtype=np.int64).reshape(-1)
        vals = np.asarray(self.vals, dtype=float).reshape(-1)
        if not (len(rows) == len(cols) == len(vals)):
            raise ValueError("rows, cols and vals must have equal length")
        if self.n < 0:
            raise ValueError("n must be non-negative")
        if not self.c > 0:
            raise ValueError("coefficient bound c must be positive")
        if len(rows) and (rows.min() < 0 or cols.max() >= self.n or cols.min() < 0 or rows.max() >= self.n):
            raise IndexError("entry index out of range")
        if not np.all(np.isfinite(vals)):
            raise ValueError("revealed values must be finite")
        if np.any(np.abs(vals) > self.c * (1 + 1e-12)):
            raise ValueError("revealed value exceeds coefficient bound c")
        lo, hi = np.minimum(rows, cols), np.maximum(rows, cols)
        key = lo * max(self.n, 1) + hi
        order = np.argsort(key, kind="stable")
        key, lo, hi, vals = key[order], lo[order], hi[order], vals[order]
        dup = np.flatnonzero(key[1:] == key[:-1])
        if len(dup):
            if np.any(vals[dup] != vals[dup + 1]):
                t = dup[np.flatnonzero(vals[dup] != vals[dup + 1])[0]]
                raise ValueError(f"conflicting values for entry ({lo[t]}, {hi[t]})")
            keep = np.ones(len(key), dtype=bool)
            keep[dup + 1] = False
            lo, hi, vals = lo[keep], hi[keep], vals[keep]
        for name, arr in (("rows", lo), ("cols", hi), ("vals", vals)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_entries(cls, n: int, entries: dict, c: float = 1.0) -> "PartialMatrix":
        """Build from a ``{(i, j): value}`` map; either orientation may be given."""
        if not entries:
            return cls(n, c, [], [], [])
        keys = list(entries)
        rows = [k[0] for k in keys]
        cols = [k[1] for k in keys]
        return cls(n, c, rows, cols, [entries[k] for k in keys])

    @classmethod
    def from_dense(cls, values: np.ndarray, mask: np.ndarray, c: float | None = None) -> "PartialMatrix":
        values = np.asarray(values, dtype=float)
        mask = np.asarray(mask, dtype=bool)
        if values.shape != mask.shape or values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise DimensionError("values and mask must be equal square arrays")
        if not np.array_equal(mask, mask.T):
            raise ValueError("mask must be symmetric")
        iu, ju = np.nonzero(np.triu(mask))
        v = values[iu, ju]
        if not np.allclose(values[ju, iu], v, rtol=0, atol=0):
            raise ValueError("revealed values must be symmetric")
        if c is None:
            c = float(np.abs(v).max()) if len(v) and np.abs(v).max() > 0 else 1.0
        return cls(values.shape[0], c, iu, ju, v)

    def get(self, i: int, j: int):
        """Value at ``(i, j)`` or ``None`` when unrevealed."""
        lo, hi = min(i, j), max(i, j)
        key = self.rows * max(self.n, 1) + self.cols
        t = np.searchsorted(key, lo * max(self.n, 1) + hi)
        if t < len(key) and key[t] == lo * max(self.n, 1) + hi:
            return float(self.vals[t])
        return None

    def entries(self) -> dict:
        return {(int(i), int(j)): float(v) for i, j, v in zip(self.rows, self.cols, self.vals)}

    @property
    def n_canonical(self) -> int:
        return len(self.vals)

    @property
    def n_revealed(self) -> int:
        """``|Omega|`` counting both orientations of off-diagonal entries."""
        diag = int(np.count_nonzero(self.rows == self.cols))
        return diag + 2 * (len(self.vals) - diag)

    @property
    def revealed_fraction(self) -> float:
        return self.n_revealed / self.n**2 if self.n else 1.0

    def mask(self) -> np.ndarray:
        m = np.zeros((self.n, self.n), dtype=bool)
        m[self.rows, self.cols] = True
        m[self.cols, self.rows] = True
        return m

    def values(self) -> np.ndarray:
        """Dense array of revealed values, zero where unrevealed; pair with :meth:`mask`."""
        a = np.zeros((self.n, self.n))
        a[self.rows, self.cols] = self.vals
        a[self.cols, self.rows] = self.vals
        return a


@dataclass(frozen=True)
class Factorization:
    """Row-vector families ``u`` and ``v`` (``n x r`` each) with ``M = u @ v.T``."""

    u: np.ndarray
    v: np.ndarray
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        u = np.atleast_2d(np.asarray(self.u, dtype=float))
        v = np.atleast_2d(np.asarray(self.v, dtype=float))
        if u.shape[1] != v.shape[1]:
            raise DimensionError(f"u has dimension {u.shape[1]}, v has {v.shape[1]}")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise ValueError("factor vectors must be finite")
        u.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def r(self) -> int:
        return self.u.shape[1]

    def reconstruct(self) -> np.ndarray:
        return self.u @ self.v.T

    def row_norms(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.norm(self.u, axis=1), np.linalg.norm(self.v, axis=1)

    def max_row_norm(self) -> float:
        nu, nv = self.row_norms()
        return float(max(nu.max(initial=0.0), nv.max(initial=0.0)))


@dataclass(frozen=True)
class ConsistencyReport:
    rmse_sum: float
    max_entry_err: float
    rank_est: int
    coeff_bound_ok: bool
    n_revealed: int
    revealed_fraction: float

    def as_dict(self) -> dict:
        return {
            "rmse_sum": self.rmse_sum,
            "max_entry_err": self.max_entry_err,
            "rank_est": self.rank_est,
            "coeff_bound_ok": self.coeff_bound_ok,
            "n_revealed": self.n_revealed,
            "revealed_fraction": self.revealed_fraction,
        }


def _as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=float)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def revealed_errors(pm: PartialMatrix, b) -> np.ndarray:
    """Signed errors ``B(i,j) - A(i,j)`` over Omega, both orientations."""
    b = _as_matrix(b)
    if b.shape != (pm.n, pm.n):
        raise DimensionError(f"partial matrix is {pm.n}x{pm.n}, completion is {b.shape[0]}x{b.shape[1]}")
    off = pm.rows != pm.cols
    e1 = b[pm.rows, pm.cols] - pm.vals
    e2 = b[pm.cols[off], pm.rows[off]] - pm.vals[off]
    return np.concatenate([e1, e2])


def consistency(pm: PartialMatrix, b, tol: float = DEFAULT_RANK_TOL) -> ConsistencyReport:
    """Compare a dense candidate ``b`` against the revealed entries of ``pm``."""
    err = revealed_errors(pm, b)
    b = np.asarray(b, dtype=float)
    return ConsistencyReport(
        rmse_sum=float(np.sum(err**2)),
        max_entry_err=float(np.abs(err).max(initial=0.0)),
        rank_est=numerical_rank(b, tol),
        coeff_bound_ok=bool(np.all(np.abs(b) <= pm.c)),
        n_revealed=pm.n_revealed,
        revealed_fraction=pm.revealed_fraction,
    )


def numerical_rank(m, tol: float = DEFAULT_RANK_TOL) -> int:
    """Number of singular values above ``tol * sigma_max``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = _as_matrix(m)
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def coherence(m, tol: float = DEFAULT_RANK_TOL) -> float:
    """Smallest mu for which the computed SVD certifies coherence mu.

    With ``k`` the numerical rank, returns ``(n/k) * max_i ||e_i^T U||^2``,
    maximised over both singular subspaces.
    """
    a = _as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionError("coherence is defined here for square matrices")
    u, s, vt = np.linalg.svd(a)
    if a.size == 0 or s[0] == 0:
        raise ValueError("coherence is undefined for the zero matrix")
    k = int(np.count_nonzero(s > tol * s[0]))
    n = a.shape[0]
    lev_u = np.sum(u[:, :k] ** 2, axis=1).max()
    lev_v = np.sum(vt[:k] ** 2, axis=0).max()
    return float(n / k * max(lev_u, lev_v))


def is_psd(m, tol: float = DEFAULT_RANK_TOL) -> bool:
    a = _as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionError("is_psd needs a square matrix")
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    if not np.allclose(a, a.T, rtol=0, atol=1e-12 * scale):
        raise ValueError("is_psd needs a symmetric matrix")
    if a.size == 0:
        return True
    return bool(np.linalg.eigvalsh((a + a.T) / 2)[0] >= -tol)

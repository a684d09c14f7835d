"""Read Partition splits and Exact-one-in-k-SAT assignments off gadget vectors."""

from __future__ import annotations

import math

import numpy as np

from .gadgets import (
    SQRT_HALF,
    Assignment,
    GramConstraintSystem,
    PartitionSplit,
    VectorAssignment,
    clause_label,
    constraint_residuals,
    csp_instance_from_system,
    max_residual,
    p_partner,
    partition_label,
    sum_label,
    var_label,
)


class DecodeError(RuntimeError):
    pass


class RepairError(RuntimeError):
    pass


def _plane_coordinates(x: np.ndarray, tol: float) -> tuple[np.ndarray, float]:
    """Coordinates of the rows of ``x`` in their best-fit plane through the origin."""
    if x.shape[1] == 2:
        return x, 0.0
    _, s, vt = np.linalg.svd(x, full_matrices=False)
    residual = float(np.sqrt(np.sum(s[2:] ** 2)))
    if residual > tol:
        raise DecodeError(f"vectors are not coplanar (out-of-plane residual {residual:.3e} > {tol:.1e})")
    return x @ vt[:2].T, residual


def decode_partition(sys: GramConstraintSystem, va: VectorAssignment, tol: float = 1e-9) -> PartitionSplit:
    """Split the items by the turning direction between consecutive first basis vectors.

    In dimension 3 the basis vectors are first projected to their common
    plane.  A global reflection swaps the split with its complement.
    """
    if sys.kind != "partition":
        raise ValueError(f"expected a partition system, got {sys.kind!r}")
    n = sys.params["n"]
    a = np.asarray(sys.params["normalized"], dtype=float)
    first = np.array([va[partition_label(i, 1)] for i in range(n)])
    second = np.array([va[partition_label(i, 2)] for i in range(n)])
    coords, plane_res = _plane_coordinates(np.vstack([first, second]), tol)
    p = coords[:n]
    q = np.roll(p, -1, axis=0)
    angle = np.arctan2(p[:, 0] * q[:, 1] - p[:, 1] * q[:, 0], np.einsum("ij,ij->i", p, q))
    ambiguous = np.flatnonzero((np.abs(angle) < 1e-12) & (a > tol))
    if len(ambiguous):
        raise DecodeError(f"rotation direction of item {ambiguous[0] + 1} is ambiguous")
    s = np.where(angle > 0, 1, -1)
    diagnostics = {
        "plane_residual": plane_res,
        "constraint_residual": max_residual(sys, va),
        "signed_sum": float(np.dot(s, a)),
        "angle_error": float(np.abs(np.abs(angle) - a).max()),
    }
    return PartitionSplit(frozenset(np.flatnonzero(s > 0).tolist()), diagnostics)


def _orthonormalize_sequential(basis: np.ndarray) -> np.ndarray:
    """Replace each vector by its normalized component orthogonal to all the others.

    Vector ``i`` is compared with the already-repaired vectors before it and
    the original vectors after it, so the output is exactly orthonormal.
    """
    out = basis.copy()
    m = len(basis)
    for i in range(m):
        others = np.delete(out, i, axis=0)
        q, _ = np.linalg.qr(others.T)
        v = out[i] - q @ (q.T @ out[i])
        norm = np.linalg.norm(v)
        if norm < 1e-8:
            raise RepairError(f"basis vector {i + 1} lies in the span of the others")
        out[i] = v / norm
    return out


def repair_internal(va: VectorAssignment, sys: GramConstraintSystem, eps: float | None = None,
                    rebuild_clauses: bool = True) -> VectorAssignment:
    """Restore the internal variable constraints exactly.

    Each block's ``2k`` basis vectors are re-orthonormalized in place and the
    sum/difference vectors are rebuilt from them; clause vectors are rebuilt
    as signed averages of the repaired blocks.  Raises :class:`RepairError`
    if any vector moves more than ``3 sqrt(eps)``, where ``eps`` defaults to
    the measured internal residual.
    """
    if sys.kind != "csp":
        raise ValueError(f"expected a csp system, got {sys.kind!r}")
    inst = csp_instance_from_system(sys)
    k = inst.k
    measured = max_residual(sys, va, "var_")
    if eps is None:
        eps = measured
    elif measured > eps * (1 + 1e-9) + 1e-15:
        raise ValueError(f"internal residual {measured:.3e} exceeds eps = {eps:.3e}")
    vec = {lab: va[lab].copy() for lab in sys.labels}
    for x in range(inst.n_vars + 1):
        basis = np.array([vec[var_label(x, i)] for i in range(1, 2 * k + 1)])
        g = basis @ basis.T
        if np.linalg.det(g) < 1e-6:
            raise RepairError(f"basis of block x{x} is numerically degenerate (Gram det {np.linalg.det(g):.2e})")
        fixed = _orthonormalize_sequential(basis)
        for i in range(1, 2 * k + 1):
            vec[var_label(x, i)] = fixed[i - 1]
            for j in range(i + 1, 2 * k + 1):
                vec[sum_label(x, i, j, 1)] = SQRT_HALF * (fixed[i - 1] + fixed[j - 1])
                vec[sum_label(x, i, j, -1)] = SQRT_HALF * (fixed[i - 1] - fixed[j - 1])
    if rebuild_clauses:
        inv = 1.0 / math.sqrt(k)
        vec[clause_label(0)] = inv * sum(vec[var_label(0, 2 * g - 1)] for g in range(1, k + 1))
        for j, clause in enumerate(inst.clauses, start=1):
            vec[clause_label(j)] = inv * sum(
                s * vec[var_label(v + 1, 2 * g)] for g, (v, s) in enumerate(clause, start=1)
            )
    out = VectorAssignment(va.labels, np.array([vec[lab] for lab in va.labels]))
    var_rows = [t for t, lab in enumerate(va.labels) if str(lab).startswith("x")]
    drift = np.linalg.norm(out.vectors[var_rows] - va.vectors[var_rows], axis=1).max(initial=0.0)
    if drift > 3 * math.sqrt(eps) + 1e-12:
        raise RepairError(f"repair moved a vector by {drift:.3e} > 3 sqrt(eps) = {3 * math.sqrt(eps):.3e}")
    return out


def soundness_thresholds(k: int) -> dict:
    return {
        "sign_delta": 1.0 / (12 * k),
        "clause_delta": min(2.0 / (13 * k * k), 2.0 / (24 * k + k * k)),
        "eps_regime": 1e-6 * k**-5,
    }


def decode_assignment(sys: GramConstraintSystem, va: VectorAssignment, eps: float | None = None) -> Assignment:
    """Repair, then set ``f(x) = sign(<x0:i1, x:i2>)``.

    Raises :class:`DecodeError` when the signs ``<x0:i, x:p(i)>`` disagree
    across odd ``i`` for some variable, which means the input error is too
    large for the gadget to pin the rotation.
    """
    inst = csp_instance_from_system(sys)
    k = inst.k
    if va.dim > 4 * k - 1:
        raise ValueError(f"ambient dimension {va.dim} exceeds 4k-1 = {4 * k - 1}")
    eps_measured = max_residual(sys, va)
    repaired = repair_internal(va, sys, eps)
    ext_res = np.abs(constraint_residuals(sys, repaired, "ext_var"))
    delta = float(ext_res.max(initial=0.0))
    values = np.ones(inst.n_vars, dtype=np.int64)
    magnitudes = []
    for v in range(inst.n_vars):
        dots = np.array([
            repaired[var_label(0, i)] @ repaired[var_label(v + 1, p_partner(i))] for i in range(1, 2 * k + 1, 2)
        ])
        signs = np.sign(dots)
        if np.any(signs == 0) or np.any(signs != signs[0]):
            raise DecodeError(f"variable {v + 1}: rotation signs disagree across planes ({dots.round(6).tolist()})")
        values[v] = int(signs[0])
        magnitudes.append(float(np.abs(dots).min()))
    clause_res = np.abs(constraint_residuals(sys, repaired, "clause_ext"))
    var_rows = [t for t, lab in enumerate(va.labels) if str(lab).startswith("x")]
    diff = repaired.vectors - va.vectors
    drift = np.linalg.norm(diff, axis=1)
    thresholds = soundness_thresholds(k)
    diagnostics = {
        "eps_measured": eps_measured,
        "external_delta": delta,
        "magnitudes": magnitudes,
        "magnitude_floor": 1 - 12 * delta * k,
        "clause_residuals": clause_res.tolist(),
        "max_vector_drift": float(drift[var_rows].max(initial=0.0)),
        "max_clause_drift": float(np.delete(drift, var_rows).max(initial=0.0)),
        **thresholds,
    }
    return Assignment(values, diagnostics)

"""Inner-product constraint systems for the PSD completion reductions.

A partial PSD matrix is the same thing as a list of constraints
``<u_a, u_b> = target`` on Gram vectors; the reductions here emit such lists
for Partition and for Exact-one-in-k-SAT, together with the explicit vector
solutions that exist when the source instance is solvable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from .matrix import PartialMatrix

SQRT_HALF = 1.0 / math.sqrt(2.0)


class UnsatisfiedInstanceError(ValueError):
    pass


# -- core containers ---------------------------------------------------------


@dataclass(frozen=True)
class GramConstraintSystem:
    """Labeled vectors plus constraints ``(label_a, label_b, target)``.

    ``families`` tags each constraint with the block of the reduction it
    belongs to (e.g. ``"var_orth"``); it is carried for diagnostics only.
    """

    kind: str
    labels: tuple
    constraints: tuple
    params: dict = field(default_factory=dict, compare=False)
    families: tuple = field(default=(), compare=False)

    def __post_init__(self):
        labels = tuple(self.labels)
        index = {lab: t for t, lab in enumerate(labels)}
        if len(index) != len(labels):
            raise ValueError("labels must be unique")
        canon = []
        for a, b, target in self.constraints:
            if a not in index or b not in index:
                raise KeyError(f"constraint references unknown label {a if a not in index else b!r}")
            target = float(target)
            if not math.isfinite(target):
                raise ValueError("constraint targets must be finite")
            if index[a] > index[b]:
                a, b = b, a
            canon.append((a, b, target))
        families = tuple(self.families) if self.families else ("",) * len(canon)
        if len(families) != len(canon):
            raise ValueError("families must align with constraints")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "constraints", tuple(canon))
        object.__setattr__(self, "families", families)
        object.__setattr__(self, "_index", index)

    def __len__(self):
        return len(self.constraints)

    def index(self, label) -> int:
        return self._index[label]

    def arrays(self, family: str | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Label-index pairs and targets, optionally restricted to one family (prefix match)."""
        sel = [
            t for t, fam in enumerate(self.families) if family is None or fam.startswith(family)
        ]
        ia = np.array([self._index[self.constraints[t][0]] for t in sel], dtype=np.int64)
        ib = np.array([self._index[self.constraints[t][1]] for t in sel], dtype=np.int64)
        tg = np.array([self.constraints[t][2] for t in sel], dtype=float)
        return ia, ib, tg

    def family_counts(self) -> dict:
        out: dict = {}
        for fam in self.families:
            out[fam] = out.get(fam, 0) + 1
        return out


@dataclass(frozen=True)
class VectorAssignment:
    """One vector per label, stored as rows of ``vectors`` (``N x dim``)."""

    labels: tuple
    vectors: np.ndarray

    def __post_init__(self):
        vec = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        labels = tuple(self.labels)
        if vec.shape[0] != len(labels):
            raise ValueError(f"{len(labels)} labels but {vec.shape[0]} vectors")
        if not np.all(np.isfinite(vec)):
            raise ValueError("vectors must be finite")
        vec.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "vectors", vec)
        object.__setattr__(self, "_index", {lab: t for t, lab in enumerate(labels)})

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __getitem__(self, label) -> np.ndarray:
        return self.vectors[self._index[label]]

    def as_dict(self) -> dict:
        return {lab: self.vectors[t] for t, lab in enumerate(self.labels)}

    def aligned(self, sys: GramConstraintSystem) -> np.ndarray:
        """Vectors reordered to ``sys.labels``."""
        missing = [lab for lab in sys.labels if lab not in self._index]
        if missing:
            raise KeyError(f"assignment lacks label {missing[0]!r}")
        return self.vectors[[self._index[lab] for lab in sys.labels]]

    def gram(self) -> np.ndarray:
        return self.vectors @ self.vectors.T

    def transformed(self, q: np.ndarray) -> "VectorAssignment":
        """Apply ``x -> q @ x`` to every vector (``q`` may map into a larger space)."""
        return VectorAssignment(self.labels, self.vectors @ np.asarray(q, dtype=float).T)

    def embedded(self, dim: int, seed=None) -> "VectorAssignment":
        """Pad with zero coordinates up to ``dim`` and apply a random orthogonal map."""
        if dim < self.dim:
            raise ValueError("cannot embed into a smaller dimension")
        rng = np.random.default_rng(seed)
        q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
        padded = np.hstack([self.vectors, np.zeros((len(self.labels), dim - self.dim))])
        return VectorAssignment(self.labels, padded @ q.T)

    def perturbed(self, eps: float, seed=None) -> "VectorAssignment":
        """Move every vector by a random offset of norm exactly ``eps / 3``.

        Unit-norm-scale vectors then satisfy each inner-product constraint
        they satisfied before to within ``eps``.
        """
        rng = np.random.default_rng(seed)
        noise = rng.standard_normal(self.vectors.shape)
        noise /= np.linalg.norm(noise, axis=1, keepdims=True)
        return VectorAssignment(self.labels, self.vectors + noise * (eps / 3.0))


def constraint_residuals(sys: GramConstraintSystem, va: VectorAssignment, family: str | None = None) -> np.ndarray:
    """Signed residuals ``<u_a, u_b> - target``."""
    x = va.aligned(sys)
    ia, ib, tg = sys.arrays(family)
    return np.einsum("ij,ij->i", x[ia], x[ib]) - tg


def max_residual(sys: GramConstraintSystem, va: VectorAssignment, family: str | None = None) -> float:
    res = constraint_residuals(sys, va, family)
    return float(np.abs(res).max(initial=0.0))


# -- Partition ---------------------------------------------------------------


def _to_fraction(w) -> Fraction:
    if isinstance(w, Fraction):
        return w
    if isinstance(w, (int, np.integer)):
        return Fraction(int(w))
    if isinstance(w, str):
        return Fraction(w)
    return Fraction(float(w))


@dataclass(frozen=True)
class PartitionInstance:
    """Positive weights ``a_1..a_n``; geometry uses the weights scaled to sum 1."""

    weights: tuple

    def __post_init__(self):
        w = tuple(_to_fraction(x) for x in self.weights)
        if len(w) < 2:
            raise ValueError("a Partition instance needs at least two weights")
        if any(x <= 0 for x in w):
            raise ValueError("weights must be positive")
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def scale(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    @property
    def normalized(self) -> tuple:
        s = self.scale
        return tuple(x / s for x in self.weights)

    def normalized_float(self) -> np.ndarray:
        return np.array([float(x) for x in self.normalized])


@dataclass(frozen=True)
class PartitionSplit:
    """Index set ``I`` (0-based) of one side of a partition."""

    in_set: frozenset
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "in_set", frozenset(int(i) for i in self.in_set))

    def signs(self, n: int) -> np.ndarray:
        s = -np.ones(n, dtype=np.int64)
        s[list(self.in_set)] = 1
        return s

    def imbalance(self, inst: PartitionInstance) -> Fraction:
        """``sum_I a - sum_notI a`` on the normalized weights, exactly."""
        w = inst.normalized
        return sum((w[i] if i in self.in_set else -w[i] for i in range(inst.n)), Fraction(0))

    def is_balanced(self, inst: PartitionInstance) -> bool:
        return self.imbalance(inst) == 0

    def complement(self, n: int) -> "PartitionSplit":
        return PartitionSplit(frozenset(range(n)) - self.in_set)


def partition_label(i: int, t: int) -> str:
    return f"a{i + 1}:{t}"


def partition_gadget(inst: PartitionInstance) -> GramConstraintSystem:
    """Three unit vectors per weight; consecutive bases rotated by angle ``a_i`` (cyclically)."""
    n = inst.n
    a = inst.normalized_float()
    labels = [partition_label(i, t) for i in range(n) for t in (1, 2, 3)]
    cons, fams = [], []

    def add(x, y, target, fam):
        cons.append((x, y, target))
        fams.append(fam)

    for lab in labels:
        add(lab, lab, 1.0, "unit")
    for i in range(n):
        add(partition_label(i, 1), partition_label(i, 2), 0.0, "orth")
    for i in range(n):
        add(partition_label(i, 3), partition_label(i, 1), SQRT_HALF, "sum")
        add(partition_label(i, 3), partition_label(i, 2), SQRT_HALF, "sum")
    for i in range(n):
        j = (i + 1) % n
        for t in (1, 2, 3):
            add(partition_label(i, t), partition_label(j, t), math.cos(a[i]), "rotation")
    params = {
        "n": n,
        "weights": [str(x) for x in inst.weights],
        "normalized": a.tolist(),
        "scale": str(inst.scale),
    }
    return GramConstraintSystem("partition", labels, cons, params, fams)


def partition_completeness(inst: PartitionInstance, split: PartitionSplit) -> VectorAssignment:
    """Planar vectors realising a balanced split.

    Basis ``i`` is the rotation by ``theta_i`` of the standard basis, with
    ``theta_i`` the signed prefix sum of the weights before ``i``.
    """
    residue = split.imbalance(inst)
    if residue != 0:
        raise UnsatisfiedInstanceError(f"split is not balanced (imbalance {residue})")
    a = inst.normalized_float()
    s = split.signs(inst.n)
    theta = np.concatenate([[0.0], np.cumsum(s * a)[:-1]])
    labels, vecs = [], []
    for i, th in enumerate(theta):
        e1 = np.array([math.cos(th), math.sin(th)])
        e2 = np.array([-math.sin(th), math.cos(th)])
        for t, v in ((1, e1), (2, e2), (3, SQRT_HALF * (e1 + e2))):
            labels.append(partition_label(i, t))
            vecs.append(v)
    return VectorAssignment(labels, np.array(vecs))


# -- Exact-one-in-k-SAT --------------------------------------------------------


@dataclass(frozen=True)
class OneInKSatInstance:
    """Clauses of ``k`` signed literals ``(var, sign)``; variables are ``0..n_vars-1``.

    A clause is satisfied when exactly one literal ``sign * x_var`` equals ``-1``.
    """

    k: int
    n_vars: int
    clauses: tuple

    def __post_init__(self):
        if self.k < 3:
            raise ValueError("clause width k must be at least 3")
        cl = []
        for c in self.clauses:
            lits = tuple((int(v), int(s)) for v, s in c)
            if len(lits) != self.k:
                raise ValueError(f"clause {lits} does not have exactly {self.k} literals")
            if len({v for v, _ in lits}) != self.k:
                raise ValueError(f"clause {lits} repeats a variable")
            if any(not 0 <= v < self.n_vars for v, _ in lits):
                raise IndexError(f"clause {lits} references a variable out of range")
            if any(s not in (1, -1) for _, s in lits):
                raise ValueError("literal signs must be +1 or -1")
            cl.append(lits)
        object.__setattr__(self, "clauses", tuple(cl))

    @property
    def m(self) -> int:
        return len(self.clauses)

    def clause_sum(self, values, j: int) -> int:
        return sum(s * int(values[v]) for v, s in self.clauses[j])

    def violated_clause(self, values) -> int | None:
        for j in range(self.m):
            if self.clause_sum(values, j) != self.k - 2:
                return j
        return None


@dataclass(frozen=True)
class Assignment:
    values: np.ndarray
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.int64).reshape(-1)
        if np.any((v != 1) & (v != -1)):
            raise ValueError("assignment values must be +1 or -1")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __eq__(self, other):
        return isinstance(other, Assignment) and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash(self.values.tobytes())

    def satisfies(self, inst: OneInKSatInstance) -> bool:
        return len(self.values) == inst.n_vars and inst.violated_clause(self.values) is None


def p_partner(i: int) -> int:
    """Pairing ``1<->2, 3<->4, ...`` on 1-based basis indices."""
    return i + 1 if i % 2 == 1 else i - 1


def var_label(x: int, i: int) -> str:
    """Basis vector ``i`` (1-based) of variable block ``x`` (``x = 0`` is the reference)."""
    return f"x{x}:i{i}"


def sum_label(x: int, i: int, j: int, sign: int) -> str:
    return f"x{x}:s({i},{j},{'+' if sign > 0 else '-'})"


def clause_label(j: int) -> str:
    return f"C{j}"


def csp_block_labels(x: int, k: int) -> list:
    labs = [var_label(x, i) for i in range(1, 2 * k + 1)]
    for i, j in combinations(range(1, 2 * k + 1), 2):
        labs.append(sum_label(x, i, j, 1))
        labs.append(sum_label(x, i, j, -1))
    return labs


def csp_gadget(inst: OneInKSatInstance, rotation_coupling: bool = False) -> GramConstraintSystem:
    """Variable and clause gadgets for Exact-one-in-k-SAT.

    Block ``x0`` is the reference basis; block ``x{v+1}`` encodes variable
    ``v``.  ``rotation_coupling`` adds ``<x0:s(i,j,-), x:s(p(i),p(j),+)> = 0``
    for odd ``i < j``, which ties the rotation magnitudes of different
    2-planes of a block together.
    """
    k, n = inst.k, inst.n_vars
    two_k = 2 * k
    inv_sqrt_k = 1.0 / math.sqrt(k)
    labels = []
    for x in range(n + 1):
        labels.extend(csp_block_labels(x, k))
    labels.extend(clause_label(j) for j in range(inst.m + 1))
    cons, fams = [], []

    def add(a, b, target, fam):
        cons.append((a, b, target))
        fams.append(fam)

    for x in range(n + 1):
        for lab in csp_block_labels(x, k):
            add(lab, lab, 1.0, "var_unit")
        for i, j in combinations(range(1, two_k + 1), 2):
            add(var_label(x, i), var_label(x, j), 0.0, "var_orth")
        for i, j in combinations(range(1, two_k + 1), 2):
            add(sum_label(x, i, j, 1), var_label(x, i), SQRT_HALF, "var_sum")
            add(sum_label(x, i, j, 1), var_label(x, j), SQRT_HALF, "var_sum")
            add(sum_label(x, i, j, -1), var_label(x, i), SQRT_HALF, "var_sum")
            add(sum_label(x, i, j, -1), var_label(x, j), -SQRT_HALF, "var_sum")
    odd = range(1, two_k + 1, 2)
    for x in range(1, n + 1):
        for i in range(1, two_k + 1):
            for j in range(1, two_k + 1):
                if j != p_partner(i):
                    add(var_label(0, i), var_label(x, j), 0.0, "ext_var")
        for i in odd:
            add(sum_label(0, i, p_partner(i), 1), sum_label(x, i, p_partner(i), 1), 0.0, "ext_var_pair")
        if rotation_coupling:
            for i, j in combinations(odd, 2):
                add(sum_label(0, i, j, -1), sum_label(x, p_partner(i), p_partner(j), 1), 0.0, "ext_var_couple")
    if n >= 1:
        for i, j in combinations(odd, 2):
            add(sum_label(0, i, j, 1), sum_label(0, i, j, -1), 0.0, "ext_ref")
    add(clause_label(0), clause_label(0), 1.0, "clause_int")
    for g in range(1, k + 1):
        add(clause_label(0), var_label(0, 2 * g - 1), inv_sqrt_k, "clause_int")
    for j, clause in enumerate(inst.clauses, start=1):
        add(clause_label(j), clause_label(j), 1.0, "clause_int")
        for g, (v, s) in enumerate(clause, start=1):
            add(clause_label(j), var_label(v + 1, 2 * g), s * inv_sqrt_k, "clause_int")
    for j in range(1, inst.m + 1):
        add(clause_label(0), clause_label(j), 1.0 - 2.0 / k, "clause_ext")
    params = {
        "k": k,
        "n_vars": n,
        "clauses": [[[v, s] for v, s in c] for c in inst.clauses],
        "rotation_coupling": rotation_coupling,
    }
    return GramConstraintSystem("csp", labels, cons, params, fams)


def csp_instance_from_system(sys: GramConstraintSystem) -> OneInKSatInstance:
    p = sys.params
    return OneInKSatInstance(p["k"], p["n_vars"], tuple(tuple(map(tuple, c)) for c in p["clauses"]))


def partition_instance_from_system(sys: GramConstraintSystem) -> PartitionInstance:
    return PartitionInstance(tuple(Fraction(w) for w in sys.params["weights"]))


def _fill_block(vec: dict, x: int, k: int, basis: np.ndarray) -> None:
    for i in range(1, 2 * k + 1):
        vec[var_label(x, i)] = basis[i - 1]
    for i, j in combinations(range(1, 2 * k + 1), 2):
        vec[sum_label(x, i, j, 1)] = SQRT_HALF * (basis[i - 1] + basis[j - 1])
        vec[sum_label(x, i, j, -1)] = SQRT_HALF * (basis[i - 1] - basis[j - 1])


def csp_completeness(inst: OneInKSatInstance, f: Assignment, rotation_coupling: bool = False) -> VectorAssignment:
    """Vectors in dimension ``2k`` that satisfy every gadget constraint for a satisfying ``f``."""
    bad = inst.violated_clause(f.values) if len(f.values) == inst.n_vars else -1
    if bad == -1:
        raise ValueError(f"assignment has {len(f.values)} values, instance has {inst.n_vars} variables")
    if bad is not None:
        total = inst.clause_sum(f.values, bad)
        raise UnsatisfiedInstanceError(
            f"clause {bad + 1} {inst.clauses[bad]} has signed sum {total}, needs {inst.k - 2}"
        )
    k = inst.k
    eye = np.eye(2 * k)
    vec: dict = {}
    _fill_block(vec, 0, k, eye)
    for v in range(inst.n_vars):
        fx = float(f.values[v])
        basis = np.empty((2 * k, 2 * k))
        for i in range(1, 2 * k + 1):
            # u_(x, p(i)) = +f e_i for odd i, -f e_i for even i
            basis[p_partner(i) - 1] = (fx if i % 2 == 1 else -fx) * eye[i - 1]
        _fill_block(vec, v + 1, k, basis)
    inv = 1.0 / math.sqrt(k)
    vec[clause_label(0)] = inv * sum(vec[var_label(0, 2 * g - 1)] for g in range(1, k + 1))
    for j, clause in enumerate(inst.clauses, start=1):
        vec[clause_label(j)] = inv * sum(s * vec[var_label(v + 1, 2 * g)] for g, (v, s) in enumerate(clause, start=1))
    labels = [lab for x in range(inst.n_vars + 1) for lab in csp_block_labels(x, k)]
    labels += [clause_label(j) for j in range(inst.m + 1)]
    return VectorAssignment(labels, np.array([vec[lab] for lab in labels]))


# -- amplification and matrix view ---------------------------------------------


def block_label(t: int, label) -> str:
    return f"b{t}/{label}"


def amplify_block_diagonal(obj, copies: int):
    """Disjoint copies along the diagonal, every cross-block entry a revealed zero."""
    if copies < 1:
        raise ValueError("copies must be >= 1")
    if copies == 1:
        return obj
    if isinstance(obj, PartialMatrix):
        n = obj.n
        rows = [obj.rows + t * n for t in range(copies)]
        cols = [obj.cols + t * n for t in range(copies)]
        vals = [obj.vals for _ in range(copies)]
        i, j = np.triu_indices(n * copies)
        cross = (i // n) != (j // n)
        rows.append(i[cross])
        cols.append(j[cross])
        vals.append(np.zeros(int(cross.sum())))
        return PartialMatrix(n * copies, obj.c, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals))
    if isinstance(obj, GramConstraintSystem):
        labels, cons, fams = [], [], []
        for t in range(copies):
            labels.extend(block_label(t, lab) for lab in obj.labels)
            for (a, b, target), fam in zip(obj.constraints, obj.families):
                cons.append((block_label(t, a), block_label(t, b), target))
                fams.append(fam)
        for s, t in combinations(range(copies), 2):
            for a in obj.labels:
                for b in obj.labels:
                    cons.append((block_label(s, a), block_label(t, b), 0.0))
                    fams.append("cross")
        params = dict(obj.params, copies=copies, base_kind=obj.kind)
        return GramConstraintSystem(obj.kind, labels, cons, params, fams)
    raise TypeError(f"cannot amplify {type(obj).__name__}")


def amplify_assignment(va: VectorAssignment, copies: int) -> VectorAssignment:
    """Block copies of ``va`` placed in mutually orthogonal coordinate blocks."""
    if copies == 1:
        return va
    n, d = va.vectors.shape
    out = np.zeros((n * copies, d * copies))
    labels = []
    for t in range(copies):
        out[t * n:(t + 1) * n, t * d:(t + 1) * d] = va.vectors
        labels.extend(block_label(t, lab) for lab in va.labels)
    return VectorAssignment(labels, out)


def gram_system_to_partial(sys: GramConstraintSystem) -> PartialMatrix:
    """Partial matrix whose revealed entries are exactly the constraint targets."""
    entries: dict = {}
    for a, b, target in sys.constraints:
        key = (sys.index(a), sys.index(b))
        if key in entries and entries[key] != target:
            raise ValueError(f"conflicting targets {entries[key]} and {target} for ({a}, {b})")
        entries[key] = target
    c = max((abs(v) for v in entries.values()), default=0.0)
    return PartialMatrix.from_entries(len(sys.labels), entries, c=c if c > 0 else 1.0)


# -- planted instances -----------------------------------------------------------


def random_partitionable(n: int, seed=None, max_num: int = 20, max_den: int = 6) -> tuple[PartitionInstance, PartitionSplit]:
    """Random positive rational weights with a planted equal-sum split ``I`` (item 0 in ``I``)."""
    if n < 2:
        raise ValueError("need n >= 2")
    rng = np.random.default_rng(seed)
    while True:
        w = [Fraction(int(rng.integers(1, max_num + 1)), int(rng.integers(1, max_den + 1))) for _ in range(n - 1)]
        side = rng.integers(0, 2, size=n - 1).astype(bool)
        side[0] = True
        diff = sum((x if s else -x for x, s in zip(w, side)), Fraction(0))
        if diff == 0:
            continue
        # the last item goes on whichever side is lighter
        w.append(abs(diff))
        in_set = [i for i in range(n - 1) if side[i]] + ([n - 1] if diff < 0 else [])
        perm = rng.permutation(n - 1) + 1
        perm = np.concatenate([[0], perm])
        weights = tuple(w[p] for p in perm)
        where = {int(p): t for t, p in enumerate(perm)}
        split = PartitionSplit(frozenset(where[i] for i in in_set))
        inst = PartitionInstance(weights)
        assert split.is_balanced(inst)
        return inst, split


def planted_one_in_k(k: int, n_vars: int, m: int, seed=None) -> tuple[OneInKSatInstance, Assignment]:
    """Random clauses over distinct variables, each with exactly one literal false under a planted ``f``."""
    if n_vars < k:
        raise ValueError("need at least k variables")
    rng = np.random.default_rng(seed)
    f = rng.choice([-1, 1], size=n_vars)
    clauses = []
    for _ in range(m):
        vs = rng.choice(n_vars, size=k, replace=False)
        neg = int(rng.integers(k))
        clauses.append(tuple((int(v), int(-f[v] if t == neg else f[v])) for t, v in enumerate(vs)))
    inst = OneInKSatInstance(k, n_vars, tuple(clauses))
    out = Assignment(f)
    assert out.satisfies(inst)
    return inst, out

"""Text and JSON file formats.

Text formats are line-oriented; lines starting with ``c`` or ``#`` are
comments.  Indices are 1-based on disk and 0-based in memory.  Every parse
failure raises :class:`ParseError` carrying the offending line number.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .gadgets import Assignment, GramConstraintSystem, OneInKSatInstance, PartitionInstance, PartitionSplit, VectorAssignment
from .graphs import Coloring, Graph
from .matrix import Factorization, PartialMatrix


class ParseError(ValueError):
    def __init__(self, path, line: int | None, msg: str):
        self.path = str(path)
        self.line = line
        where = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{where}: {msg}")


def _lines(path):
    """Non-blank, non-comment lines as ``(line_number, tokens)``."""
    with open(path) as fh:
        for no, raw in enumerate(fh, start=1):
            tok = raw.split()
            if not tok or tok[0] in ("c", "#") or tok[0].startswith("#"):
                continue
            yield no, tok


def _num(path, no, tok, kind=float):
    try:
        return kind(tok)
    except ValueError:
        raise ParseError(path, no, f"expected {kind.__name__}, got {tok!r}") from None


def _header(path, it, magic: str, count: int):
    try:
        no, tok = next(it)
    except StopIteration:
        raise ParseError(path, None, f"empty file, expected '{magic}' header") from None
    if tok[0] != magic or len(tok) != count + 1:
        raise ParseError(path, no, f"expected header '{magic}' with {count} fields, got {' '.join(tok)!r}")
    return no, tok[1:]


def _write(path, text: str) -> None:
    Path(path).write_text(text)


def _fmt(x: float) -> str:
    return repr(float(x))


# -- partial matrices: PMX v1 ------------------------------------------------


def write_pmx(path, pm: PartialMatrix, provenance: str | None = None) -> None:
    out = []
    if provenance:
        out += [f"c {line}" for line in provenance.splitlines()]
    out.append(f"pmx {pm.n} {_fmt(pm.c)} {pm.n_canonical}")
    out += [f"{i + 1} {j + 1} {_fmt(v)}" for i, j, v in zip(pm.rows, pm.cols, pm.vals)]
    _write(path, "\n".join(out) + "\n")


def read_pmx(path) -> PartialMatrix:
    it = _lines(path)
    no, (n, c, cnt) = _header(path, it, "pmx", 3)
    n, c, cnt = _num(path, no, n, int), _num(path, no, c), _num(path, no, cnt, int)
    rows, cols, vals = [], [], []
    for no, tok in it:
        if len(tok) != 3:
            raise ParseError(path, no, "expected 'i j value'")
        i, j, v = _num(path, no, tok[0], int), _num(path, no, tok[1], int), _num(path, no, tok[2])
        if not (1 <= i <= j <= n):
            raise ParseError(path, no, f"entry ({i}, {j}) must satisfy 1 <= i <= j <= {n}")
        rows.append(i - 1)
        cols.append(j - 1)
        vals.append(v)
    if len(rows) != cnt:
        raise ParseError(path, None, f"header promises {cnt} entries, found {len(rows)}")
    try:
        return PartialMatrix(n, c, np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64), np.array(vals))
    except ValueError as e:
        raise ParseError(path, None, str(e)) from None


# -- dense matrices: DMX --------------------------------------------------------


def write_dmx(path, m) -> None:
    m = np.atleast_2d(np.asarray(m, dtype=float))
    out = [f"dmx {m.shape[0]} {m.shape[1]}"]
    out += [" ".join(_fmt(x) for x in row) for row in m]
    _write(path, "\n".join(out) + "\n")


def read_dmx(path) -> np.ndarray:
    it = _lines(path)
    no, (r, c) = _header(path, it, "dmx", 2)
    r, c = _num(path, no, r, int), _num(path, no, c, int)
    vals = []
    last = no
    for no, tok in it:
        vals += [_num(path, no, t) for t in tok]
        last = no
    if len(vals) != r * c:
        raise ParseError(path, last, f"expected {r * c} values, found {len(vals)}")
    return np.array(vals, dtype=float).reshape(r, c)


# -- factorizations: FAC v1 ------------------------------------------------


def write_fac(path, fac: Factorization) -> None:
    n, r = fac.u.shape
    out = [f"fac {n} {r}"]
    out += [" ".join(_fmt(x) for x in row) for row in fac.u]
    out += [" ".join(_fmt(x) for x in row) for row in fac.v]
    _write(path, "\n".join(out) + "\n")


def read_fac(path) -> Factorization:
    it = _lines(path)
    no, (n, r) = _header(path, it, "fac", 2)
    n, r = _num(path, no, n, int), _num(path, no, r, int)
    rows = []
    for no, tok in it:
        if len(tok) != r:
            raise ParseError(path, no, f"expected {r} coordinates, got {len(tok)}")
        rows.append([_num(path, no, t) for t in tok])
    if len(rows) != 2 * n:
        raise ParseError(path, None, f"expected {2 * n} rows (u then v), found {len(rows)}")
    a = np.array(rows, dtype=float).reshape(2 * n, r)
    return Factorization(a[:n], a[n:])


# -- graphs: DIMACS ------------------------------------------------------------


def write_dimacs(path, g: Graph, comment: str | None = None) -> None:
    out = [f"c {line}" for line in comment.splitlines()] if comment else []
    out.append(f"p edge {g.n} {g.m}")
    out += [f"e {i + 1} {j + 1}" for i, j in g.edges]
    _write(path, "\n".join(out) + "\n")


def read_dimacs(path) -> Graph:
    n = None
    declared = 0
    edges = []
    for no, tok in _lines(path):
        if tok[0] == "p":
            if n is not None:
                raise ParseError(path, no, "duplicate 'p' line")
            if len(tok) != 4 or tok[1] not in ("edge", "col"):
                raise ParseError(path, no, "expected 'p edge n m'")
            n, declared = _num(path, no, tok[2], int), _num(path, no, tok[3], int)
        elif tok[0] == "e":
            if n is None:
                raise ParseError(path, no, "edge before 'p' line")
            if len(tok) != 3:
                raise ParseError(path, no, "expected 'e i j'")
            i, j = _num(path, no, tok[1], int), _num(path, no, tok[2], int)
            if not (1 <= i <= n and 1 <= j <= n) or i == j:
                raise ParseError(path, no, f"invalid edge ({i}, {j}) for n = {n}")
            edges.append((i - 1, j - 1))
        else:
            raise ParseError(path, no, f"unknown line type {tok[0]!r}")
    if n is None:
        raise ParseError(path, None, "missing 'p edge n m' line")
    g = Graph(n, tuple(edges))
    if declared != g.m and declared != len(edges):
        raise ParseError(path, None, f"header declares {declared} edges, found {len(edges)}")
    return g


# -- JSON ----------------------------------------------------------------------------


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as e:
        raise ParseError(path, e.lineno, e.msg) from None


def dump_json(obj, path=None) -> str:
    text = json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n"
    if path is not None:
        _write(path, text)
    return text


def _json_default(x):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (Fraction, Path)):
        return str(x)
    if isinstance(x, (set, frozenset)):
        return sorted(x)
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


def coloring_to_json(f: Coloring) -> dict:
    return {"k": int(f.k), "colors": [int(c) + 1 for c in f.colors]}


def read_coloring(path) -> Coloring:
    d = _load_json(path)
    try:
        return Coloring(int(d["k"]), np.array(d["colors"], dtype=np.int64) - 1)
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(path, None, f"bad coloring: {e}") from None


def system_to_json(sys: GramConstraintSystem) -> dict:
    return {
        "kind": sys.kind,
        "params": sys.params,
        "labels": list(sys.labels),
        "constraints": [[a, b, t] for a, b, t in sys.constraints],
        "families": list(sys.families),
    }


def read_system(path) -> GramConstraintSystem:
    d = _load_json(path)
    try:
        return GramConstraintSystem(
            d["kind"],
            tuple(d["labels"]),
            tuple(tuple(c) for c in d["constraints"]),
            d.get("params", {}),
            tuple(d.get("families", ())),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(path, None, f"bad constraint system: {e}") from None


def read_partition(path) -> PartitionInstance:
    """A JSON array of weights (numbers or fraction strings like ``"1/3"``), or ``{"weights": [...]}``."""
    d = _load_json(path)
    w = d["weights"] if isinstance(d, dict) else d
    try:
        return PartitionInstance(tuple(Fraction(x) if isinstance(x, str) else x for x in w))
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise ParseError(path, None, f"bad weights: {e}") from None


def partition_to_json(inst: PartitionInstance) -> list:
    return [str(w) for w in inst.weights]


def write_eoks(path, inst: OneInKSatInstance, comment: str | None = None) -> None:
    out = [f"c {line}" for line in comment.splitlines()] if comment else []
    out.append(f"p eoks {inst.k} {inst.n_vars} {inst.m}")
    out += [" ".join(str(s * (v + 1)) for v, s in c) + " 0" for c in inst.clauses]
    _write(path, "\n".join(out) + "\n")


def read_eoks(path) -> OneInKSatInstance:
    """``p eoks k n m`` then one clause per line of signed 1-based literals, optionally 0-terminated."""
    it = _lines(path)
    no, (fmt, k, n, m) = _header(path, it, "p", 4)
    if fmt != "eoks":
        raise ParseError(path, no, f"expected format 'eoks', got {fmt!r}")
    k, n, m = _num(path, no, k, int), _num(path, no, n, int), _num(path, no, m, int)
    clauses = []
    for no, tok in it:
        lits = [_num(path, no, t, int) for t in tok]
        if lits and lits[-1] == 0:
            lits.pop()
        if len(lits) != k or any(x == 0 or abs(x) > n for x in lits):
            raise ParseError(path, no, f"expected {k} nonzero literals in [-{n}, {n}]")
        clauses.append(tuple((abs(x) - 1, 1 if x > 0 else -1) for x in lits))
    if len(clauses) != m:
        raise ParseError(path, None, f"header declares {m} clauses, found {len(clauses)}")
    try:
        return OneInKSatInstance(k, n, tuple(clauses))
    except (ValueError, IndexError) as e:
        raise ParseError(path, None, str(e)) from None


def assignment_to_json(va: VectorAssignment) -> dict:
    return {"labels": list(va.labels), "vectors": va.vectors.tolist()}


def read_assignment(path) -> VectorAssignment:
    d = _load_json(path)
    try:
        return VectorAssignment(tuple(d["labels"]), np.array(d["vectors"], dtype=float))
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(path, None, f"bad vector assignment: {e}") from None


def solution_to_json(sol, diagnostics: dict | None = None) -> dict:
    """Decoded solution: ``{"kind", "value", "diagnostics"}``; values are 1-based / +-1."""
    if isinstance(sol, PartitionSplit):
        kind, value = "partition", sorted(i + 1 for i in sol.in_set)
    elif isinstance(sol, Assignment):
        kind, value = "assignment", [int(x) for x in sol.values]
    else:
        raise TypeError(f"cannot serialise {type(sol).__name__}")
    return {"kind": kind, "value": value, "diagnostics": diagnostics if diagnostics is not None else sol.diagnostics}

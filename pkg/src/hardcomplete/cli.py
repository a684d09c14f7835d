"""``hardcomplete`` command line: reduce, complete, factorize, decode, roundtrip, verify, generate.

Every command prints one JSON report (sorted keys) to stdout.  The exit
code is 0 only when every check in the report passed; 1 when a check or a
pipeline stage failed; 2 for unreadable input.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import io as fio
from .decoders import (
    ConeRoundingParams,
    DecodingError,
    NetColoringParams,
    coloring_color_bound,
    decode_coloring,
    filter_accurate_submatrix,
    independent_set_bound,
    independent_set_trials,
)
from .factorize import bounded_factorize
from .gadgets import (
    amplify_block_diagonal,
    constraint_residuals,
    csp_completeness,
    csp_gadget,
    max_residual,
    partition_completeness,
    partition_gadget,
    partition_instance_from_system,
    csp_instance_from_system,
    planted_one_in_k,
    random_partitionable,
)
from .graphs import Coloring, balance_by_copies, completion_from_coloring, graph_to_partial, pad_partial, planted_graph
from .matrix import Factorization, coherence, consistency, numerical_rank
from .oracles import BACKEND, brute_coloring, brute_one_in_k, brute_partition
from .psd_decoders import decode_assignment, decode_partition
from .solvers import SolverConfig, complete_bounded_rank, solve_gram_system

log = logging.getLogger("hardcomplete")


class StageError(RuntimeError):
    def __init__(self, stage: str, msg: str):
        self.stage = stage
        super().__init__(f"{stage}: {msg}")


class Report(dict):
    """Measured quantities plus a ``checks`` table of named booleans."""

    def __init__(self, command: str, **inputs):
        super().__init__(command=command, inputs=inputs, checks={})

    def check(self, name: str, ok) -> bool:
        self["checks"][name] = bool(ok)
        return bool(ok)

    @property
    def ok(self) -> bool:
        return all(self["checks"].values()) and "failed_stage" not in self


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("HARDCOMPLETE_SEED")
    return int(env) if env else 0


# -- generate --------------------------------------------------------------------


def cmd_generate(args, rep: Report) -> None:
    seed = rep["inputs"]["seed"]
    out = Path(args.output)
    if args.kind == "graph":
        g, f = planted_graph(args.n, args.k, args.p, seed=seed)
        fio.write_dimacs(out, g, comment=f"planted {args.k}-colorable graph, p={args.p}, seed={seed}")
        fio.dump_json(fio.coloring_to_json(f), out.with_suffix(".coloring.json"))
        rep.update(n=g.n, m=g.m)
    elif args.kind == "partition":
        inst, split = random_partitionable(args.n, seed=seed)
        fio.dump_json({"weights": fio.partition_to_json(inst)}, out)
        rep.update(n=inst.n, planted=sorted(i + 1 for i in split.in_set))
    else:
        inst, f = planted_one_in_k(args.k, args.n, args.m, seed=seed)
        fio.write_eoks(out, inst, comment=f"planted exact-one-in-{args.k}, seed={seed}")
        rep.update(n_vars=inst.n_vars, m=inst.m, planted=f.values.tolist())
    rep["output"] = str(out)
    rep.check("written", out.exists())


# -- reduce ----------------------------------------------------------------------------


def cmd_reduce(args, rep: Report) -> None:
    out = Path(args.output)
    prov = f"hardcomplete reduce {args.kind} {args.input} pad={args.pad} amplify={args.amplify}"
    if args.kind == "graph":
        g = fio.read_dimacs(args.input)
        pm = graph_to_partial(g)
        if args.amplify > 1:
            pm = amplify_block_diagonal(pm, args.amplify)
        if args.pad > 1:
            pm = pad_partial(pm, args.pad)
        fio.write_pmx(out, pm, provenance=prov)
        rep.update(n=pm.n, n_revealed=pm.n_revealed, revealed_fraction=pm.revealed_fraction)
    else:
        if args.pad > 1:
            raise StageError("reduce", "--pad applies to graph reductions only")
        if args.kind == "partition":
            sys_ = partition_gadget(fio.read_partition(args.input))
        else:
            sys_ = csp_gadget(fio.read_eoks(args.input), rotation_coupling=args.rotation_coupling)
        if args.amplify > 1:
            sys_ = amplify_block_diagonal(sys_, args.amplify)
        doc = fio.system_to_json(sys_)
        doc["provenance"] = prov
        fio.dump_json(doc, out)
        rep.update(n_labels=len(sys_.labels), n_constraints=len(sys_), families=sys_.family_counts())
    rep["output"] = str(out)
    rep.check("written", out.exists())


# -- complete ---------------------------------------------------------------------------


def _solver_cfg(args, seed) -> SolverConfig:
    return SolverConfig(rank=args.rank, c=args.c, max_iter=args.max_iter, tol=args.tol, seed=seed, restarts=args.restarts)


def cmd_complete(args, rep: Report) -> None:
    seed = rep["inputs"]["seed"]
    if args.input.endswith(".json"):
        sys_ = fio.read_system(args.input)
        res = solve_gram_system(sys_, args.dim, _solver_cfg(args, seed))
        rep.update(max_residual=res.max_residual, best_restart=res.restart, residuals_by_restart=res.residuals_by_restart)
        if args.output:
            fio.dump_json(fio.assignment_to_json(res.assignment), args.output)
        rep.check("residual_below_tol", res.max_residual <= args.accept)
        return
    pm = fio.read_pmx(args.input)
    res = complete_bounded_rank(pm, _solver_cfg(args, seed))
    rpt = consistency(pm, res.matrix)
    rep.update(
        rmse_sum=rpt.rmse_sum,
        max_entry_err=rpt.max_entry_err,
        rank=rpt.rank_est,
        best_restart=res.restart,
        rescaled=res.rescaled,
        iterations=len(res.history),
    )
    if args.output:
        fio.write_dmx(args.output, res.matrix)
    rep.check("rank_within_budget", rpt.rank_est <= args.rank)
    rep.check("coeff_bound", rpt.coeff_bound_ok)
    rep.check("rmse_below_tol", rpt.rmse_sum <= args.accept)


# -- factorize ------------------------------------------------------------------------------


def cmd_factorize(args, rep: Report) -> None:
    m = fio.read_dmx(args.input)
    fac = bounded_factorize(m, tol=args.tol)
    rep.update({k: v for k, v in fac.info.items()})
    rep["coherence"] = coherence(m) if m.shape[0] == m.shape[1] else None
    if args.output:
        fio.write_fac(args.output, fac)
    rep.check("reconstruction", fac.info["reconstruction_error"] <= 1e-6)
    rep.check("dimension_equals_rank", fac.r == fac.info["r"])
    if args.require_lemma_bound:
        rep.check("lemma_row_norm_bound", fac.info["lemma_bound_met"])


# -- decode ---------------------------------------------------------------------------------


def _decode_matrix_factor(args, rep: Report, seed: int) -> None:
    fac = fio.read_fac(args.inputs[0])
    n = fac.u.shape[0]
    g = fio.read_dimacs(args.graph) if args.graph else None
    if g is not None and g.n != n:
        raise StageError("decode", f"graph has {g.n} vertices, factorization has {n} rows")
    c = args.c if args.c is not None else float(np.abs(fac.reconstruct()).max())
    r = fac.r
    if args.kind == "is":
        params = ConeRoundingParams(c, r, seed=seed)
        survivors = None
        if g is not None:
            survivors = filter_accurate_submatrix(graph_to_partial(g), fac.reconstruct(), params.delta)
        trials = independent_set_trials(fac, params, survivors, trials=args.trials)
        bound = independent_set_bound(n, c, r, args.eps)
        rep.update(
            c=c, r=r, seed=seed, trials=args.trials, delta=params.delta, cos_phi=params.cos_phi,
            best_size=int(trials.sizes.max()), mean_size=trials.mean_size,
            bound_stated=bound["stated"], bound_proof=bound["proof"],
            best=[int(v) + 1 for v in trials.best.vertices],
        )
        if g is not None:
            bad = [t for t, s in enumerate(trials.sets) if not s.is_independent(g)]
            rep["violating_trials"] = bad
            rep.check("all_independent", not bad)
        rep.check("mean_meets_proof_bound", trials.mean_size >= bound["proof"])
    else:
        params = NetColoringParams(c, r, args.eps)
        try:
            col = decode_coloring(fac, params)
        except DecodingError as e:
            raise StageError("decode", str(e)) from None
        bound = coloring_color_bound(c, r, args.eps)
        rep.update(c=c, r=r, eps=args.eps, delta_net=params.delta_net, colors_used=col.k,
                   color_bound=bound, coloring=fio.coloring_to_json(col))
        if g is not None:
            rep.check("proper", col.is_proper(g))
        rep.check("within_color_bound", col.k <= bound)
    if args.output:
        fio.dump_json({k: v for k, v in rep.items() if k not in ("checks", "inputs", "command")}, args.output)


def cmd_decode(args, rep: Report) -> None:
    seed = rep["inputs"]["seed"]
    if args.kind in ("is", "coloring"):
        return _decode_matrix_factor(args, rep, seed)
    if len(args.inputs) != 2:
        raise StageError("decode", "expected SYSTEM.json ASSIGNMENT.json")
    sys_ = fio.read_system(args.inputs[0])
    va = fio.read_assignment(args.inputs[1])
    rep["max_residual"] = max_residual(sys_, va)
    if args.kind == "partition":
        split = decode_partition(sys_, va, tol=args.tol)
        inst = partition_instance_from_system(sys_)
        doc = fio.solution_to_json(split)
        rep.check("equal_sums", split.is_balanced(inst))
        rep["imbalance"] = str(split.imbalance(inst))
    else:
        sol = decode_assignment(sys_, va, eps=args.eps)
        inst = csp_instance_from_system(sys_)
        doc = fio.solution_to_json(sol)
        rep.check("satisfies", sol.satisfies(inst))
    rep["solution"] = doc
    if args.output:
        fio.dump_json(doc, args.output)


# -- roundtrip ---------------------------------------------------------------------------------


def _stage(name, fn, *a, **kw):
    try:
        return fn(*a, **kw)
    except StageError:
        raise
    except Exception as e:  # noqa: BLE001 - every failure is reported with its stage
        raise StageError(name, f"{type(e).__name__}: {e}") from e


def _roundtrip_graph(args, rep, seed):
    g = _stage("parse", fio.read_dimacs, args.input)
    k = args.rank
    if args.coloring:
        # a supplied witness replaces the oracle for graphs beyond its guard
        f = _stage("parse", fio.read_coloring, args.coloring)
        if f.k > k or not f.is_proper(g):
            raise StageError("oracle", f"supplied coloring is not a proper {k}-coloring")
        f = Coloring(k, f.colors)
    else:
        f = _stage("oracle", brute_coloring, g, k, max_bits=args.max_bits)
        if f is None:
            raise StageError("oracle", f"graph is not {k}-colorable")
    if args.balance:
        g, f = balance_by_copies(g, f)
    pm = graph_to_partial(g)
    m = _stage("completeness", completion_from_coloring, g, f)
    rpt = consistency(pm, m)
    rep.update(n=g.n, m=g.m, oracle_coloring=fio.coloring_to_json(f), rmse_sum=rpt.rmse_sum, rank=rpt.rank_est)
    rep["coherence"] = coherence(m)
    rep.check("completion_exact", rpt.rmse_sum == 0.0)
    rep.check("rank_at_most_k", rpt.rank_est <= k)
    fac = _stage("factorize", bounded_factorize, m)
    rep.update(max_row_norm=fac.info["max_row_norm"], lemma_bound=fac.info["lemma_bound"],
               lemma_bound_met=fac.info["lemma_bound_met"])
    if args.noise > 0:
        rng = np.random.default_rng(seed)
        # entrywise error of the product stays below args.noise
        scale = args.noise / (3 * math.sqrt(fac.r) * max(fac.max_row_norm(), 1.0))
        fac = Factorization(fac.u + rng.uniform(-scale, scale, fac.u.shape), fac.v + rng.uniform(-scale, scale, fac.v.shape))
    eps = float(np.abs(fac.reconstruct() - m).max())
    rep["entry_error"] = eps
    params = NetColoringParams(1.0, fac.r, min(eps, 0.49))
    col = _stage("decode", decode_coloring, fac, params)
    bound = coloring_color_bound(1.0, fac.r, params.eps)
    rep.update(colors_used=col.k, color_bound=bound)
    rep.check("decoded_proper", col.is_proper(g))
    rep.check("within_color_bound", col.k <= bound)


def _roundtrip_partition(args, rep, seed):
    inst = _stage("parse", fio.read_partition, args.input)
    split = _stage("oracle", brute_partition, inst)
    if split is None:
        raise StageError("oracle", "instance has no equal-sum split")
    sys_ = partition_gadget(inst)
    va = _stage("completeness", partition_completeness, inst, split)
    exact = max_residual(sys_, va)
    rep.update(n=inst.n, oracle_split=sorted(i + 1 for i in split.in_set), completeness_residual=exact)
    rep.check("completeness_exact", exact <= 1e-12)
    dim = args.dim or 2
    if dim > 2:
        va = va.embedded(dim, seed=seed)
    if args.noise > 0:
        va = va.perturbed(args.noise, seed=seed + 1)
    rep["input_residual"] = max_residual(sys_, va)
    dec = _stage("decode", decode_partition, sys_, va, tol=max(1e-9, 10 * args.noise))
    rep["decoded_split"] = sorted(i + 1 for i in dec.in_set)
    rep["decode_diagnostics"] = dec.diagnostics
    rep.check("equal_sums", dec.is_balanced(inst))


def _roundtrip_csp(args, rep, seed):
    inst = _stage("parse", fio.read_eoks, args.input)
    f = _stage("oracle", brute_one_in_k, inst)
    if f is None:
        raise StageError("oracle", "instance is unsatisfiable")
    sys_ = csp_gadget(inst)
    va = _stage("completeness", csp_completeness, inst, f)
    exact = max_residual(sys_, va)
    rep.update(k=inst.k, n_vars=inst.n_vars, m=inst.m, oracle=f.values.tolist(), completeness_residual=exact)
    rep.check("completeness_exact", exact <= 1e-12)
    dim = args.dim or 2 * inst.k
    if dim > 2 * inst.k:
        va = va.embedded(dim, seed=seed)
    if args.noise > 0:
        va = va.perturbed(args.noise, seed=seed + 1)
    eps = max_residual(sys_, va)
    rep["input_residual"] = eps
    dec = _stage("decode", decode_assignment, sys_, va)
    d = dec.diagnostics
    rep.update(decoded=dec.values.tolist(), max_vector_drift=d["max_vector_drift"],
               max_clause_drift=d["max_clause_drift"], magnitudes=d["magnitudes"])
    rep.check("satisfies", dec.satisfies(inst))
    rep.check("oracle_recovered", dec == f)
    rep.check("drift_within_3sqrt_eps", d["max_vector_drift"] <= 3 * math.sqrt(d["eps_measured"]) + 1e-12)


def cmd_roundtrip(args, rep: Report) -> None:
    seed = rep["inputs"]["seed"]
    {"graph": _roundtrip_graph, "partition": _roundtrip_partition, "csp": _roundtrip_csp}[args.kind](args, rep, seed)


# -- verify -------------------------------------------------------------------------------------


def cmd_verify(args, rep: Report) -> None:
    a, b = args.inputs
    if args.kind == "completion":
        pm = fio.read_pmx(a)
        m = fio.read_dmx(b)
        if m.shape != (pm.n, pm.n):
            raise StageError("verify", f"matrix is {m.shape}, partial matrix is {pm.n}x{pm.n}")
        rpt = consistency(pm, m)
        rep.update(rpt.as_dict())
        rep.check("rmse_below_tol", rpt.rmse_sum <= args.tol)
        rep.check("coeff_bound", rpt.coeff_bound_ok)
        if args.rank is not None:
            rep.check("rank_within_budget", numerical_rank(m) <= args.rank)
    elif args.kind == "gram":
        sys_ = fio.read_system(a)
        va = fio.read_assignment(b)
        res = np.abs(constraint_residuals(sys_, va))
        rep.update(max_residual=float(res.max(initial=0.0)), dim=va.dim, n_constraints=len(sys_))
        rep.check("residual_below_tol", res.max(initial=0.0) <= args.tol)
        if args.rank is not None:
            rep.check("dim_within_budget", numerical_rank(va.gram()) <= args.rank)
    else:
        g = fio.read_dimacs(a)
        f = fio.read_coloring(b)
        bad = f.violated_edge(g)
        rep.update(colors=f.k, violated_edge=None if bad is None else [bad[0] + 1, bad[1] + 1])
        rep.check("proper", bad is None)


# -- parser --------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hardcomplete", description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=None, help="base seed (default: $HARDCOMPLETE_SEED or 0)")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("generate", help="write a random planted instance")
    s.add_argument("kind", choices=["graph", "partition", "csp"])
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--n", type=int, default=12)
    s.add_argument("--k", type=int, default=3)
    s.add_argument("--p", type=float, default=0.5, help="edge probability between classes")
    s.add_argument("--m", type=int, default=4, help="clauses")
    s.set_defaults(func=cmd_generate)

    s = sub.add_parser("reduce", help="build the partial matrix or Gram system for an instance")
    s.add_argument("kind", choices=["graph", "partition", "csp"])
    s.add_argument("input")
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--pad", type=int, default=1, metavar="FACTOR")
    s.add_argument("--amplify", type=int, default=1, metavar="COPIES")
    s.add_argument("--rotation-coupling", action="store_true")
    s.set_defaults(func=cmd_reduce)

    s = sub.add_parser("complete", help="heuristic completion of a PMX file or Gram system JSON")
    s.add_argument("input")
    s.add_argument("-o", "--output")
    s.add_argument("--rank", type=int, default=2)
    s.add_argument("--dim", type=int, default=2, help="vector dimension for Gram systems")
    s.add_argument("--c", type=float, default=None)
    s.add_argument("--restarts", type=int, default=5)
    s.add_argument("--max-iter", type=int, default=500)
    s.add_argument("--tol", type=float, default=1e-12)
    s.add_argument("--accept", type=float, default=1e-6, help="success threshold for the report")
    s.set_defaults(func=cmd_complete)

    s = sub.add_parser("factorize", help="bounded factorization of a dense matrix")
    s.add_argument("input")
    s.add_argument("-o", "--output")
    s.add_argument("--tol", type=float, default=1e-7)
    s.add_argument("--require-lemma-bound", action="store_true", help="fail when max row norm > (cr)^(1/4)")
    s.set_defaults(func=cmd_factorize)

    s = sub.add_parser("decode", help="decode an independent set, coloring, split or assignment")
    s.add_argument("kind", choices=["is", "coloring", "partition", "csp"])
    s.add_argument("inputs", nargs="+", help="FAC file, or SYSTEM.json ASSIGNMENT.json")
    s.add_argument("-o", "--output")
    s.add_argument("--graph", help="DIMACS graph to verify against")
    s.add_argument("--c", type=float, default=None)
    s.add_argument("--eps", type=float, default=None, help="entrywise error (matrix) or residual bound (csp)")
    s.add_argument("--trials", type=int, default=1)
    s.add_argument("--tol", type=float, default=1e-9)
    s.set_defaults(func=cmd_decode)

    s = sub.add_parser("roundtrip", help="oracle -> completeness -> noise -> decode -> verify")
    s.add_argument("kind", choices=["graph", "partition", "csp"])
    s.add_argument("input")
    s.add_argument("--rank", type=int, default=3, help="colors for graphs")
    s.add_argument("--dim", type=int, default=None)
    s.add_argument("--noise", type=float, default=0.0)
    s.add_argument("--balance", action="store_true", help="balance color classes by copies")
    s.add_argument("--max-bits", type=float, default=25)
    s.add_argument("--coloring", help="coloring JSON used instead of the brute-force oracle (graphs)")
    s.set_defaults(func=cmd_roundtrip)

    s = sub.add_parser("verify", help="check a completion, vector assignment or coloring")
    s.add_argument("kind", choices=["completion", "gram", "coloring"])
    s.add_argument("inputs", nargs=2)
    s.add_argument("--rank", type=int, default=None)
    s.add_argument("--tol", type=float, default=1e-9)
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "eps", None) is None and args.command == "decode" and args.kind in ("is", "coloring"):
        args.eps = 0.0
    seed = _seed(args)
    inputs = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command", "verbose")}
    inputs["seed"] = seed
    rep = Report(args.command, **inputs)
    rep["oracle_backend"] = BACKEND
    t0 = time.perf_counter()
    code = 0
    try:
        args.func(args, rep)
    except fio.ParseError as e:
        print(f"hardcomplete: {e}", file=sys.stderr)
        rep.update(failed_stage="parse", error=str(e))
        code = 2
    except StageError as e:
        rep.update(failed_stage=e.stage, error=str(e))
    except (DecodingError, ValueError, KeyError) as e:
        rep.update(failed_stage=args.command, error=f"{type(e).__name__}: {e}")
    rep["ok"] = rep.ok
    rep["wall_time"] = round(time.perf_counter() - t0, 6)
    sys.stdout.write(fio.dump_json(rep))
    if code:
        return code
    return 0 if rep.ok else 1


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())

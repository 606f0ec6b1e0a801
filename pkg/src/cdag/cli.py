"""Command-line interface: simulate / learn / score / check / identify /
equiv / bench over the package's file formats.

Machine-readable results go to stdout (pretty-printed JSON or files named by
flags); logs go to stderr.  Exit codes: 0 success, 1 domain error, 2 usage
error.  All randomness flows through explicit ``--seed`` flags.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import bench as bench_mod
from .coloring import (ColoredDag, read_adjacency_csv, read_graph_json,
                       write_graph_json, uncolored)
from .constraints import check_global_markov, check_local_markov, model_equivalent
from .errors import CdagError
from .fit import Dataset, bic_score, mle
from .gecs import BaselineSearch, GecsConfig, GecsSearch
from .identify import enumerate_identifying_sets
from .params import ModelParams, random_params, read_matrix_csv


def _read_graph(path) -> ColoredDag:
    # adjacency matrices are accepted read-only; JSON is the canonical format
    if str(path).lower().endswith(".csv"):
        return read_adjacency_csv(path)
    return read_graph_json(path)


def _emit(doc) -> None:
    json.dump(doc, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _log(msg) -> None:
    print(msg, file=sys.stderr)


def _param_key(cd: ColoredDag, cid: int, kind: str) -> str:
    base = cd.base_parameter(cid, kind)
    if kind == "vertex":
        return f"v{base + 1}"
    return f"{base[0] + 1}->{base[1] + 1}"


def params_to_json_dict(cd: ColoredDag, theta: ModelParams) -> dict:
    """Parameters keyed by the base vertex/edge of each color class."""
    return {
        "omega": {_param_key(cd, c, "vertex"): theta.omega[c]
                  for c in range(len(cd.vertex_classes))},
        "lambda": {_param_key(cd, c, "edge"): theta.lam[c]
                   for c in range(len(cd.edge_classes))},
    }


def params_from_json_dict(cd: ColoredDag, doc: dict) -> ModelParams:
    try:
        omega_doc = dict(doc["omega"])
        lam_doc = dict(doc["lambda"])
    except (KeyError, TypeError) as exc:
        raise CdagError(f"parameter JSON missing field: {exc}") from None
    omega, lam = [], []
    for c in range(len(cd.vertex_classes)):
        key = _param_key(cd, c, "vertex")
        if key not in omega_doc:
            raise CdagError(f"missing error variance for class {key!r}")
        omega.append(float(omega_doc[key]))
    for c in range(len(cd.edge_classes)):
        key = _param_key(cd, c, "edge")
        if key not in lam_doc:
            raise CdagError(f"missing coefficient for class {key!r}")
        lam.append(float(lam_doc[key]))
    return ModelParams(tuple(omega), tuple(lam))


# -- subcommands ---------------------------------------------------------------


def cmd_simulate(args) -> int:
    if args.graph is not None:
        cd = _read_graph(args.graph)
        if args.params is not None:
            with open(args.params, "r", encoding="utf-8") as fh:
                theta = params_from_json_dict(cd, json.load(fh))
        else:
            theta = random_params(cd, np.random.default_rng(args.seed))
    else:
        if args.p is None or args.rho is None or args.nc is None:
            raise CdagError("simulate needs either --graph or all of --p/--rho/--nc")
        cd, theta = bench_mod.random_bpec(args.p, args.rho, args.nc, args.seed)
    data = bench_mod.sample(cd, theta, args.n, args.seed + 1)
    data.to_csv(args.out)
    if args.graph_out is not None:
        write_graph_json(cd, args.graph_out)
    if args.params_out is not None:
        with open(args.params_out, "w", encoding="utf-8") as fh:
            json.dump(params_to_json_dict(cd, theta), fh, indent=2)
            fh.write("\n")
    _emit({"samples": data.n, "variables": data.p, "data": str(args.out)})
    return 0


def cmd_learn(args) -> int:
    data = Dataset.from_csv(args.data)
    if args.center:
        data = data.centered()
    config = GecsConfig(seed=args.seed, move_budget=args.budget)
    if args.baseline:
        search = BaselineSearch(data, config)
        result = uncolored(search.run())
    else:
        search = GecsSearch(data, config)
        result = search.run()
    if args.trace is not None:
        with open(args.trace, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(("step", "phase", "move", "score"))
            for row in search.trace:
                writer.writerow((row.step, row.phase, row.move, f"{row.score:.17g}"))
    _log(f"final score {search.trace[-1].score:.6f} "
         f"after {len(search.trace) - 1} accepted moves")
    _emit(result.to_json_dict())
    return 0


def cmd_score(args) -> int:
    cd = _read_graph(args.graph)
    data = Dataset.from_csv(args.data)
    if args.center:
        data = data.centered()
    theta, loglik = mle(cd, data)
    _emit({
        "loglik": loglik,
        "bic": bic_score(cd, data),
        "n_params": cd.n_params,
        "params": params_to_json_dict(cd, theta),
    })
    return 0


def cmd_check(args) -> int:
    cd = _read_graph(args.graph)
    sigma = read_matrix_csv(args.sigma)
    reports = [check_local_markov(sigma, cd, tol=args.tol)]
    if getattr(args, "global"):
        reports.append(check_global_markov(sigma, cd, tol=args.tol,
                                           budget=args.budget, seed=args.seed))
    _emit({"reports": [r.to_json_dict() for r in reports]})
    return 0 if all(r.ok for r in reports) else 1


def cmd_identify(args) -> int:
    cd = _read_graph(args.graph)
    if (args.vertex is None) == (args.edge is None):
        raise CdagError("identify needs exactly one of --vertex or --edge")
    if args.vertex is not None:
        target = args.vertex - 1
        label = {"vertex": args.vertex}
    else:
        try:
            i, j = (int(v) for v in args.edge.split(","))
        except ValueError:
            raise CdagError("--edge expects two comma-separated vertices, e.g. 1,2")
        target = (i - 1, j - 1)
        label = {"edge": [i, j]}
    sets = enumerate_identifying_sets(cd.graph, target)
    _emit({**label,
           "sets": sorted((sorted(v + 1 for v in s) for s in sets),
                          key=lambda s: (len(s), s))})
    return 0


def cmd_equiv(args) -> int:
    a = _read_graph(args.a)
    b = _read_graph(args.b)
    result = model_equivalent(a, b, trials=args.trials, tol=args.tol, seed=args.seed)
    _emit(result.to_json_dict())
    return 0


def cmd_bench(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        config = bench_mod.SweepConfig.from_json_dict(json.load(fh))
    rows = bench_mod.run_sweep(config, threads=args.threads)
    bench_mod.write_results_csv(rows, args.out)
    failed = sum(1 for r in rows if r["error"])
    _log(f"{len(rows)} rows written to {args.out}; {failed} failed")
    _emit({"rows": len(rows), "failed": failed, "out": str(args.out)})
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cdag",
        description="Colored Gaussian DAG models: simulation, learning, "
                    "scoring, and model checking.",
        epilog="Flags always win; there are no config-file overrides.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="draw samples from a colored DAG model")
    sim.add_argument("--graph", help="colored-DAG JSON to sample from")
    sim.add_argument("--params", help="parameter JSON (with --graph); random if omitted")
    sim.add_argument("--p", type=int, help="vertex count for a random BPEC model")
    sim.add_argument("--rho", type=float, help="edge probability for a random model")
    sim.add_argument("--nc", type=int, help="color classes per family for a random model")
    sim.add_argument("--n", type=int, required=True, help="sample count")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", required=True, help="output data CSV")
    sim.add_argument("--graph-out", help="also write the model graph JSON here")
    sim.add_argument("--params-out", help="also write the model parameters here")
    sim.set_defaults(func=cmd_simulate)

    learn = sub.add_parser("learn", help="greedy edge-colored search on a data CSV")
    learn.add_argument("--data", required=True)
    learn.add_argument("--seed", type=int, default=0)
    learn.add_argument("--budget", type=int, default=None,
                       help="accepted-move budget (default 10 p^3)")
    learn.add_argument("--baseline", action="store_true",
                       help="uncolored GES-style hill climbing instead of GECS")
    learn.add_argument("--center", action=argparse.BooleanOptionalAction, default=True,
                       help="subtract column means before fitting (default on)")
    learn.add_argument("--trace", help="write the score trace CSV here")
    learn.set_defaults(func=cmd_learn)

    score = sub.add_parser("score", help="MLE and BIC of a graph on a data CSV")
    score.add_argument("--graph", required=True)
    score.add_argument("--data", required=True)
    score.add_argument("--center", action=argparse.BooleanOptionalAction, default=True)
    score.set_defaults(func=cmd_score)

    check = sub.add_parser("check", help="Markov-property check of a covariance matrix")
    check.add_argument("--graph", required=True)
    check.add_argument("--sigma", required=True, help="covariance CSV")
    check.add_argument("--tol", type=float, default=1e-7)
    check.add_argument("--global", action="store_true",
                       help="also check the global property")
    check.add_argument("--budget", type=int, default=None,
                       help="sample this many global constraints instead of enumerating")
    check.add_argument("--seed", type=int, default=0)
    check.set_defaults(func=cmd_check)

    ident = sub.add_parser("identify", help="enumerate identifying sets")
    ident.add_argument("--graph", required=True)
    ident.add_argument("--vertex", type=int, help="1-based vertex")
    ident.add_argument("--edge", help="1-based edge as i,j")
    ident.set_defaults(func=cmd_identify)

    equiv = sub.add_parser("equiv", help="numeric model-equivalence test")
    equiv.add_argument("--a", required=True)
    equiv.add_argument("--b", required=True)
    equiv.add_argument("--trials", type=int, default=20)
    equiv.add_argument("--tol", type=float, default=1e-7)
    equiv.add_argument("--seed", type=int, default=0)
    equiv.set_defaults(func=cmd_equiv)

    benchp = sub.add_parser("bench", help="run a synthetic sweep")
    benchp.add_argument("--config", required=True, help="sweep JSON")
    benchp.add_argument("--out", required=True, help="results CSV")
    benchp.add_argument("--threads", type=int, default=1)
    benchp.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CdagError as exc:
        _log(f"error: {exc}")
        return 1
    except OSError as exc:
        _log(f"error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())

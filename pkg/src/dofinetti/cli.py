"""Command line entry point: ``dofinetti <subcommand>``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .core import Dag, InterventionSet, JointTable
from .discover import discover_bivariate_report
from .estimate import answer_query, fit_joint
from .formats import read_dataset, read_query, write_dataset
from .harness import ExperimentConfig, run_sweep
from .oracle import analytic_post_interventional, quadrature_post_interventional
from .simulate import BetaPrior, polya_urn_run, sample_icm_bivariate, sample_icm_general


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _triple(text: str) -> tuple[int, int, int]:
    parts = [int(t) for t in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected var,pos,value")
    return tuple(parts)


def _pair(text: str) -> tuple[int, int]:
    k, v = text.split("=")
    return int(k), int(v)


def cmd_simulate(args) -> None:
    if args.graph in ("X->Y", "Y->X", "X|Y"):
        ds = sample_icm_bivariate(args.graph, BetaPrior(args.alpha, args.beta), args.envs, args.positions, args.seed)
    else:
        dag = Dag.from_string(args.graph, len(args.cards.split(",")) if args.cards else None)
        cards = [int(c) for c in args.cards.split(",")] if args.cards else [2] * dag.num_vars
        ds = sample_icm_general(dag, cards, args.concentration, args.envs, args.positions, args.seed)
    write_dataset(ds, args.output)


def cmd_discover(args) -> None:
    report = discover_bivariate_report(read_dataset(args.data), args.significance)
    _emit(report.to_text(), args.output)


def cmd_effect(args) -> None:
    if args.table:
        table = JointTable.from_text(Path(args.table).read_text())
    else:
        table = fit_joint(read_dataset(args.data), smoothing=args.smoothing)
    if args.graph == "discover":
        if not args.data:
            raise ValueError("--graph discover needs --data")
        dag = discover_bivariate_report(read_dataset(args.data), args.significance).graph
    else:
        d = len({i for i, _ in table.axes})
        dag = Dag.from_string(args.graph, d)
    result = answer_query(table, dag, read_query(args.query), zero_mass=args.zero_mass)
    _emit(result.to_text(), args.output)


def cmd_urn(args) -> None:
    trace = polya_urn_run(BetaPrior(args.alpha, args.beta), args.steps, dict(args.intervene), args.seed)
    trace.to_csv(args.output)


def cmd_sweep(args) -> None:
    text = Path(args.config).read_text() if args.config else ""
    config = ExperimentConfig.from_text(text)
    if args.output_dir:
        config.output_dir = Path(args.output_dir)
    result = run_sweep(config)
    print(f"wrote {result.trials_path}, {result.summary_path}, {result.figure_path}")


def cmd_oracle(args) -> None:
    prior = BetaPrior(args.alpha, args.beta)
    iv = InterventionSet.of(*args.intervene)
    if args.quadrature:
        table = quadrature_post_interventional(args.graph, prior, iv, args.positions, args.nodes)
    else:
        table = analytic_post_interventional(args.graph, prior, iv, args.positions)
    _emit(table.to_text(), args.output)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dofinetti", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="sample an ICM dataset to CSV")
    s.add_argument("--graph", default="X->Y", help="X->Y, Y->X, X|Y, or an edge list like 0>1,1>2")
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--beta", type=float, default=3.0)
    s.add_argument("--cards", help="comma separated cardinalities (general DAGs)")
    s.add_argument("--concentration", type=float, default=1.0)
    s.add_argument("--envs", type=int, default=1000)
    s.add_argument("--positions", type=int, default=2)
    s.add_argument("--seed", type=int, default=int(os.environ.get("DOFINETTI_SEED", 0)))
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("discover", help="bivariate graph discovery report")
    s.add_argument("data")
    s.add_argument("--significance", type=float, default=0.05)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_discover)

    s = sub.add_parser("effect", help="answer an interventional query")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="dataset CSV (histogram estimate)")
    src.add_argument("--table", help="joint table text file")
    s.add_argument("--graph", required=True, help="graph, edge list, or 'discover' (needs --data)")
    s.add_argument("--query", required=True)
    s.add_argument("--significance", type=float, default=0.05)
    s.add_argument("--smoothing", type=float, default=0.0)
    s.add_argument("--zero-mass", choices=("raise", "uniform"), default="raise")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_effect)

    s = sub.add_parser("urn", help="run the causal Polya urn")
    s.add_argument("--alpha", type=int, default=1)
    s.add_argument("--beta", type=int, default=1)
    s.add_argument("--steps", type=int, default=20)
    s.add_argument("--intervene", type=_pair, action="append", default=[], metavar="POS=VALUE")
    s.add_argument("--seed", type=int, default=int(os.environ.get("DOFINETTI_SEED", 0)))
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_urn)

    s = sub.add_parser("sweep", help="environment sweep over all methods")
    s.add_argument("--config")
    s.add_argument("--output-dir")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("oracle", help="analytic post-interventional table")
    s.add_argument("--graph", default="X->Y")
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--beta", type=float, default=3.0)
    s.add_argument("--positions", type=int, default=2)
    s.add_argument("--intervene", type=_triple, action="append", default=[], metavar="VAR,POS,VALUE")
    s.add_argument("--quadrature", action="store_true")
    s.add_argument("--nodes", type=int, default=64)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (OSError, ValueError) as exc:
        print(f"dofinetti {args.command}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

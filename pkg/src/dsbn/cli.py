"""Command-line interface.

Subcommands cover structure learning, separation queries on directed
and partially oriented graphs, sampling from a network, computing its
joint assignment, running single independence tests, and combining two
assignments.  Exit code 0 means success, 1 a structural failure found
by the learner, 2 malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import DsbnError
from .evidence import MassAssignment
from .graphs import Dag, Pog, d_separated, find_active_trail, pd_separated
from .independence import (
    DsepOracle,
    ExactOracle,
    RelationOracle,
    StatOracle,
    chi2_conditional,
    chi2_marginal,
    compressibility_index,
)
from .learner import learn
from .network import Dataset, DsNetwork


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dsbn",
        description="Belief-function networks: learning, separation, sampling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("learn", help="learn a partially oriented graph")
    p.add_argument("--data", help="CSV dataset of set-valued records")
    p.add_argument("--net", help="network JSON (uses its joint assignment)")
    p.add_argument("--mass", help="mass assignment JSON")
    p.add_argument("--graph", help="directed graph JSON (separation oracle)")
    p.add_argument("--relation", help="explicit independence relation JSON")
    p.add_argument("--oracle", choices=["exact", "stat", "dsep", "relation"],
                   help="oracle kind (default inferred from the input flag)")
    p.add_argument("--alpha", type=float, default=0.05,
                   help="significance level for statistical tests")
    p.add_argument("--max-cond", type=int, default=None,
                   help="largest conditioning set size")
    p.add_argument("--enumerate", action="store_true",
                   help="also enumerate the compatible directed graphs")
    p.add_argument("--out", help="write the full result as JSON")
    p.add_argument("--dot", help="write the learned orientation as DOT")
    p.add_argument("--report", help="write figures, audit CSV and JSON here")
    p.set_defaults(handler=_cmd_learn)

    p = sub.add_parser("dsep", help="separation query on a directed graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--j", required=True)
    p.add_argument("--k", required=True)
    p.add_argument("--l", default="", help="comma-separated conditioning set")
    p.add_argument("--method", choices=["search", "enumeration"], default="search")
    p.set_defaults(handler=_cmd_dsep)

    p = sub.add_parser("pdsep", help="separation query on a partially oriented graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--j", required=True)
    p.add_argument("--k", required=True)
    p.add_argument("--l", default="")
    p.set_defaults(handler=_cmd_pdsep)

    p = sub.add_parser("sample", help="draw set-valued records from a network")
    p.add_argument("--net", required=True)
    p.add_argument("-n", type=int, required=True, help="number of records")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.set_defaults(handler=_cmd_sample)

    p = sub.add_parser("joint", help="compute a network's joint assignment")
    p.add_argument("--net", required=True)
    p.add_argument("--out", help="JSON output path (default stdout)")
    p.set_defaults(handler=_cmd_joint)

    p = sub.add_parser("test", help="run one independence or compression test")
    p.add_argument("--data", required=True)
    p.add_argument("--kind", choices=["marginal", "conditional", "compress"],
                   required=True)
    p.add_argument("--vars", required=True,
                   help="variable blocks, colon-separated, commas within "
                        "(e.g. A,B:C or A:B:C for a conditional test)")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--threshold", type=float, default=0.01,
                   help="compressibility threshold")
    p.set_defaults(handler=_cmd_test)

    p = sub.add_parser("combine", help="combine two mass assignments")
    p.add_argument("first", help="mass assignment JSON")
    p.add_argument("second", help="mass assignment JSON")
    p.add_argument("--out", help="JSON output path (default stdout)")
    p.set_defaults(handler=_cmd_combine)

    return parser


def _read_json(path: str):
    return json.loads(Path(path).read_text())


def _read_dataset(path: str) -> Dataset:
    return Dataset.from_csv(Path(path).read_text())


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_learn(args: argparse.Namespace) -> int:
    sources = [name for name in ("data", "net", "mass", "graph", "relation")
               if getattr(args, name)]
    if len(sources) != 1:
        raise DsbnError("learn needs exactly one of --data/--net/--mass/--graph/--relation")
    source = sources[0]
    kind = args.oracle or {"data": "stat", "net": "exact", "mass": "exact",
                           "graph": "dsep", "relation": "relation"}[source]
    if kind == "dsep":
        if source != "graph":
            raise DsbnError("the dsep oracle needs --graph")
        oracle = DsepOracle(Dag.from_obj(_read_json(args.graph)))
    elif kind == "relation":
        if source != "relation":
            raise DsbnError("the relation oracle needs --relation")
        oracle = RelationOracle.from_obj(_read_json(args.relation))
    elif kind == "stat":
        if source != "data":
            raise DsbnError("the stat oracle needs --data")
        oracle = StatOracle(_read_dataset(args.data), alpha=args.alpha)
    else:
        if source == "mass":
            mass = MassAssignment.from_obj(_read_json(args.mass))
        elif source == "net":
            mass = DsNetwork.from_obj(_read_json(args.net)).joint_mass()
        elif source == "data":
            mass = _read_dataset(args.data).estimate()
        else:
            raise DsbnError("the exact oracle needs --mass, --net or --data")
        oracle = ExactOracle(mass)
    result = learn(oracle, max_cond=args.max_cond, enumerate=args.enumerate)

    print("nodes:", " ".join(result.pog.nodes))
    for a, b in result.pog.edges:
        pairs = result.pog.orient[(a, b)]
        if len(pairs) == 2:
            mark = f"{a} <-> {b}"
        elif (a, b) in pairs:
            mark = f"{a} -> {b}"
        elif (b, a) in pairs:
            mark = f"{b} -> {a}"
        else:
            mark = f"{a} - {b}"
        print("edge:", mark)
    if result.failure:
        print(f"failure: {result.failure.kind}: {result.failure.detail}")
    elif result.enumerated:
        print(f"compatible graphs: {len(result.dags)}")
    print(f"oracle queries: {len(result.audit)}")

    if args.out:
        Path(args.out).write_text(json.dumps(result.to_obj(), indent=2) + "\n")
    if args.dot:
        Path(args.dot).write_text(result.pog.to_dot())
    if args.report:
        from .report import render_report

        for path in render_report(result, args.report):
            print("wrote:", path)
    return 1 if result.failure else 0


def _cond_list(raw: str) -> tuple[str, ...]:
    return tuple(v for v in raw.split(",") if v)


def _cmd_dsep(args: argparse.Namespace) -> int:
    dag = Dag.from_obj(_read_json(args.graph))
    cond = _cond_list(args.l)
    separated = d_separated(dag, args.j, args.k, cond, method=args.method)
    if separated:
        print("separated")
    else:
        trail = find_active_trail(dag, args.j, args.k, cond)
        print("connected:", " - ".join(trail))
    return 0


def _cmd_pdsep(args: argparse.Namespace) -> int:
    pog = Pog.from_obj(_read_json(args.graph))
    separated = pd_separated(pog, args.j, args.k, _cond_list(args.l))
    print("separated" if separated else "connected")
    return 0


def _cmd_sample(args: argparse.Namespace) -> int:
    net = DsNetwork.from_obj(_read_json(args.net))
    data = net.sample(args.n, seed=args.seed)
    _emit(data.to_csv(), args.out)
    return 0


def _cmd_joint(args: argparse.Namespace) -> int:
    net = DsNetwork.from_obj(_read_json(args.net))
    _emit(json.dumps(net.joint_mass().to_obj(), indent=2) + "\n", args.out)
    return 0


def _cmd_test(args: argparse.Namespace) -> int:
    data = _read_dataset(args.data)
    groups = [tuple(v for v in part.split(",") if v) for part in args.vars.split(":")]
    m_hat = data.estimate()
    n = len(data)
    if args.kind == "compress":
        if len(groups) != 1 or len(groups[0]) != 1:
            raise DsbnError("compress expects a single variable in --vars")
        outcome = compressibility_index(m_hat, groups[0][0], n,
                                        alpha=args.alpha, threshold=args.threshold)
    elif args.kind == "marginal":
        if len(groups) != 2 or not all(groups):
            raise DsbnError("marginal expects two blocks, e.g. A:B")
        outcome = chi2_marginal(m_hat, n, groups[0], groups[1], alpha=args.alpha)
    else:
        if len(groups) != 3 or not all(groups):
            raise DsbnError("conditional expects three blocks, e.g. A:B:C")
        outcome = chi2_conditional(m_hat, n, groups[0], groups[1], groups[2],
                                   alpha=args.alpha)
    print(json.dumps(outcome.to_obj(), indent=2))
    return 0


def _cmd_combine(args: argparse.Namespace) -> int:
    first = MassAssignment.from_obj(_read_json(args.first))
    second = MassAssignment.from_obj(_read_json(args.second))
    _emit(json.dumps(first.combine(second).to_obj(), indent=2) + "\n", args.out)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except DsbnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def app() -> None:
    raise SystemExit(main())

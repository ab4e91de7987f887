"""Command-line entry point: ``forktopo simulate|analyze|verify|outcome``.

Exit codes: 0 success, 1 usage or I/O problem, 2 a proved property failed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from .errors import ForkTopoError
from .runner import analyze, completion_check, parse_scenario, verify_trace
from .sim import Trace, simulate
from .topology import separation_violations

SEED_ENV = "FORKTOPO_SEED"
EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=False, separators=(",", ":"))


def cmd_simulate(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        scenario = parse_scenario(fh.read())
    config = scenario.config
    override = os.environ.get(SEED_ENV)
    if override is not None:
        try:
            config = config.with_seed(int(override, 10))
        except ValueError:
            raise ForkTopoError(f"{SEED_ENV} must be a decimal 64-bit unsigned integer, got {override!r}") from None
    trace = simulate(config, scenario.transactions)
    trace.write(args.out)
    print(f"wrote {len(trace.events)} events for {config.clusters} clusters over {config.horizon} steps to {args.out}",
          file=sys.stderr)
    return EXIT_OK


def _print_pairs(title: str, pairs) -> None:
    print(f"  {title}:")
    if not pairs:
        print("    (no pairs)")
    for p, q, v in pairs:
        print(f"    ({p}, {q}) = {'undefined' if v is None else v}")


def cmd_analyze(args) -> int:
    trace = Trace.read(args.trace)
    report = analyze(trace, args.at, first_fork=args.first_fork, proxy_at=args.proxy_at)
    if args.json:
        print(_dump(report.to_json()))
        return EXIT_OK
    data = report.to_json()
    print(f"snapshot: {data['snapshot']}")
    print(f"fork counts: {data['fork_counts']}")
    print(f"delta_f: {data['delta_f']}")
    _print_pairs("d_g", data["d_g"])
    gs = data["growing_space"]
    print(f"  growing-fork space: epsilon={gs['epsilon']} basis={gs['basis']}")
    for b in data["bindings"]:
        print(f"{b['label']} proxies={dict(b['proxies'])}")
        if "outcomes" in b:
            print(f"  outcomes: {dict(b['outcomes'])}")
            _print_pairs("d_t", b["d_t"])
            ts = b["transaction_space"]
            print(f"  transaction space: epsilon={ts['epsilon']} basis={ts['basis']}")
        _print_pairs("d_f", b["d_f"])
        fs = b["fork_space"]
        print(f"  fork space: epsilon={fs['epsilon']} basis={fs['basis']}")
    return EXIT_OK


def _summary(name: str, rep) -> str:
    status = "ok" if rep.passed else "FAIL"
    extra = ""
    if rep.paper_proof_coverage:
        extra = " " + ", ".join(f"{k}={v}" for k, v in sorted(rep.paper_proof_coverage.items()))
    return (f"  {name}: {status} pairs={rep.pairs_checked} (skipped {rep.pairs_skipped}) "
            f"triples={rep.triples_checked} (skipped {rep.triples_skipped}){extra}")


def cmd_verify(args) -> int:
    trace = Trace.read(args.trace)
    result = verify_trace(trace)
    if args.json:
        print(_dump(result.to_json()))
    else:
        print(_summary("d_g", result.d_g))
        for bv in result.bindings:
            print(f"{bv.binding.label}: {'PASS' if bv.passed else 'FAIL'}")
            print(_summary("d_t", bv.d_t))
            print(_summary("d_f", bv.d_f))
            for w in bv.d_f.uncovered_by_paper_proof:
                x, z, y = w.points
                dxy, dxz, dzy = w.values
                print(f"    uncovered_by_paper_proof: d({x},{y})={dxy} > d({x},{z})+d({z},{y})={dxz}+{dzy}")
            for k, sp in bv.spaces.items():
                s = sp.to_json()
                print(f"  space {k}: {s['kind']} epsilon={s['epsilon']} discrete={bv.discrete[k]}")
                for p, q, dist in separation_violations(sp):
                    print(f"    not separated: d({p},{q})={dist} <= epsilon={sp.epsilon}")
            d = bv.diagram.to_json()
            print(f"  diagram: h={d['h']} g={d['g']} hg={d['hg']} empty_points={d['empty_points']}")
        print("PASS" if result.passed else "FAIL: a proved property does not hold")
    return EXIT_OK if result.passed else EXIT_VIOLATION


def cmd_outcome(args) -> int:
    trace = Trace.read(args.trace)
    report = completion_check(trace, args.txn, proxy_at=args.proxy_at)
    if args.json:
        print(_dump(report.to_json()))
    else:
        data = report.to_json()
        print(f"txn {data['txn_id']}: {data['outcome']} per_party={data['per_party']} "
              f"stable={data['stable']} first_decided_step={data['first_decided_step']}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="forktopo", description="Fork simulator and finite-topology verifier.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="run a scenario and write a JSON Lines trace")
    p.add_argument("--config", required=True, metavar="PATH")
    p.add_argument("--out", required=True, metavar="PATH")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="distances, epsilons and bases at one snapshot")
    p.add_argument("--trace", required=True, metavar="PATH")
    when = p.add_mutually_exclusive_group()
    when.add_argument("--at", type=int, metavar="INT")
    when.add_argument("--first-fork", action="store_true")
    p.add_argument("--proxy-at", type=int, metavar="INT")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("verify", help="check metric axioms, discreteness and the map diagram")
    p.add_argument("--trace", required=True, metavar="PATH")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("outcome", help="finite-horizon completion check for one transaction")
    p.add_argument("--trace", required=True, metavar="PATH")
    p.add_argument("--txn", required=True, type=int, metavar="INT")
    p.add_argument("--proxy-at", type=int, metavar="INT")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_outcome)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ForkTopoError) as exc:
        print(f"forktopo {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

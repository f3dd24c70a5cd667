"""Command-line front end: run sweeps, aggregate, dump scenarios, solve WDPs."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness, ilp
from .alloc_auction import bid_matrix_from_csv, build_wdp
from .harness import ALGORITHM_ORDER, CASE_ORDER, CONTEXT_ORDER, RunConfig
from .scenario import config_for_case, generate


def _parse_list(value: str) -> tuple[str, ...]:
    return tuple(s.strip() for s in value.split(",") if s.strip())


def _build_run_config(args: argparse.Namespace) -> RunConfig:
    doc: dict = {}
    if args.config:
        loaded = json.loads(Path(args.config).read_text())
        # accept either a flat config document or a run manifest
        doc.update(loaded.get("config", loaded))
    overrides = {
        "n_scenarios": args.scenarios,
        "base_seed": args.seed,
        "cases": _parse_list(args.cases) if args.cases else None,
        "contexts": _parse_list(args.contexts) if args.contexts else None,
        "algorithms": _parse_list(args.algorithms) if args.algorithms else None,
        "stochastic_reps": args.reps,
        "out_dir": args.out,
        "workers": args.workers,
    }
    doc.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig.from_dict(doc)


def cmd_run(args: argparse.Namespace) -> int:
    config = _build_run_config(args)
    result = harness.run(config)
    harness.write_aggregates(result.records, result.out_dir)
    print(f"wrote {len(result.records)} records to {result.records_path}")
    if result.faults:
        print(f"{len(result.faults)} faults recorded in {result.out_dir / 'faults.csv'}",
              file=sys.stderr)
        return 1
    return 0


def cmd_aggregate(args: argparse.Namespace) -> int:
    records = harness.load_records(Path(args.in_dir) / "records.csv")
    written = harness.write_aggregates(records, args.in_dir)
    print(f"wrote {len(written)} aggregate files under {args.in_dir}")
    return 0


def cmd_dump_scenario(args: argparse.Namespace) -> int:
    scenario = generate(config_for_case(args.case), args.seed)
    text = scenario.dump_json()
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0


def cmd_solve_wdp(args: argparse.Namespace) -> int:
    matrix = bid_matrix_from_csv(Path(args.bids).read_text())
    model = build_wdp(matrix)
    result = ilp.solve(model.program)
    if result.status is not ilp.SolveStatus.OPTIMAL:
        print("infeasible")
        return 1
    print(f"objective: {result.objective_value!r}")
    accepted = result.chosen
    print("accepted bids:", " ".join(str(j + 1) for j in accepted) or "(none)")
    owner: dict[int, int] = {}
    for j in accepted:
        bid = matrix.bids[j]
        chans = ",".join(str(m + 1) for m in sorted(bid.bundle))
        print(f"  bid {j + 1}: bidder {bid.bidder}, channels {{{chans}}}, "
              f"value {bid.value!r}")
        for m in bid.bundle:
            owner[m] = bid.bidder
    unassigned = [m + 1 for m in range(matrix.n_channels) if m not in owner]
    print("unassigned channels:", " ".join(str(m) for m in unassigned) or "(none)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chanalloc",
        description="Multi-connectivity channel assignment benchmark harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a Monte Carlo sweep")
    p_run.add_argument("--scenarios", type=int, default=None,
                       help="number of scenarios per case")
    p_run.add_argument("--seed", type=int, default=None, help="base seed")
    p_run.add_argument("--cases", default=None,
                       help=f"comma list from {','.join(CASE_ORDER)}")
    p_run.add_argument("--contexts", default=None,
                       help=f"comma list from {','.join(CONTEXT_ORDER)}")
    p_run.add_argument("--algorithms", default=None,
                       help=f"comma list from {','.join(ALGORITHM_ORDER)}")
    p_run.add_argument("--reps", type=int, default=None,
                       help="repetitions for stochastic algorithms")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--workers", type=int, default=None, help="worker processes")
    p_run.add_argument("--config", default=None,
                       help="JSON config file (flags override its values)")
    p_run.set_defaults(func=cmd_run)

    p_agg = sub.add_parser("aggregate", help="recompute aggregates for a run")
    p_agg.add_argument("--in", dest="in_dir", required=True, help="run directory")
    p_agg.set_defaults(func=cmd_aggregate)

    p_dump = sub.add_parser("dump-scenario", help="emit one scenario as JSON")
    p_dump.add_argument("--seed", type=int, required=True)
    p_dump.add_argument("--case", default="I", choices=list(CASE_ORDER))
    p_dump.add_argument("--out", default=None)
    p_dump.set_defaults(func=cmd_dump_scenario)

    p_wdp = sub.add_parser("solve-wdp", help="solve a bid-matrix CSV exactly")
    p_wdp.add_argument("--bids", required=True, help="bid matrix CSV path")
    p_wdp.set_defaults(func=cmd_solve_wdp)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

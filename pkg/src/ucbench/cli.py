"""Command-line front end for the full benchmark pipeline.

Subcommands: `generate` (demand scenarios), `solve` (exact solves into a
record store), `evaluate` (leave-one-out neighbor strategy plus report), and
`report` (CSV and figures from a saved evaluation).

Exit codes: 0 success, 1 solver or infeasibility abort, 2 usage/input error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import dataio, plots
from .commitment import SolverConfig
from .errors import DataError, InfeasibleError, SolveLimitError, UcbenchError
from .evaluation import aggregate, evaluate_all, solve_scenarios
from .scenarios import generate_batch

log = logging.getLogger("ucbench")

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_USAGE = 2


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--log-level", default="INFO",
                        choices=("DEBUG", "INFO", "WARNING", "ERROR"))


def _solver_config(args) -> SolverConfig:
    return SolverConfig(mip_gap=args.mip_gap,
                        time_limit_seconds=args.time_limit)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ucbench",
        description="Benchmark nearest-neighbor warm starts for unit commitment.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate demand scenarios")
    p.add_argument("--system", required=True, help="system JSON file")
    p.add_argument("--n", type=int, required=True, help="number of instances")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--out", required=True, help="instance-set output file")
    _add_common(p)

    p = sub.add_parser("solve", help="solve every instance exactly")
    p.add_argument("--system", required=True)
    p.add_argument("--instances", required=True, help="instance-set file")
    p.add_argument("--out", required=True, help="record-store output file")
    p.add_argument("--mip-gap", type=float, default=1e-4)
    p.add_argument("--time-limit", type=float, default=600.0,
                   help="seconds per instance")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    _add_common(p)

    p = sub.add_parser("evaluate", help="run the neighbor strategy and report")
    p.add_argument("--system", required=True)
    p.add_argument("--records", required=True, help="record-store file")
    p.add_argument("--k", type=int, default=None,
                   help="neighbors per instance (default: 10%% of the store)")
    p.add_argument("--out", required=True, help="evaluation output file")
    p.add_argument("--report", default=None,
                   help="report path stem (writes <stem>.csv and <stem>.json)")
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="report format printed to stdout path hints")
    p.add_argument("--mip-gap", type=float, default=1e-4)
    p.add_argument("--time-limit", type=float, default=600.0)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    _add_common(p)

    p = sub.add_parser("report", help="render CSV and figures from an evaluation")
    p.add_argument("--evals", required=True, help="evaluation file")
    p.add_argument("--out", required=True, help="output directory")
    _add_common(p)
    return parser


def cmd_generate(args) -> int:
    system = dataio.load_any_system(args.system)
    scenarios = generate_batch(system, args.n, args.seed)
    dataio.save_scenarios(args.out, scenarios)
    log.info("event=scenarios_written n=%d path=%s", len(scenarios), args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    system = dataio.load_any_system(args.system)
    scenarios = dataio.load_scenarios(args.instances)
    config = _solver_config(args)
    existing = []
    if os.path.exists(args.out):
        known = {s.instance_id for s in scenarios}
        existing = [r for r in dataio.load_records(args.out)
                    if r.instance_id in known]
        log.info("event=resuming existing=%d path=%s", len(existing), args.out)

    solved = list(existing)

    def persist(record):
        solved.append(record)
        dataio.save_records(args.out, solved)

    records = solve_scenarios(system, scenarios, config, existing=existing,
                              on_record=persist)
    dataio.save_records(args.out, records)
    log.info("event=records_written n=%d path=%s", len(records), args.out)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    system = dataio.load_any_system(args.system)
    records = dataio.load_records(args.records)
    if not records:
        raise DataError("record store is empty; nothing to evaluate")
    k = args.k if args.k is not None else max(1, -(-len(records) // 10))
    if k >= len(records):
        log.warning("event=k_truncated requested=%d usable=%d", k, len(records) - 1)
        k = len(records) - 1
    config = _solver_config(args)
    evals = evaluate_all(records, k, system, config, jobs=args.jobs)
    dataio.save_evals(args.out, evals, system=system, k=k)
    report = aggregate(evals, system_name=system.name)
    meta = {"n_buses": system.n_buses, "n_units": system.n_generators,
            "n_lines": system.n_lines, "k": k}
    if args.report:
        dataio.write_report_csv(args.report + ".csv", report, meta)
        dataio.save_report_json(args.report + ".json", report, meta)
        log.info("event=report_written format=%s path=%s.{csv,json}",
                 args.format, args.report)
    print(dataio.format_report_table(report, meta))
    return EXIT_OK


def cmd_report(args) -> int:
    evals, meta = dataio.load_evals(args.evals)
    if not evals:
        raise DataError("evaluation file holds no instances")
    report = aggregate(evals, system_name=meta.get("system_name") or "")
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "report.csv")
    json_path = os.path.join(args.out, "report.json")
    dataio.write_report_csv(csv_path, report, meta)
    dataio.save_report_json(json_path, report, meta)
    plots.save_gap_histogram(report, os.path.join(args.out, "gap_histogram.png"))
    plots.save_speedup_chart(evals, os.path.join(args.out, "speedup.png"),
                             system_name=report.system_name)
    print(dataio.format_report_table(report, meta))
    log.info("event=report_rendered dir=%s", args.out)
    return EXIT_OK


_COMMANDS = {
    "generate": cmd_generate,
    "solve": cmd_solve,
    "evaluate": cmd_evaluate,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="ts=%(asctime)s level=%(levelname)s %(message)s",
        datefmt="%Y-%m-%dT%H:%M:%S",
    )
    try:
        return _COMMANDS[args.command](args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InfeasibleError, SolveLimitError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except UcbenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())

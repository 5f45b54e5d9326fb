# Copyright (c) 2026 Pointmatic
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Command line front end.

Exit codes: 0 success, 2 unreadable input, 3 invalid study or arguments,
4 enumeration guard, 5 infeasible plan, 1 anything else. ``TEPPS_LOG`` sets
the log level; ``-v``/``-q`` override it.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import TYPE_CHECKING

from tepps._config import SolverConfig
from tepps._exceptions import TeppsError
from tepps._ieee24 import ieee24_study
from tepps._matpower import apply_modifiers, parse_matpower
from tepps._mps import write_mps
from tepps._oracle import enumerate_oracle, evaluate_plan
from tepps._planner import Planner, sweep_pst_budget
from tepps._reporting import (
    SolveStats,
    build_report,
    lmp_comparison,
    read_report,
    sweep_frame,
    write_report,
)
from tepps._scenarios import ProfileKind, ingest_profile, kmeans_reduce
from tepps._study_io import (
    assemble_from_documents,
    read_candidates,
    read_case,
    read_plan,
    read_scenarios,
    read_study,
    write_case,
    write_plan,
    write_scenarios,
    write_study,
)
from tepps._version import __version__

if TYPE_CHECKING:
    from collections.abc import Sequence

    from tepps._model import Plan, PlanningStudy, PlanReport

_log = logging.getLogger("tepps")

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INPUT = 2
EXIT_VALIDATION = 3


def _float_list(text: str) -> list[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        message = f"expected comma-separated numbers, got {text!r}"
        raise argparse.ArgumentTypeError(message) from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        message = f"expected comma-separated integers, got {text!r}"
        raise argparse.ArgumentTypeError(message) from None


def _configure_logging(verbose: int, quiet: bool) -> None:
    level_name = os.environ.get("TEPPS_LOG", "WARNING").upper()
    level = logging.getLevelName(level_name)
    if not isinstance(level, int):
        level = logging.WARNING
    if verbose:
        level = logging.DEBUG if verbose > 1 else logging.INFO
    if quiet:
        level = logging.ERROR
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _solver_config(args: argparse.Namespace) -> SolverConfig:
    return SolverConfig.from_env("TEPPS").with_overrides(
        mipgap=getattr(args, "mipgap", None),
        workers=getattr(args, "workers", None),
    )


def _write_outputs(
    out_dir: Path,
    study: PlanningStudy,
    plan: Plan,
    report: PlanReport,
    stats: SolveStats,
) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    bundle = build_report(study, report, stats)
    write_plan(plan, study, out_dir / "plan.json")
    with open(out_dir / "report.json", "w", encoding="utf-8", newline="\n") as stream:
        write_report(bundle, "json", stream)
    for table in ("summary", "lmp", "dispatch"):
        with open(out_dir / f"{table}.csv", "w", encoding="utf-8", newline="\n") as stream:
            write_report(bundle, "csv", stream, table=table)
    print(
        f"objective {report.objective:.6f} M$ (lines {report.annualized_line_investment:.6f}, "
        f"PSTs {report.annualized_pst_investment:.6f}, payment {report.consumer_payment:.6f}); "
        f"lines built: {' '.join(plan.built_line_ids(study)) or '-'}; "
        f"PSTs: {' '.join(plan.built_pst_ids(study)) or '-'}"
    )


# --- Subcommands ---


def cmd_ingest(args: argparse.Namespace) -> int:
    case = parse_matpower(Path(args.case).read_text(encoding="utf-8"))
    case = apply_modifiers(
        case,
        load_scale=args.scale_load,
        gen_scale=args.scale_gen,
        thermal_derate=args.derate,
    )
    write_case(case, args.out)
    print(
        f"buses {len(case.buses)}, generators {len(case.generators)}, "
        f"branches {len(case.branches)}, warnings {len(case.warnings)}"
    )
    return EXIT_OK


def cmd_reduce(args: argparse.Namespace) -> int:
    with open(args.load, encoding="utf-8") as stream:
        load = ingest_profile(stream, args.load_column, ProfileKind.LOAD)
    with open(args.wind, encoding="utf-8") as stream:
        wind = ingest_profile(stream, args.wind_column, ProfileKind.CAPACITY_FACTOR)
    scenarios = kmeans_reduce(load, wind, args.k, args.seed)
    write_scenarios(scenarios, args.out)
    print("cluster hours: " + " ".join(f"{s.hours:g}" for s in scenarios))
    return EXIT_OK


def cmd_assemble(args: argparse.Namespace) -> int:
    study = assemble_from_documents(
        read_case(args.network), read_scenarios(args.scenarios), read_candidates(args.candidates)
    )
    write_study(study, args.out)
    print(
        f"buses {len(study.network.buses)}, scenarios {len(study.scenarios)}, "
        f"candidate binaries {study.candidate_count}"
    )
    return EXIT_OK


def cmd_ieee24(args: argparse.Namespace) -> int:
    study = ieee24_study(args.case, relative_derating=not args.absolute_derating)
    write_study(study, args.out)
    print(f"case {args.case}: candidate binaries {study.candidate_count}")
    return EXIT_OK


def cmd_plan(args: argparse.Namespace) -> int:
    study = read_study(args.study)
    config = _solver_config(args)
    out_dir = Path(args.out)
    if args.pst_budget_sweep:
        points = sweep_pst_budget(
            study, args.pst_budget_sweep, config, dual_big_m=args.dual_big_m
        )
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "sweep.csv", "w", encoding="utf-8", newline="\n") as stream:
            sweep_frame(points).to_csv(stream, index=False, lineterminator="\n")
        for point in points:
            print(f"PST budget {point.pst_budget:g}: objective {point.objective:.6f}")
        return EXIT_OK

    planner = Planner(study, config, dual_big_m=args.dual_big_m)
    if args.export_mps:
        with open(args.export_mps, "w", encoding="utf-8", newline="\n") as stream:
            write_mps(planner.build(), stream, free=args.free_mps)
    result = planner.solve()
    stats = SolveStats(
        status=result.solution.status.value,
        nodes=result.solution.nodes,
        gap=result.solution.gap,
        solve_seconds=result.solve_seconds if args.timing else None,
    )
    _write_outputs(out_dir, study, result.plan, result.report, stats)
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    study = read_study(args.study)
    result = enumerate_oracle(study, _solver_config(args))
    stats = SolveStats(status="enumerated")
    _write_outputs(Path(args.out), study, result.plan, result.report, stats)
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    study = read_study(args.study)
    plan = read_plan(args.plan, study)
    report = evaluate_plan(study, plan, _solver_config(args))
    _write_outputs(Path(args.out), study, plan, report, SolveStats(status="evaluated"))
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    with open(args.report_a, encoding="utf-8") as stream:
        bundle_a = read_report(stream)
    with open(args.report_b, encoding="utf-8") as stream:
        bundle_b = read_report(stream)
    table = lmp_comparison(bundle_a, bundle_b, args.scenarios)
    with open(args.out, "w", encoding="utf-8", newline="\n") as stream:
        table.to_csv(stream, index=False, lineterminator="\n")
    print(f"{len(table)} LMP pairs written")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tepps",
        description="Market-based transmission and PST expansion planning.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging")
    parser.add_argument("-q", "--quiet", action="store_true", help="errors only")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="MATPOWER case to network JSON")
    p.add_argument("case")
    p.add_argument("--scale-load", type=float, default=1.0)
    p.add_argument("--scale-gen", type=float, default=1.0)
    p.add_argument("--derate", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_ingest)

    p = sub.add_parser("reduce", help="hourly profiles to k weighted scenarios")
    p.add_argument("--load", required=True)
    p.add_argument("--wind", required=True)
    p.add_argument("--load-column", default="value")
    p.add_argument("--wind-column", default="value")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_reduce)

    p = sub.add_parser("assemble", help="network, scenario and candidate JSON to a study")
    p.add_argument("--network", required=True)
    p.add_argument("--scenarios", required=True)
    p.add_argument("--candidates", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_assemble)

    p = sub.add_parser("ieee24", help="write a reference 24-bus study")
    p.add_argument("--case", type=int, choices=(1, 2, 3, 4), required=True)
    p.add_argument(
        "--absolute-derating",
        action="store_true",
        help="bus 10 capacity factors 0.10 lower instead of 10%% lower",
    )
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_ieee24)

    p = sub.add_parser("plan", help="solve the planning MILP")
    p.add_argument("--study", required=True)
    p.add_argument("--mipgap", type=float)
    p.add_argument("--dual-big-m", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--export-mps")
    p.add_argument("--free-mps", action="store_true")
    p.add_argument("--pst-budget-sweep", type=_float_list)
    p.add_argument("--timing", action="store_true", help="record wall-clock solve time")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=cmd_plan)

    p = sub.add_parser("oracle", help="exhaustive enumeration of small studies")
    p.add_argument("--study", required=True)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=cmd_oracle)

    p = sub.add_parser("evaluate", help="market outcome of a fixed plan")
    p.add_argument("--study", required=True)
    p.add_argument("--plan", required=True)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("compare", help="per-bus LMP comparison of two reports")
    p.add_argument("report_a")
    p.add_argument("report_b")
    p.add_argument("--scenarios", type=_int_list, default=[1, 2])
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_compare)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_VALIDATION
    _configure_logging(args.verbose, args.quiet)
    try:
        code: int = args.handler(args)
    except TeppsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception:
        _log.exception("Unexpected failure")
        return EXIT_INTERNAL
    return code


if __name__ == "__main__":
    sys.exit(main())

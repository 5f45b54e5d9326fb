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

"""Result bundles, their JSON/CSV renderings and LMP comparison tables."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Literal

import pandas as pd

from tepps._exceptions import ReportError, StudyFormatError
from tepps._study_io import SCHEMA_VERSION

if TYPE_CHECKING:
    from collections.abc import Mapping, Sequence
    from typing import TextIO

    from tepps._model import PlanningStudy, PlanReport
    from tepps._planner import SweepPoint

ReportFormat = Literal["json", "csv"]
ReportTable = Literal["summary", "lmp", "dispatch"]

MWH_PER_DISPLAY_UNIT = 1e6


@dataclass(frozen=True)
class SolveStats:
    status: str | None = None
    nodes: int | None = None
    gap: float | None = None
    solve_seconds: float | None = None


@dataclass(frozen=True)
class ReportSummary:
    lines_built: tuple[str, ...]
    pst_locations: tuple[str, ...]
    line_investment: float
    pst_investment: float
    consumer_payment: float
    objective: float
    curtailment_mwh: Mapping[str, float]
    penetration: float
    status: str | None = None
    nodes: int | None = None
    gap: float | None = None
    solve_seconds: float | None = None

    @property
    def curtailment_display(self) -> dict[str, float]:
        """Curtailment in millions of MWh."""
        return {k: v / MWH_PER_DISPLAY_UNIT for k, v in self.curtailment_mwh.items()}


@dataclass(frozen=True)
class DispatchRow:
    scenario: int
    kind: str
    id: str
    value: float


@dataclass(frozen=True)
class ReportBundle:
    summary: ReportSummary
    buses: tuple[int, ...]
    scenarios: tuple[int, ...]
    lmp: tuple[tuple[float, ...], ...]
    dispatch: tuple[DispatchRow, ...]
    degenerate_scenarios: tuple[int, ...] = field(default=())

    def lmp_at(self, bus: int, scenario: int) -> float:
        return self.lmp[self.buses.index(bus)][self.scenarios.index(scenario)]


def _finite(name: str, value: float | None) -> None:
    if value is not None and not math.isfinite(value):
        raise ReportError(f"{name} is not finite: {value}")


def build_report(
    study: PlanningStudy, plan_report: PlanReport, stats: SolveStats | None = None
) -> ReportBundle:
    """Collect the headline row, the bus-by-scenario LMP table and the dispatch table.

    Raises:
        ReportError: dimensions disagree or a value is not finite.
    """
    solve = stats or SolveStats()
    if len(plan_report.dispatch) != len(study.scenarios):
        raise ReportError(
            f"report has {len(plan_report.dispatch)} scenarios, study has {len(study.scenarios)}"
        )
    buses = tuple(bus.id for bus in study.network.buses)
    scenario_labels = tuple(d.scenario for d in plan_report.dispatch)
    lmp = tuple(tuple(d.lmp[bus] for d in plan_report.dispatch) for bus in buses)

    rows: list[DispatchRow] = []
    for d in plan_report.dispatch:
        for kind, values in (
            ("generation", d.generation),
            ("wind", d.wind),
            ("wind_available", d.wind_available),
            ("flow", d.flows),
            ("pst_angle", d.pst_angle),
        ):
            rows.extend(DispatchRow(d.scenario, kind, str(k), float(v)) for k, v in values.items())

    summary = ReportSummary(
        lines_built=tuple(plan_report.plan.built_line_ids(study)),
        pst_locations=tuple(plan_report.plan.built_pst_ids(study)),
        line_investment=plan_report.annualized_line_investment,
        pst_investment=plan_report.annualized_pst_investment,
        consumer_payment=plan_report.consumer_payment,
        objective=plan_report.objective,
        curtailment_mwh=dict(plan_report.curtailment),
        penetration=plan_report.penetration,
        status=solve.status,
        nodes=solve.nodes,
        gap=solve.gap,
        solve_seconds=solve.solve_seconds,
    )
    for name in ("line_investment", "pst_investment", "consumer_payment", "objective"):
        _finite(name, getattr(summary, name))
    _finite("penetration", summary.penetration)
    _finite("gap", summary.gap)
    for farm, value in summary.curtailment_mwh.items():
        _finite(f"curtailment[{farm}]", value)
    for bus, row in zip(buses, lmp):
        for scenario, value in zip(scenario_labels, row):
            _finite(f"lmp[{bus}, {scenario}]", value)
    for row in rows:
        _finite(f"{row.kind}[{row.id}]", row.value)

    return ReportBundle(
        summary=summary,
        buses=buses,
        scenarios=scenario_labels,
        lmp=lmp,
        dispatch=tuple(rows),
        degenerate_scenarios=plan_report.degenerate_scenarios,
    )


# --- Serialisation ---


def report_to_dict(bundle: ReportBundle) -> dict[str, Any]:
    s = bundle.summary
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "report",
        "summary": {
            "lines_built": list(s.lines_built),
            "pst_locations": list(s.pst_locations),
            "line_investment": s.line_investment,
            "pst_investment": s.pst_investment,
            "consumer_payment": s.consumer_payment,
            "objective": s.objective,
            "curtailment_mwh": dict(s.curtailment_mwh),
            "curtailment_million_mwh": s.curtailment_display,
            "penetration": s.penetration,
            "status": s.status,
            "nodes": s.nodes,
            "gap": s.gap,
            "solve_seconds": s.solve_seconds,
        },
        "lmp": {
            "buses": list(bundle.buses),
            "scenarios": list(bundle.scenarios),
            "values": [list(row) for row in bundle.lmp],
        },
        "dispatch": [
            {"scenario": r.scenario, "kind": r.kind, "id": r.id, "value": r.value}
            for r in bundle.dispatch
        ],
        "degenerate_scenarios": list(bundle.degenerate_scenarios),
    }


def report_from_dict(data: Any) -> ReportBundle:
    try:
        if data["schema_version"] != SCHEMA_VERSION or data.get("kind") != "report":
            raise StudyFormatError(
                f"not a version {SCHEMA_VERSION} report document "
                f"(schema_version {data.get('schema_version')!r}, kind {data.get('kind')!r})"
            )
        s = data["summary"]
        lmp = data["lmp"]
        summary = ReportSummary(
            lines_built=tuple(s["lines_built"]),
            pst_locations=tuple(s["pst_locations"]),
            line_investment=float(s["line_investment"]),
            pst_investment=float(s["pst_investment"]),
            consumer_payment=float(s["consumer_payment"]),
            objective=float(s["objective"]),
            curtailment_mwh={str(k): float(v) for k, v in s["curtailment_mwh"].items()},
            penetration=float(s["penetration"]),
            status=s.get("status"),
            nodes=s.get("nodes"),
            gap=s.get("gap"),
            solve_seconds=s.get("solve_seconds"),
        )
        return ReportBundle(
            summary=summary,
            buses=tuple(int(b) for b in lmp["buses"]),
            scenarios=tuple(int(t) for t in lmp["scenarios"]),
            lmp=tuple(tuple(float(v) for v in row) for row in lmp["values"]),
            dispatch=tuple(
                DispatchRow(int(r["scenario"]), str(r["kind"]), str(r["id"]), float(r["value"]))
                for r in data["dispatch"]
            ),
            degenerate_scenarios=tuple(int(t) for t in data.get("degenerate_scenarios", [])),
        )
    except KeyError as exc:
        raise StudyFormatError(f"missing field {exc.args[0]} in report") from None
    except (TypeError, AttributeError) as exc:
        raise StudyFormatError(f"malformed report: {exc}") from exc


def summary_frame(bundle: ReportBundle) -> pd.DataFrame:
    s = bundle.summary
    row: dict[str, Any] = {
        "lines_built": " ".join(s.lines_built),
        "pst_locations": " ".join(s.pst_locations),
        "line_investment": s.line_investment,
        "pst_investment": s.pst_investment,
        "consumer_payment": s.consumer_payment,
        "objective": s.objective,
    }
    for farm, value in s.curtailment_mwh.items():
        row[f"curtailment_mwh[{farm}]"] = value
        row[f"curtailment_million_mwh[{farm}]"] = value / MWH_PER_DISPLAY_UNIT
    row["penetration"] = s.penetration
    if s.solve_seconds is not None:
        row["solve_seconds"] = s.solve_seconds
    return pd.DataFrame([row])


def lmp_frame(bundle: ReportBundle) -> pd.DataFrame:
    """LMPs in $/MWh: one row per bus, one column per scenario."""
    frame = pd.DataFrame(
        [list(row) for row in bundle.lmp],
        columns=[f"t{t}" for t in bundle.scenarios],
    )
    frame.insert(0, "bus", list(bundle.buses))
    return frame


def dispatch_frame(bundle: ReportBundle) -> pd.DataFrame:
    return pd.DataFrame(
        [(r.scenario, r.kind, r.id, r.value) for r in bundle.dispatch],
        columns=["scenario", "kind", "id", "value"],
    )


_FRAMES = {"summary": summary_frame, "lmp": lmp_frame, "dispatch": dispatch_frame}


def write_report(
    bundle: ReportBundle,
    fmt: ReportFormat,
    stream: TextIO,
    table: ReportTable = "summary",
) -> None:
    """Write ``bundle`` as one JSON document or as one CSV ``table``."""
    if fmt == "json":
        json.dump(report_to_dict(bundle), stream, indent=2, allow_nan=False)
        stream.write("\n")
    elif fmt == "csv":
        _FRAMES[table](bundle).to_csv(stream, index=False, lineterminator="\n")
    else:
        raise ValueError(f"fmt must be 'json' or 'csv', got {fmt!r}")


def read_report(stream: TextIO) -> ReportBundle:
    try:
        data = json.load(stream)
    except json.JSONDecodeError as exc:
        raise StudyFormatError(f"invalid JSON: {exc}") from exc
    return report_from_dict(data)


def lmp_comparison(
    bundle_a: ReportBundle, bundle_b: ReportBundle, scenarios: Sequence[int]
) -> pd.DataFrame:
    """Bar-plot table of LMP pairs per bus for the selected scenario labels.

    Raises:
        ReportError: the bus sets differ or a scenario is missing from a bundle.
    """
    if set(bundle_a.buses) != set(bundle_b.buses):
        raise ReportError("reports cover different bus sets")
    for t in scenarios:
        if t not in bundle_a.scenarios or t not in bundle_b.scenarios:
            raise ReportError(f"scenario {t} is not in both reports")
    records = []
    for t in scenarios:
        for bus in bundle_a.buses:
            a = bundle_a.lmp_at(bus, t)
            b = bundle_b.lmp_at(bus, t)
            records.append((t, bus, a, b, b - a))
    return pd.DataFrame(records, columns=["scenario", "bus", "lmp_a", "lmp_b", "difference"])


def sweep_frame(points: Sequence[SweepPoint]) -> pd.DataFrame:
    """``(budget, objective, payment)`` table of a PST budget sweep."""
    return pd.DataFrame(
        [(p.pst_budget, p.objective, p.consumer_payment) for p in points],
        columns=["pst_budget", "objective", "consumer_payment"],
    )

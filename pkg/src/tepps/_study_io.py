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

"""Study assembly and the native JSON documents.

Every document carries ``schema_version``. Floats are written with ``repr``
precision so a write/read cycle is lossless; unlimited budgets are written
as ``null``.
"""

from __future__ import annotations

import contextlib
import json
import logging
import math
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, TextIO

from tepps._costs import pst_capital_cost
from tepps._exceptions import StudyFormatError, StudyValidationError
from tepps._matpower import RawBranch, RawBus, RawCaseFile, RawGenerator
from tepps._model import (
    Branch,
    BranchKind,
    Bus,
    Economics,
    Generator,
    LoadPoint,
    NetworkCase,
    Plan,
    PlanningStudy,
    PstCandidate,
    Scenario,
    Violation,
    WindFarm,
    require_valid,
)

if TYPE_CHECKING:
    from collections.abc import Iterable, Iterator, Mapping, Sequence

_log = logging.getLogger("tepps")

SCHEMA_VERSION = 1
UNLIMITED_RATING_MVA = 9900.0

Source = str | os.PathLike[str] | TextIO


@dataclass(frozen=True)
class ProspectiveLineSpec:
    from_bus: int
    to_bus: int
    reactance: float
    rating: float
    invest_cost: float
    id: str | None = None


@dataclass(frozen=True)
class PstCandidateSpec:
    """PST candidate on an existing branch; ``invest_cost`` defaults to the rating-based cost."""

    branch_id: str
    angle_min: float
    angle_max: float
    invest_cost: float | None = None


@dataclass(frozen=True)
class Budgets:
    pst: float = 0.0
    line: float = 0.0

    def __post_init__(self) -> None:
        if self.pst < 0:
            raise ValueError(f"pst budget must be >= 0, got {self.pst}")
        if self.line < 0:
            raise ValueError(f"line budget must be >= 0, got {self.line}")


@dataclass(frozen=True)
class CandidateSet:
    """Everything ``assemble_study`` needs besides the network and the scenarios."""

    lines: tuple[ProspectiveLineSpec, ...] = ()
    psts: tuple[PstCandidateSpec, ...] = ()
    wind_farms: tuple[WindFarm, ...] = ()
    budgets: Budgets = field(default_factory=Budgets)
    economics: Economics = field(default_factory=Economics)
    dual_big_m: float = 1e5
    horizon_hours: float | None = None


# --- Assembly ---


def corridor_ids(pairs: Iterable[tuple[int, int]], suffix: str = "") -> list[str]:
    """``"f-t"`` ids in order; repeated corridors get ``#2``, ``#3``, ..."""
    seen: Counter[str] = Counter()
    ids = []
    for f_bus, t_bus in pairs:
        base = f"{f_bus}-{t_bus}{suffix}"
        seen[base] += 1
        ids.append(base if seen[base] == 1 else f"{base}#{seen[base]}")
    return ids


def assemble_study(
    case: RawCaseFile,
    scenarios: Sequence[Scenario],
    prospective_lines: Sequence[ProspectiveLineSpec] = (),
    pst_candidates: Sequence[PstCandidateSpec] = (),
    wind_farms: Sequence[WindFarm] = (),
    budgets: Budgets | None = None,
    economics: Economics | None = None,
    dual_big_m: float = 1e5,
    horizon_hours: float | None = None,
) -> PlanningStudy:
    """Build and validate a planning study from a parsed case.

    Existing branches are named ``"f-t"`` and prospective lines ``"f-t+"``
    unless they carry an explicit id. A zero MATPOWER rating means
    unconstrained and becomes :data:`UNLIMITED_RATING_MVA`.

    Raises:
        StudyValidationError: the assembled study violates an invariant or a
            PST candidate names an unknown branch.
    """
    econ = economics or Economics()
    limits = budgets or Budgets()

    existing_ids = corridor_ids((b.from_bus, b.to_bus) for b in case.branches)
    pst_by_branch = {spec.branch_id: spec for spec in pst_candidates}
    unknown = sorted(set(pst_by_branch) - set(existing_ids))
    if unknown:
        raise StudyValidationError(
            [Violation(f"pst:{name}", "PST candidate on unknown branch") for name in unknown]
        )

    branches: list[Branch] = []
    for branch_id, raw in zip(existing_ids, case.branches):
        rating = raw.rating
        if rating <= 0:
            _log.warning("Branch %s has no rating; using %g MVA", branch_id, UNLIMITED_RATING_MVA)
            rating = UNLIMITED_RATING_MVA
        pst = None
        spec = pst_by_branch.get(branch_id)
        if spec is not None:
            cost = spec.invest_cost
            if cost is None:
                cost = pst_capital_cost(rating, econ.pst_unit_cost)
            pst = PstCandidate(
                angle_min=spec.angle_min, angle_max=spec.angle_max, invest_cost=cost
            )
        branches.append(
            Branch(
                id=branch_id,
                from_bus=raw.from_bus,
                to_bus=raw.to_bus,
                reactance=raw.reactance,
                rating=rating,
                pst=pst,
            )
        )

    default_ids = corridor_ids(((ln.from_bus, ln.to_bus) for ln in prospective_lines), "+")
    for default_id, line in zip(default_ids, prospective_lines):
        branches.append(
            Branch(
                id=line.id or default_id,
                from_bus=line.from_bus,
                to_bus=line.to_bus,
                reactance=line.reactance,
                rating=line.rating,
                kind=BranchKind.PROSPECTIVE,
                invest_cost=line.invest_cost,
            )
        )

    network = NetworkCase(
        buses=tuple(Bus(id=b.id, is_reference=b.is_reference) for b in case.buses),
        generators=tuple(
            Generator(
                id=f"G{i}",
                bus=g.bus,
                marginal_cost=g.marginal_cost,
                p_min=g.p_min,
                p_max=g.p_max,
            )
            for i, g in enumerate(case.generators, start=1)
        ),
        wind_farms=tuple(wind_farms),
        loads=tuple(
            LoadPoint(id=f"L{b.id}", bus=b.id, peak_demand=b.load) for b in case.buses if b.load
        ),
        branches=tuple(branches),
    )
    study = PlanningStudy(
        network=network,
        scenarios=tuple(scenarios),
        pst_budget=limits.pst,
        line_budget=limits.line,
        economics=econ,
        mva_base=case.mva_base,
        dual_big_m=dual_big_m,
        horizon_hours=horizon_hours,
    )
    return require_valid(study)


# --- Encoding helpers ---


def _budget_out(value: float) -> float | None:
    return None if math.isinf(value) else value


def _budget_in(value: Any) -> float:
    return math.inf if value is None else float(value)


def _require(data: Mapping[str, Any], key: str, where: str) -> Any:
    if not isinstance(data, dict):
        raise StudyFormatError(f"{where} must be an object")
    if key not in data:
        raise StudyFormatError(f"missing field {where}.{key}" if where else f"missing field {key}")
    return data[key]


def _check_header(data: Any, kind: str | None) -> dict[str, Any]:
    if not isinstance(data, dict):
        raise StudyFormatError("document must be a JSON object")
    version = _require(data, "schema_version", "")
    if version != SCHEMA_VERSION:
        raise StudyFormatError(
            f"schema_version {version!r} is not supported (expected {SCHEMA_VERSION})"
        )
    if kind is not None and data.get("kind") != kind:
        raise StudyFormatError(f"expected a {kind} document, got {data.get('kind')!r}")
    return data


@contextlib.contextmanager
def _opened(source: Source, mode: str) -> Iterator[TextIO]:
    if isinstance(source, (str, os.PathLike)):
        with open(source, mode, encoding="utf-8", newline="\n") as handle:
            yield handle
    else:
        yield source


def _load(source: Source, kind: str | None) -> dict[str, Any]:
    with _opened(source, "r") as stream:
        try:
            data = json.load(stream)
        except json.JSONDecodeError as exc:
            raise StudyFormatError(f"invalid JSON: {exc}") from exc
    return _check_header(data, kind)


def dump_document(data: Mapping[str, Any], target: Source) -> None:
    """Write ``data`` as deterministic, indented JSON."""
    with _opened(target, "w") as stream:
        json.dump(data, stream, indent=2, allow_nan=False)
        stream.write("\n")


def _economics_out(econ: Economics) -> dict[str, Any]:
    return {
        "interest_rate": econ.interest_rate,
        "line_lifetime": econ.line_lifetime,
        "pst_lifetime": econ.pst_lifetime,
        "pst_unit_cost": econ.pst_unit_cost,
    }


def _economics_in(data: Any) -> Economics:
    return Economics(
        interest_rate=float(_require(data, "interest_rate", "economics")),
        line_lifetime=int(_require(data, "line_lifetime", "economics")),
        pst_lifetime=int(_require(data, "pst_lifetime", "economics")),
        pst_unit_cost=float(_require(data, "pst_unit_cost", "economics")),
    )


def _budgets_out(pst: float, line: float) -> dict[str, Any]:
    return {"pst": _budget_out(pst), "line": _budget_out(line)}


def _budgets_in(data: Any) -> Budgets:
    return Budgets(
        pst=_budget_in(_require(data, "pst", "budgets")),
        line=_budget_in(_require(data, "line", "budgets")),
    )


def _farm_out(farm: WindFarm) -> dict[str, Any]:
    return {
        "id": farm.id,
        "bus": farm.bus,
        "capacity": farm.capacity,
        "cf_multiplier": farm.cf_multiplier,
        "cf_offset": farm.cf_offset,
        "cf_profile": None if farm.cf_profile is None else list(farm.cf_profile),
    }


def _farm_in(data: Any) -> WindFarm:
    profile = data.get("cf_profile") if isinstance(data, dict) else None
    return WindFarm(
        id=str(_require(data, "id", "wind_farm")),
        bus=int(_require(data, "bus", "wind_farm")),
        capacity=float(_require(data, "capacity", "wind_farm")),
        cf_multiplier=float(data.get("cf_multiplier", 1.0)),
        cf_offset=float(data.get("cf_offset", 0.0)),
        cf_profile=None if profile is None else tuple(float(v) for v in profile),
    )


def scenario_to_dict(scenario: Scenario) -> dict[str, Any]:
    return {
        "index": scenario.index,
        "load_level": scenario.load_level,
        "wind_cf": list(scenario.wind_cf),
        "hours": scenario.hours,
    }


def scenario_from_dict(data: Any) -> Scenario:
    return Scenario(
        index=int(_require(data, "index", "scenario")),
        load_level=float(_require(data, "load_level", "scenario")),
        wind_cf=tuple(float(v) for v in _require(data, "wind_cf", "scenario")),
        hours=float(_require(data, "hours", "scenario")),
    )


def _line_out(branch: Branch) -> dict[str, Any]:
    return {
        "id": branch.id,
        "from_bus": branch.from_bus,
        "to_bus": branch.to_bus,
        "reactance": branch.reactance,
        "rating": branch.rating,
        "invest_cost": branch.invest_cost,
    }


def _line_spec_in(data: Any) -> ProspectiveLineSpec:
    line_id = data.get("id") if isinstance(data, dict) else None
    return ProspectiveLineSpec(
        from_bus=int(_require(data, "from_bus", "line")),
        to_bus=int(_require(data, "to_bus", "line")),
        reactance=float(_require(data, "reactance", "line")),
        rating=float(_require(data, "rating", "line")),
        invest_cost=float(_require(data, "invest_cost", "line")),
        id=None if line_id is None else str(line_id),
    )


def _pst_spec_in(data: Any) -> PstCandidateSpec:
    cost = data.get("invest_cost") if isinstance(data, dict) else None
    return PstCandidateSpec(
        branch_id=str(_require(data, "branch", "pst")),
        angle_min=float(_require(data, "angle_min", "pst")),
        angle_max=float(_require(data, "angle_max", "pst")),
        invest_cost=None if cost is None else float(cost),
    )


# --- Study document ---


def study_to_dict(study: PlanningStudy) -> dict[str, Any]:
    network = study.network
    return {
        "schema_version": SCHEMA_VERSION,
        "mva_base": study.mva_base,
        "network": {
            "buses": [{"id": b.id, "reference": b.is_reference} for b in network.buses],
            "generators": [
                {
                    "id": g.id,
                    "bus": g.bus,
                    "marginal_cost": g.marginal_cost,
                    "p_min": g.p_min,
                    "p_max": g.p_max,
                }
                for g in network.generators
            ],
            "wind_farms": [_farm_out(w) for w in network.wind_farms],
            "loads": [
                {"id": ld.id, "bus": ld.bus, "peak_demand": ld.peak_demand}
                for ld in network.loads
            ],
            "branches": [
                {
                    "id": b.id,
                    "from_bus": b.from_bus,
                    "to_bus": b.to_bus,
                    "reactance": b.reactance,
                    "rating": b.rating,
                }
                for b in network.existing_branches
            ],
        },
        "scenarios": [scenario_to_dict(s) for s in study.scenarios],
        "candidates": {
            "lines": [_line_out(b) for b in network.prospective_branches],
            "psts": [
                {
                    "branch": b.id,
                    "angle_min": b.pst.angle_min,
                    "angle_max": b.pst.angle_max,
                    "invest_cost": b.pst.invest_cost,
                }
                for b in network.pst_branches
                if b.pst is not None
            ],
        },
        "budgets": _budgets_out(study.pst_budget, study.line_budget),
        "economics": _economics_out(study.economics),
        "dual_big_m": study.dual_big_m,
        "horizon_hours": study.horizon_hours,
    }


def study_from_dict(data: Any) -> PlanningStudy:
    """Decode a study document; the result is validated.

    Raises:
        StudyFormatError: wrong schema version or a missing field.
        StudyValidationError: the decoded study violates an invariant.
    """
    doc = _check_header(data, None)
    net = _require(doc, "network", "")
    candidates = _require(doc, "candidates", "")
    psts = {}
    for item in _require(candidates, "psts", "candidates"):
        spec = _pst_spec_in(item)
        psts[spec.branch_id] = PstCandidate(
            angle_min=spec.angle_min,
            angle_max=spec.angle_max,
            invest_cost=float(_require(item, "invest_cost", "pst")),
        )
    existing = []
    for item in _require(net, "branches", "network"):
        branch_id = str(_require(item, "id", "branch"))
        existing.append(
            Branch(
                id=branch_id,
                from_bus=int(_require(item, "from_bus", "branch")),
                to_bus=int(_require(item, "to_bus", "branch")),
                reactance=float(_require(item, "reactance", "branch")),
                rating=float(_require(item, "rating", "branch")),
                pst=psts.pop(branch_id, None),
            )
        )
    if psts:
        raise StudyValidationError(
            [Violation(f"pst:{name}", "PST candidate on unknown branch") for name in sorted(psts)]
        )
    prospective = [
        Branch(
            id=str(_require(item, "id", "line")),
            from_bus=int(_require(item, "from_bus", "line")),
            to_bus=int(_require(item, "to_bus", "line")),
            reactance=float(_require(item, "reactance", "line")),
            rating=float(_require(item, "rating", "line")),
            kind=BranchKind.PROSPECTIVE,
            invest_cost=float(_require(item, "invest_cost", "line")),
        )
        for item in _require(candidates, "lines", "candidates")
    ]
    network = NetworkCase(
        buses=tuple(
            Bus(id=int(_require(b, "id", "bus")), is_reference=bool(b.get("reference", False)))
            for b in _require(net, "buses", "network")
        ),
        generators=tuple(
            Generator(
                id=str(_require(g, "id", "generator")),
                bus=int(_require(g, "bus", "generator")),
                marginal_cost=float(_require(g, "marginal_cost", "generator")),
                p_min=float(_require(g, "p_min", "generator")),
                p_max=float(_require(g, "p_max", "generator")),
            )
            for g in _require(net, "generators", "network")
        ),
        wind_farms=tuple(_farm_in(w) for w in _require(net, "wind_farms", "network")),
        loads=tuple(
            LoadPoint(
                id=str(_require(ld, "id", "load")),
                bus=int(_require(ld, "bus", "load")),
                peak_demand=float(_require(ld, "peak_demand", "load")),
            )
            for ld in _require(net, "loads", "network")
        ),
        branches=tuple(existing + prospective),
    )
    budgets = _budgets_in(_require(doc, "budgets", ""))
    horizon = doc.get("horizon_hours")
    study = PlanningStudy(
        network=network,
        scenarios=tuple(scenario_from_dict(s) for s in _require(doc, "scenarios", "")),
        pst_budget=budgets.pst,
        line_budget=budgets.line,
        economics=_economics_in(_require(doc, "economics", "")),
        mva_base=float(_require(doc, "mva_base", "")),
        dual_big_m=float(doc.get("dual_big_m", 1e5)),
        horizon_hours=None if horizon is None else float(horizon),
    )
    return require_valid(study)


def write_study(study: PlanningStudy, target: Source) -> None:
    """Write ``study``; prospective lines are stored as candidates after the existing branches."""
    dump_document(study_to_dict(study), target)


def read_study(source: Source) -> PlanningStudy:
    return study_from_dict(_load(source, None))


# --- Network, scenario, candidate and plan documents ---


def write_case(case: RawCaseFile, target: Source) -> None:
    dump_document(
        {
            "schema_version": SCHEMA_VERSION,
            "kind": "network",
            "mva_base": case.mva_base,
            "buses": [{"id": b.id, "type": b.bus_type, "load": b.load} for b in case.buses],
            "generators": [
                {
                    "bus": g.bus,
                    "p_min": g.p_min,
                    "p_max": g.p_max,
                    "cost_model": g.cost_model,
                    "cost": list(g.cost),
                }
                for g in case.generators
            ],
            "branches": [
                {
                    "from_bus": b.from_bus,
                    "to_bus": b.to_bus,
                    "reactance": b.reactance,
                    "rating": b.rating,
                }
                for b in case.branches
            ],
        },
        target,
    )


def read_case(source: Source) -> RawCaseFile:
    doc = _load(source, "network")
    return RawCaseFile(
        buses=tuple(
            RawBus(
                id=int(_require(b, "id", "bus")),
                bus_type=int(_require(b, "type", "bus")),
                load=float(_require(b, "load", "bus")),
            )
            for b in _require(doc, "buses", "")
        ),
        generators=tuple(
            RawGenerator(
                bus=int(_require(g, "bus", "generator")),
                p_min=float(_require(g, "p_min", "generator")),
                p_max=float(_require(g, "p_max", "generator")),
                cost_model=int(_require(g, "cost_model", "generator")),
                cost=tuple(float(c) for c in _require(g, "cost", "generator")),
            )
            for g in _require(doc, "generators", "")
        ),
        branches=tuple(
            RawBranch(
                from_bus=int(_require(b, "from_bus", "branch")),
                to_bus=int(_require(b, "to_bus", "branch")),
                reactance=float(_require(b, "reactance", "branch")),
                rating=float(_require(b, "rating", "branch")),
            )
            for b in _require(doc, "branches", "")
        ),
        mva_base=float(_require(doc, "mva_base", "")),
    )


def write_scenarios(scenarios: Sequence[Scenario], target: Source) -> None:
    dump_document(
        {
            "schema_version": SCHEMA_VERSION,
            "kind": "scenarios",
            "scenarios": [scenario_to_dict(s) for s in scenarios],
        },
        target,
    )


def read_scenarios(source: Source) -> tuple[Scenario, ...]:
    doc = _load(source, "scenarios")
    return tuple(scenario_from_dict(s) for s in _require(doc, "scenarios", ""))


def write_candidates(candidates: CandidateSet, target: Source) -> None:
    dump_document(
        {
            "schema_version": SCHEMA_VERSION,
            "kind": "candidates",
            "lines": [
                {
                    "id": ln.id,
                    "from_bus": ln.from_bus,
                    "to_bus": ln.to_bus,
                    "reactance": ln.reactance,
                    "rating": ln.rating,
                    "invest_cost": ln.invest_cost,
                }
                for ln in candidates.lines
            ],
            "psts": [
                {
                    "branch": p.branch_id,
                    "angle_min": p.angle_min,
                    "angle_max": p.angle_max,
                    "invest_cost": p.invest_cost,
                }
                for p in candidates.psts
            ],
            "wind_farms": [_farm_out(w) for w in candidates.wind_farms],
            "budgets": _budgets_out(candidates.budgets.pst, candidates.budgets.line),
            "economics": _economics_out(candidates.economics),
            "dual_big_m": candidates.dual_big_m,
            "horizon_hours": candidates.horizon_hours,
        },
        target,
    )


def read_candidates(source: Source) -> CandidateSet:
    doc = _load(source, "candidates")
    horizon = doc.get("horizon_hours")
    return CandidateSet(
        lines=tuple(_line_spec_in(item) for item in doc.get("lines", [])),
        psts=tuple(_pst_spec_in(item) for item in doc.get("psts", [])),
        wind_farms=tuple(_farm_in(item) for item in doc.get("wind_farms", [])),
        budgets=_budgets_in(_require(doc, "budgets", "")),
        economics=_economics_in(_require(doc, "economics", "")),
        dual_big_m=float(doc.get("dual_big_m", 1e5)),
        horizon_hours=None if horizon is None else float(horizon),
    )


def assemble_from_documents(
    case: RawCaseFile, scenarios: Sequence[Scenario], candidates: CandidateSet
) -> PlanningStudy:
    return assemble_study(
        case,
        scenarios,
        prospective_lines=candidates.lines,
        pst_candidates=candidates.psts,
        wind_farms=candidates.wind_farms,
        budgets=candidates.budgets,
        economics=candidates.economics,
        dual_big_m=candidates.dual_big_m,
        horizon_hours=candidates.horizon_hours,
    )


def write_plan(plan: Plan, study: PlanningStudy, target: Source) -> None:
    dump_document(
        {
            "schema_version": SCHEMA_VERSION,
            "kind": "plan",
            "psts": plan.built_pst_ids(study),
            "lines": plan.built_line_ids(study),
        },
        target,
    )


def read_plan(source: Source, study: PlanningStudy) -> Plan:
    """Decode a plan document against ``study``'s candidates.

    Raises:
        StudyValidationError: the plan names an unknown candidate.
    """
    doc = _load(source, "plan")
    pst_ids = [str(v) for v in _require(doc, "psts", "")]
    line_ids = [str(v) for v in _require(doc, "lines", "")]
    return Plan.from_ids(study, pst_ids, line_ids)

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

"""Domain types shared by every tepps module.

Units: power in MW, angles in radians, money in M$, energy in MWh, marginal
costs and prices in $/MWh. Per-unit conversion happens only inside the
formulation.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import TYPE_CHECKING

import numpy as np

from tepps._exceptions import StudyValidationError

if TYPE_CHECKING:
    from collections.abc import Mapping

    from numpy.typing import NDArray


class BranchKind(enum.Enum):
    EXISTING = "existing"
    PROSPECTIVE = "prospective"


@dataclass(frozen=True)
class Bus:
    id: int
    is_reference: bool = False


@dataclass(frozen=True)
class Generator:
    id: str
    bus: int
    marginal_cost: float
    p_min: float
    p_max: float


@dataclass(frozen=True)
class WindFarm:
    """Wind farm with zero marginal cost.

    The available capacity factor in a scenario comes from ``cf_profile`` (one
    value per scenario) when present; otherwise from the scenario's own
    ``wind_cf``. A single-valued scenario ``wind_cf`` is a shared base profile
    that each farm transforms as ``base * cf_multiplier + cf_offset``, clamped
    to [0, 1].
    """

    id: str
    bus: int
    capacity: float
    cf_multiplier: float = 1.0
    cf_offset: float = 0.0
    cf_profile: tuple[float, ...] | None = None


@dataclass(frozen=True)
class LoadPoint:
    id: str
    bus: int
    peak_demand: float


@dataclass(frozen=True)
class PstCandidate:
    angle_min: float
    angle_max: float
    invest_cost: float


@dataclass(frozen=True)
class Branch:
    id: str
    from_bus: int
    to_bus: int
    reactance: float
    rating: float
    kind: BranchKind = BranchKind.EXISTING
    invest_cost: float = 0.0
    pst: PstCandidate | None = None

    @property
    def susceptance(self) -> float:
        return 1.0 / self.reactance

    @property
    def is_prospective(self) -> bool:
        return self.kind is BranchKind.PROSPECTIVE


@dataclass(frozen=True)
class Scenario:
    """One weighted operating point. ``index`` is the 1-based label used in reports."""

    index: int
    load_level: float
    wind_cf: tuple[float, ...]
    hours: float


@dataclass(frozen=True)
class Economics:
    interest_rate: float = 0.05
    line_lifetime: int = 20
    pst_lifetime: int = 15
    pst_unit_cost: float = 100.0


@dataclass(frozen=True)
class NetworkCase:
    """Buses, units, loads and branches of one network.

    Existing branches always precede prospective ones; construction reorders
    ``branches`` stably, so the relative order inside each group is kept.
    """

    buses: tuple[Bus, ...]
    generators: tuple[Generator, ...]
    wind_farms: tuple[WindFarm, ...]
    loads: tuple[LoadPoint, ...]
    branches: tuple[Branch, ...]

    def __post_init__(self) -> None:
        ordered = tuple(sorted(self.branches, key=lambda b: b.is_prospective))
        object.__setattr__(self, "branches", ordered)

    @cached_property
    def bus_position(self) -> dict[int, int]:
        return {bus.id: i for i, bus in enumerate(self.buses)}

    @cached_property
    def reference_bus(self) -> Bus:
        refs = [bus for bus in self.buses if bus.is_reference]
        if len(refs) != 1:
            raise StudyValidationError([Violation("network", "exactly one reference bus")])
        return refs[0]

    @cached_property
    def existing_branches(self) -> tuple[Branch, ...]:
        return tuple(b for b in self.branches if not b.is_prospective)

    @cached_property
    def prospective_branches(self) -> tuple[Branch, ...]:
        return tuple(b for b in self.branches if b.is_prospective)

    @cached_property
    def pst_branches(self) -> tuple[Branch, ...]:
        return tuple(b for b in self.branches if b.pst is not None)

    @cached_property
    def peak_bus_demand(self) -> NDArray[np.float64]:
        """Peak demand per bus position in MW."""
        demand = np.zeros(len(self.buses))
        for load in self.loads:
            demand[self.bus_position[load.bus]] += load.peak_demand
        return demand


@dataclass(frozen=True)
class PlanningStudy:
    network: NetworkCase
    scenarios: tuple[Scenario, ...]
    pst_budget: float
    line_budget: float
    economics: Economics = field(default_factory=Economics)
    mva_base: float = 100.0
    dual_big_m: float = 1e5
    horizon_hours: float | None = None

    @property
    def candidate_count(self) -> int:
        return len(self.network.pst_branches) + len(self.network.prospective_branches)

    def bus_demand(self, t: int) -> NDArray[np.float64]:
        """Demand per bus position in MW for the scenario at position ``t``."""
        return self.network.peak_bus_demand * self.scenarios[t].load_level

    def wind_factors(self, t: int) -> tuple[float, ...]:
        """Capacity factor per wind farm for the scenario at position ``t``."""
        scenario = self.scenarios[t]
        farms = self.network.wind_farms
        factors: list[float] = []
        for w, farm in enumerate(farms):
            if farm.cf_profile is not None:
                factors.append(farm.cf_profile[t])
            elif len(scenario.wind_cf) == 1:
                raw = scenario.wind_cf[0] * farm.cf_multiplier + farm.cf_offset
                factors.append(min(1.0, max(0.0, raw)))
            else:
                factors.append(scenario.wind_cf[w])
        return tuple(factors)

    def wind_available(self, t: int) -> NDArray[np.float64]:
        """Available wind power per farm in MW for the scenario at position ``t``."""
        caps = np.array([farm.capacity for farm in self.network.wind_farms], dtype=float)
        return caps * np.array(self.wind_factors(t), dtype=float)

    def with_budgets(self, pst_budget: float, line_budget: float) -> PlanningStudy:
        return replace(self, pst_budget=pst_budget, line_budget=line_budget)


@dataclass(frozen=True)
class Plan:
    """Binary investment decisions in network order: PST candidates, then prospective lines."""

    pst_built: tuple[bool, ...]
    lines_built: tuple[bool, ...]

    @staticmethod
    def empty(study: PlanningStudy) -> Plan:
        network = study.network
        return Plan(
            pst_built=(False,) * len(network.pst_branches),
            lines_built=(False,) * len(network.prospective_branches),
        )

    @staticmethod
    def from_vector(study: PlanningStudy, values: NDArray[np.float64] | list[float]) -> Plan:
        n_pst = len(study.network.pst_branches)
        flags = tuple(bool(v > 0.5) for v in values)
        return Plan(pst_built=flags[:n_pst], lines_built=flags[n_pst:])

    @staticmethod
    def from_ids(study: PlanningStudy, pst_ids: list[str], line_ids: list[str]) -> Plan:
        network = study.network
        known_pst = {b.id for b in network.pst_branches}
        known_lines = {b.id for b in network.prospective_branches}
        unknown = sorted((set(pst_ids) - known_pst) | (set(line_ids) - known_lines))
        if unknown:
            raise StudyValidationError(
                [Violation(f"plan:{name}", "unknown candidate") for name in unknown]
            )
        return Plan(
            pst_built=tuple(b.id in pst_ids for b in network.pst_branches),
            lines_built=tuple(b.id in line_ids for b in network.prospective_branches),
        )

    def as_vector(self) -> NDArray[np.float64]:
        return np.array(
            [float(v) for v in (*self.pst_built, *self.lines_built)], dtype=float
        )

    def built_pst_ids(self, study: PlanningStudy) -> list[str]:
        return [b.id for b, on in zip(study.network.pst_branches, self.pst_built) if on]

    def built_line_ids(self, study: PlanningStudy) -> list[str]:
        return [b.id for b, on in zip(study.network.prospective_branches, self.lines_built) if on]


@dataclass(frozen=True)
class DispatchResult:
    """Market clearing of one scenario. Values keyed by entity id."""

    scenario: int
    hours: float
    generation: Mapping[str, float]
    wind: Mapping[str, float]
    wind_available: Mapping[str, float]
    flows: Mapping[str, float]
    angles: Mapping[int, float]
    pst_shift: Mapping[str, float]
    pst_angle: Mapping[str, float]
    lmp: Mapping[int, float]
    demand: Mapping[int, float]
    payment: float


@dataclass(frozen=True)
class PlanReport:
    plan: Plan
    annualized_line_investment: float
    annualized_pst_investment: float
    line_investment_total: float
    pst_investment_total: float
    consumer_payment: float
    objective: float
    curtailment: Mapping[str, float]
    penetration: float
    dispatch: tuple[DispatchResult, ...]
    degenerate_scenarios: tuple[int, ...] = ()


@dataclass(frozen=True)
class Violation:
    entity: str
    rule: str

    def __str__(self) -> str:
        return f"{self.entity}: {self.rule}"


def _duplicates(ids: list[object]) -> list[object]:
    return [key for key, count in Counter(ids).items() if count > 1]


def _validate_network(network: NetworkCase, n_scenarios: int) -> list[Violation]:
    out: list[Violation] = []
    bus_ids = {bus.id for bus in network.buses}

    refs = [bus for bus in network.buses if bus.is_reference]
    if len(refs) > 1:
        out.append(Violation("network", "multiple reference buses"))
    elif not refs:
        out.append(Violation("network", "no reference bus"))
    for dup in _duplicates([bus.id for bus in network.buses]):
        out.append(Violation(f"bus:{dup}", "duplicate bus id"))
    for dup in _duplicates(
        [g.id for g in network.generators]
        + [w.id for w in network.wind_farms]
        + [ld.id for ld in network.loads]
        + [b.id for b in network.branches]
    ):
        out.append(Violation(f"id:{dup}", "duplicate id"))

    for gen in network.generators:
        if gen.bus not in bus_ids:
            out.append(Violation(f"generator:{gen.id}", "unknown bus"))
        if not (0.0 <= gen.p_min <= gen.p_max):
            out.append(Violation(f"generator:{gen.id}", "requires 0 <= p_min <= p_max"))

    for farm in network.wind_farms:
        entity = f"wind_farm:{farm.id}"
        if farm.bus not in bus_ids:
            out.append(Violation(entity, "unknown bus"))
        if farm.capacity <= 0:
            out.append(Violation(entity, "capacity must be > 0"))
        if farm.cf_multiplier <= 0:
            out.append(Violation(entity, "cf_multiplier must be > 0"))
        if farm.cf_profile is not None:
            if len(farm.cf_profile) != n_scenarios:
                out.append(Violation(entity, "cf_profile length differs from scenario count"))
            if any(not (0.0 <= cf <= 1.0) for cf in farm.cf_profile):
                out.append(Violation(entity, "capacity factor outside [0, 1]"))

    for load in network.loads:
        if load.bus not in bus_ids:
            out.append(Violation(f"load:{load.id}", "unknown bus"))
        if load.peak_demand < 0:
            out.append(Violation(f"load:{load.id}", "peak_demand must be >= 0"))

    for branch in network.branches:
        entity = f"branch:{branch.id}"
        if branch.from_bus not in bus_ids or branch.to_bus not in bus_ids:
            out.append(Violation(entity, "unknown bus"))
        if branch.from_bus == branch.to_bus:
            out.append(Violation(entity, "from_bus equals to_bus"))
        if branch.reactance <= 0:
            out.append(Violation(entity, "reactance must be > 0"))
        if branch.rating <= 0:
            out.append(Violation(entity, "rating must be > 0"))
        if branch.invest_cost < 0:
            out.append(Violation(entity, "invest_cost must be >= 0"))
        if branch.pst is not None:
            if branch.is_prospective:
                out.append(Violation(entity, "PST on non-existing branch"))
            if not (branch.pst.angle_min < 0.0 < branch.pst.angle_max):
                out.append(Violation(entity, "PST requires angle_min < 0 < angle_max"))
            if branch.pst.invest_cost < 0:
                out.append(Violation(entity, "PST invest_cost must be >= 0"))
    return out


def validate_study(study: PlanningStudy) -> list[Violation]:
    """Return every invariant violation of ``study``; empty when well formed."""
    network = study.network
    out = _validate_network(network, len(study.scenarios))
    n_farms = len(network.wind_farms)

    for scenario in study.scenarios:
        entity = f"scenario:{scenario.index}"
        if scenario.hours <= 0:
            out.append(Violation(entity, "hours must be > 0"))
        if scenario.load_level < 0:
            out.append(Violation(entity, "load_level must be >= 0"))
        if any(not (0.0 <= cf <= 1.0) for cf in scenario.wind_cf):
            out.append(Violation(entity, "capacity factor outside [0, 1]"))
        needs_cf = any(farm.cf_profile is None for farm in network.wind_farms)
        if needs_cf and len(scenario.wind_cf) not in (1, n_farms):
            out.append(Violation(entity, "wind_cf length does not match wind-farm count"))
    for dup in _duplicates([s.index for s in study.scenarios]):
        out.append(Violation(f"scenario:{dup}", "duplicate scenario index"))

    if study.horizon_hours is not None:
        total = sum(s.hours for s in study.scenarios)
        if abs(total - study.horizon_hours) > 1e-6 * max(1.0, study.horizon_hours):
            out.append(
                Violation(
                    "scenarios", f"hours sum to {total:g}, horizon is {study.horizon_hours:g}"
                )
            )

    econ = study.economics
    if econ.interest_rate < 0:
        out.append(Violation("economics", "interest_rate must be >= 0"))
    if econ.line_lifetime < 1 or econ.pst_lifetime < 1:
        out.append(Violation("economics", "lifetimes must be >= 1"))
    if econ.pst_unit_cost < 0:
        out.append(Violation("economics", "pst_unit_cost must be >= 0"))
    if study.pst_budget < 0 or study.line_budget < 0:
        out.append(Violation("budgets", "budgets must be >= 0"))
    if study.mva_base <= 0:
        out.append(Violation("study", "mva_base must be > 0"))
    if study.dual_big_m <= 0:
        out.append(Violation("study", "dual_big_m must be > 0"))
    return out


def require_valid(study: PlanningStudy) -> PlanningStudy:
    """Raise :class:`StudyValidationError` unless ``study`` is well formed."""
    violations = validate_study(study)
    if violations:
        raise StudyValidationError(violations)
    return study

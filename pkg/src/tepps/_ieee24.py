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

"""Reference 24-bus planning studies with wind farms and PST candidates."""

from __future__ import annotations

import math
from importlib import resources

from tepps._matpower import RawCaseFile, apply_modifiers, parse_matpower
from tepps._model import Economics, PlanningStudy, WindFarm
from tepps._scenarios import REFERENCE_SCENARIO_TABLE, scenarios_from_table
from tepps._study_io import (
    Budgets,
    CandidateSet,
    ProspectiveLineSpec,
    PstCandidateSpec,
    assemble_from_documents,
)

LOAD_SCALE = 1.5
GEN_SCALE = 1.5
THERMAL_DERATE = 0.6

WIND_CAPACITY_MW = 1200.0
WIND_DERATING = 0.10
PST_ANGLE_LIMIT = math.radians(5.0)

# (from bus, to bus, reactance p.u., rating MW, investment M$)
PROSPECTIVE_LINES: tuple[tuple[int, int, float, float, float], ...] = (
    (1, 2, 0.0139, 105.0, 3.9094),
    (2, 6, 0.1920, 105.0, 54.0000),
    (6, 10, 0.0605, 105.0, 17.0156),
    (7, 8, 0.0614, 105.0, 17.2688),
    (8, 9, 0.1651, 105.0, 46.4344),
    (8, 10, 0.1651, 105.0, 46.4344),
    (9, 12, 0.0839, 240.0, 132.4737),
)

PST_BRANCHES = ("1-2", "1-3", "1-5", "2-4", "2-6", "3-9", "4-9", "5-10", "7-8", "8-9")

# PST budget per case; line budgets are zero for case 1 and unlimited otherwise.
CASE_PST_BUDGETS = {1: 0.0, 2: 0.0, 3: 15.0, 4: 30.0}


def load_case24() -> RawCaseFile:
    """The bundled MATPOWER case with load, generation and rating modifiers applied."""
    text = resources.files("tepps").joinpath("data/case24_ieee_rts.m").read_text("utf-8")
    return apply_modifiers(
        parse_matpower(text),
        load_scale=LOAD_SCALE,
        gen_scale=GEN_SCALE,
        thermal_derate=THERMAL_DERATE,
    )


def wind_farms(relative_derating: bool = True) -> tuple[WindFarm, ...]:
    """Farms at buses 14 and 10; the bus 10 farm sees lower capacity factors.

    With ``relative_derating`` the bus 10 factor is 90 % of the shared one;
    otherwise it is 0.10 lower in absolute terms.
    """
    if relative_derating:
        bus10 = WindFarm(id="W10", bus=10, capacity=WIND_CAPACITY_MW, cf_multiplier=0.9)
    else:
        bus10 = WindFarm(
            id="W10", bus=10, capacity=WIND_CAPACITY_MW, cf_offset=-WIND_DERATING
        )
    return (bus10, WindFarm(id="W14", bus=14, capacity=WIND_CAPACITY_MW))


def case_candidates(
    case_number: int, economics: Economics | None = None, relative_derating: bool = True
) -> CandidateSet:
    if case_number not in CASE_PST_BUDGETS:
        raise ValueError(f"case_number must be one of 1-4, got {case_number}")
    econ = economics or Economics()
    line_budget = 0.0 if case_number == 1 else math.inf
    return CandidateSet(
        lines=tuple(
            ProspectiveLineSpec(
                from_bus=f, to_bus=t, reactance=x, rating=rating, invest_cost=cost
            )
            for f, t, x, rating, cost in PROSPECTIVE_LINES
        ),
        psts=tuple(
            PstCandidateSpec(
                branch_id=branch,
                angle_min=-PST_ANGLE_LIMIT,
                angle_max=PST_ANGLE_LIMIT,
            )
            for branch in PST_BRANCHES
        ),
        wind_farms=wind_farms(relative_derating),
        budgets=Budgets(pst=CASE_PST_BUDGETS[case_number], line=line_budget),
        economics=econ,
        horizon_hours=8760.0,
    )


def ieee24_study(case_number: int, relative_derating: bool = True) -> PlanningStudy:
    """Planning study for reference case 1-4 on the modified 24-bus system.

    Case 1 allows no reinforcement, case 2 allows lines only, cases 3 and 4
    add a PST budget of 15 and 30 M$.
    """
    candidates = case_candidates(case_number, relative_derating=relative_derating)
    return assemble_from_documents(
        load_case24(), scenarios_from_table(REFERENCE_SCENARIO_TABLE), candidates
    )

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

from __future__ import annotations

import dataclasses

import numpy as np
import pytest

from tepps import (
    Branch,
    BranchKind,
    Bus,
    Plan,
    PlanningStudy,
    PstCandidate,
    Scenario,
    StudyValidationError,
    WindFarm,
    require_valid,
    validate_study,
)
from tests.studies import pst_triangle_study, three_bus_line_study, two_bus_study, wind_study


def _rules(study: PlanningStudy) -> set[str]:
    return {v.rule for v in validate_study(study)}


def _with_network(study: PlanningStudy, **changes: object) -> PlanningStudy:
    return dataclasses.replace(study, network=dataclasses.replace(study.network, **changes))


# --- Validation ---


class TestValidateStudy:
    def test_fixtures_are_valid(self) -> None:
        for study in (two_bus_study(), three_bus_line_study(), pst_triangle_study(), wind_study()):
            assert validate_study(study) == []
            assert require_valid(study) is study

    def test_no_reference_bus(self) -> None:
        study = _with_network(two_bus_study(), buses=(Bus(1), Bus(2)))
        assert "no reference bus" in _rules(study)

    def test_two_reference_buses(self) -> None:
        study = _with_network(
            two_bus_study(), buses=(Bus(1, is_reference=True), Bus(2, is_reference=True))
        )
        assert "multiple reference buses" in _rules(study)

    def test_duplicate_ids(self) -> None:
        study = two_bus_study()
        branch = study.network.branches[0]
        study = _with_network(study, branches=(branch, branch))
        assert "duplicate id" in _rules(study)

    def test_unknown_bus(self) -> None:
        study = _with_network(two_bus_study(), branches=(Branch("1-9", 1, 9, 0.1, 100.0),))
        assert "unknown bus" in _rules(study)

    def test_non_positive_reactance(self) -> None:
        study = _with_network(two_bus_study(), branches=(Branch("1-2", 1, 2, 0.0, 100.0),))
        assert "reactance must be > 0" in _rules(study)

    def test_pst_on_prospective_line(self) -> None:
        branch = Branch(
            "1-2+",
            1,
            2,
            0.1,
            100.0,
            kind=BranchKind.PROSPECTIVE,
            invest_cost=1.0,
            pst=PstCandidate(-0.1, 0.1, 1.0),
        )
        study = two_bus_study()
        study = _with_network(study, branches=(*study.network.branches, branch))
        assert "PST on non-existing branch" in _rules(study)

    def test_pst_angle_range_must_straddle_zero(self) -> None:
        branch = Branch("1-2", 1, 2, 0.1, 100.0, pst=PstCandidate(0.0, 0.1, 1.0))
        study = _with_network(two_bus_study(), branches=(branch,))
        assert "PST requires angle_min < 0 < angle_max" in _rules(study)

    def test_scenario_hours(self) -> None:
        study = dataclasses.replace(
            two_bus_study(), scenarios=(Scenario(1, 1.0, (), hours=0.0),)
        )
        assert "hours must be > 0" in _rules(study)

    def test_capacity_factor_range(self) -> None:
        study = dataclasses.replace(
            wind_study(), scenarios=(Scenario(1, 1.0, (1.2,), hours=10.0),)
        )
        assert "capacity factor outside [0, 1]" in _rules(study)

    def test_horizon_mismatch(self) -> None:
        study = dataclasses.replace(wind_study(), horizon_hours=8760.0)
        assert any("horizon" in rule for rule in _rules(study))

    def test_horizon_match(self) -> None:
        study = dataclasses.replace(wind_study(), horizon_hours=1000.0)
        assert validate_study(study) == []

    def test_negative_budget(self) -> None:
        study = dataclasses.replace(two_bus_study(), pst_budget=-1.0)
        assert "budgets must be >= 0" in _rules(study)

    def test_require_valid_raises_with_every_violation(self) -> None:
        study = _with_network(two_bus_study(), buses=(Bus(1), Bus(1)))
        with pytest.raises(StudyValidationError) as excinfo:
            require_valid(study)
        rules = {v.rule for v in excinfo.value.violations}
        assert {"no reference bus", "duplicate bus id"} <= rules


# --- Derived quantities ---


class TestDerived:
    def test_bus_demand_scales_with_load_level(self) -> None:
        study = dataclasses.replace(
            wind_study(), scenarios=(Scenario(1, 0.5, (0.1,), hours=1.0),)
        )
        assert np.allclose(study.bus_demand(0), [0.0, 50.0])

    def test_shared_wind_factor(self) -> None:
        study = wind_study()
        assert study.wind_factors(0) == (0.8,)
        assert np.allclose(study.wind_available(0), [80.0])

    def test_farm_multiplier_and_offset(self) -> None:
        study = wind_study()
        farms = (
            WindFarm("W1", bus=1, capacity=100.0, cf_multiplier=0.9),
            WindFarm("W2", bus=2, capacity=100.0, cf_offset=-0.1),
            WindFarm("W3", bus=2, capacity=100.0, cf_offset=-0.5),
        )
        study = _with_network(study, wind_farms=farms)
        factors = study.wind_factors(1)
        assert factors == pytest.approx((0.18, 0.1, 0.0))

    def test_farm_profile_wins(self) -> None:
        farm = WindFarm("W1", bus=1, capacity=100.0, cf_profile=(0.3, 0.6))
        study = _with_network(wind_study(), wind_farms=(farm,))
        assert study.wind_factors(1) == (0.6,)

    def test_candidate_count(self) -> None:
        assert three_bus_line_study().candidate_count == 1
        assert pst_triangle_study().candidate_count == 1
        assert two_bus_study().candidate_count == 0

    def test_prospective_branches_follow_existing_ones(self) -> None:
        study = three_bus_line_study()
        line_13, line_23, candidate = study.network.branches
        reordered = _with_network(study, branches=(candidate, line_13, line_23))
        assert [b.id for b in reordered.network.branches] == ["1-3", "2-3", "1-3+"]
        assert reordered == study

    def test_with_budgets(self) -> None:
        study = pst_triangle_study().with_budgets(pst_budget=0.0, line_budget=3.0)
        assert (study.pst_budget, study.line_budget) == (0.0, 3.0)


# --- Plans ---


class TestPlan:
    def test_empty(self) -> None:
        plan = Plan.empty(pst_triangle_study())
        assert plan.pst_built == (False,)
        assert plan.lines_built == ()

    def test_vector_order_is_psts_then_lines(self) -> None:
        study = three_bus_line_study()
        plan = Plan.from_vector(study, [1.0])
        assert plan.lines_built == (True,)
        assert plan.as_vector().tolist() == [1.0]

    def test_ids(self) -> None:
        study = three_bus_line_study()
        plan = Plan.from_ids(study, [], ["1-3+"])
        assert plan.built_line_ids(study) == ["1-3+"]
        assert plan.built_pst_ids(study) == []

    def test_unknown_id(self) -> None:
        with pytest.raises(StudyValidationError, match="unknown candidate"):
            Plan.from_ids(three_bus_line_study(), ["1-3"], [])

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

"""The single-level MILP and exhaustive enumeration must agree."""

from __future__ import annotations

import pytest

from tepps import (
    PlanningStudy,
    branch_and_bound,
    build_single_level_milp,
    enumerate_oracle,
    evaluate_plan,
    extract_solution,
)
from tests.studies import (
    pst_triangle_study,
    random_study,
    three_bus_line_study,
    two_bus_study,
    wind_study,
)

FIXTURES = {
    "two_bus": two_bus_study(),
    "line_built": three_bus_line_study(line_cost=10.0),
    "line_skipped": three_bus_line_study(line_cost=30.0),
    "line_over_budget": three_bus_line_study(line_cost=10.0, line_budget=5.0),
    "pst": pst_triangle_study(),
    "pst_over_budget": pst_triangle_study(pst_budget=5.0),
    "wind": wind_study(),
}


def _assert_agree(study: PlanningStudy) -> None:
    oracle = enumerate_oracle(study)
    milp = build_single_level_milp(study, mipgap=0.0)
    solution = branch_and_bound(milp)
    plan, _ = extract_solution(solution, study, milp.layout)
    assert solution.objective == pytest.approx(oracle.objective, rel=1e-6, abs=1e-6)
    # ties may pick different plans but never different costs
    assert evaluate_plan(study, plan).objective == pytest.approx(
        oracle.objective, rel=1e-6, abs=1e-6
    )


class TestEquivalence:
    @pytest.mark.parametrize("name", sorted(FIXTURES))
    def test_fixtures(self, name: str) -> None:
        _assert_agree(FIXTURES[name])

    @pytest.mark.parametrize("seed", range(20))
    def test_random_studies(self, seed: int) -> None:
        _assert_agree(random_study(seed))

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", range(20, 70))
    def test_more_random_studies(self, seed: int) -> None:
        _assert_agree(random_study(seed, n_bus=5, n_lines=3, n_psts=2))

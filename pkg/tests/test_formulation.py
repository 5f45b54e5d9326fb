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

import math

import numpy as np
import pytest

from tepps import (
    IntegralityError,
    MilpSolution,
    MilpStatus,
    SolverError,
    assemble_scenario_matrices,
    audit_solution,
    branch_and_bound,
    build_dual_system,
    build_single_level_milp,
    build_strong_duality_row,
    clear_scenario,
    extract_solution,
    linearize_bilinear,
)
from tepps._formulation import Constraint, big_m_for_line, payment_weights
from tests.studies import pst_triangle_study, three_bus_line_study, two_bus_study, wind_study

# --- Scenario matrices ---


class TestScenarioMatrices:
    def test_dimensions(self) -> None:
        sm = assemble_scenario_matrices(three_bus_line_study(), 0)
        # 2 generators, 3 branches, 3 bus angles
        assert sm.n_y == 8
        # 3 balances, 2 existing flow definitions, the reference angle
        assert sm.n_eq == 6
        # disjunctive, generation, thermal, candidate thermal and angle pairs
        assert sm.n_ineq == 2 * (1 + 2 + 2 + 1 + 2)
        assert sm.n_x == 1

    def test_rows_come_in_pairs(self) -> None:
        sm = assemble_scenario_matrices(pst_triangle_study(), 0)
        assert sm.n_ineq % 2 == 0
        for upper, lower in zip(sm.ineq_tags[0::2], sm.ineq_tags[1::2]):
            assert upper.value.endswith("max")
            assert lower.value.endswith("min")

    def test_pst_coupling(self) -> None:
        sm = assemble_scenario_matrices(pst_triangle_study(), 0)
        entries = sm.coupled_entries()
        assert [(row, j) for row, j, _ in entries] == [(0, 0), (1, 0)]
        assert [k for _, _, k in entries] == pytest.approx([-0.3, -0.3])
        assert sm.ineq_tags[0] is Constraint.PST_ANGLE_MAX

    def test_rhs_depends_on_binaries(self) -> None:
        sm = assemble_scenario_matrices(three_bus_line_study(), 0)
        off = sm.rhs(np.array([0.0]))
        on = sm.rhs(np.array([1.0]))
        changed = np.flatnonzero(~np.isclose(off, on))
        tags = {sm.ineq_tags[i] for i in changed}
        assert tags == {
            Constraint.DISJUNCTIVE_MAX,
            Constraint.DISJUNCTIVE_MIN,
            Constraint.CANDIDATE_THERMAL_MAX,
            Constraint.CANDIDATE_THERMAL_MIN,
        }

    def test_per_unit_balance(self) -> None:
        sm = assemble_scenario_matrices(two_bus_study(load_mw=80.0), 0)
        assert sm.h[sm.balance_rows] == pytest.approx([0.0, -0.8])

    def test_wind_cap_follows_scenario(self) -> None:
        sm = assemble_scenario_matrices(wind_study(), 1)
        row = sm.ineq_names.index("wind_max[W1]")
        assert sm.r[row] == pytest.approx(0.2)

    def test_payment_weights(self) -> None:
        sm = assemble_scenario_matrices(three_bus_line_study(), 0)
        assert payment_weights(sm) == pytest.approx([0.0, 0.0, 1000.0 * 90.0 * 1e-6])

    def test_disjunctive_constant(self) -> None:
        line = three_bus_line_study().network.prospective_branches[0]
        assert big_m_for_line(line) == pytest.approx(2.0 * math.pi / 0.1)


# --- Dual system, strong duality and McCormick rows ---


class TestDualPieces:
    def test_dual_system_shape(self) -> None:
        sm = assemble_scenario_matrices(three_bus_line_study(), 0)
        dual = build_dual_system(sm)
        assert dual.mu_block.shape == (sm.n_y, sm.n_ineq)
        assert dual.lam_block.shape == (sm.n_y, sm.n_eq)
        assert dual.rhs == pytest.approx(-sm.w)

    @pytest.mark.parametrize("built", [0.0, 1.0])
    def test_strong_duality_holds_at_clearing(self, built: float) -> None:
        sm = assemble_scenario_matrices(three_bus_line_study(), 0)
        x = np.array([built])
        clearing = clear_scenario(sm, x, dual_big_m=1e5)
        assert clearing is not None
        row = build_strong_duality_row(sm)
        assert row.residual(x, clearing.y, clearing.mu, clearing.lam) == pytest.approx(
            0.0, abs=1e-7
        )

    def test_stationarity_at_clearing(self) -> None:
        sm = assemble_scenario_matrices(pst_triangle_study(), 0)
        clearing = clear_scenario(sm, np.array([1.0]), dual_big_m=1e5)
        assert clearing is not None
        residual = sm.p.T @ clearing.mu + sm.e.T @ clearing.lam + sm.w
        assert np.allclose(residual, 0.0, atol=1e-7)

    @pytest.mark.parametrize("x", [0.0, 1.0])
    @pytest.mark.parametrize("mu", [0.0, 3.0, 10.0])
    def test_mccormick_is_exact(self, x: float, mu: float) -> None:
        rows = linearize_bilinear(x=0, mu=1, z=2, big_m=10.0)

        def feasible(z: float) -> bool:
            values = {0: x, 1: mu, 2: z}
            return z >= 0 and all(
                sum(coef * values[i] for i, coef in coefs.items()) <= rhs + 1e-12
                for coefs, rhs in rows.rows
            )

        assert feasible(x * mu)
        assert not feasible(x * mu + 0.5)
        if x * mu > 0:
            assert not feasible(x * mu - 0.5)

    def test_mccormick_rejects_bad_bound(self) -> None:
        with pytest.raises(ValueError, match="big_m"):
            linearize_bilinear(0, 1, 2, big_m=0.0)


# --- Single-level MILP ---


class TestSingleLevelMilp:
    def test_structure(self) -> None:
        milp = build_single_level_milp(pst_triangle_study())
        assert milp.binaries == (0,)
        assert milp.var_names[0] == "delta[1-3]"
        assert "budget_pst" in milp.ub_names
        assert "t1.strong_duality" in milp.eq_names
        assert sum(name.startswith("t1.mc[") for name in milp.ub_names) == 3 * 2

    def test_unlimited_budget_has_no_row(self) -> None:
        milp = build_single_level_milp(three_bus_line_study(line_budget=math.inf))
        assert "budget_line" not in milp.ub_names
        assert np.all(np.isfinite(milp.b_ub))

    def test_objective_weights(self) -> None:
        milp = build_single_level_milp(three_bus_line_study(line_cost=10.0))
        assert milp.c[0] == pytest.approx(0.802426, abs=1e-6)
        layout = milp.layout
        lam = layout.blocks[0].lam
        assert milp.c[lam.start + 2] == pytest.approx(0.09)

    def test_rejects_non_positive_big_m(self) -> None:
        with pytest.raises(ValueError, match="dual_big_m"):
            build_single_level_milp(two_bus_study(), dual_big_m=0.0)

    @pytest.mark.parametrize(
        ("line_cost", "built", "objective"),
        [(10.0, True, 1.702426), (30.0, False, 2.7)],
    )
    def test_line_decision(self, line_cost: float, built: bool, objective: float) -> None:
        study = three_bus_line_study(line_cost=line_cost)
        milp = build_single_level_milp(study, mipgap=0.0)
        solution = branch_and_bound(milp)
        assert solution.objective == pytest.approx(objective, abs=1e-5)
        plan, dispatch = extract_solution(solution, study, milp.layout)
        assert plan.lines_built == (built,)
        assert dispatch[0].lmp[3] == pytest.approx(10.0 if built else 30.0, abs=1e-6)

    def test_pst_decision(self) -> None:
        study = pst_triangle_study()
        milp = build_single_level_milp(study, mipgap=0.0)
        solution = branch_and_bound(milp)
        plan, dispatch = extract_solution(solution, study, milp.layout)
        assert plan.pst_built == (True,)
        assert solution.objective == pytest.approx(1.5 + 10.5 * 0.0963423, abs=1e-4)
        assert dispatch[0].pst_angle["1-3"] <= -0.12 + 1e-6
        assert dispatch[0].flows["1-3"] <= 60.0 + 1e-6

    def test_pst_budget_blocks_investment(self) -> None:
        study = pst_triangle_study(pst_budget=5.0)
        milp = build_single_level_milp(study, mipgap=0.0)
        solution = branch_and_bound(milp)
        plan, dispatch = extract_solution(solution, study, milp.layout)
        assert plan.pst_built == (False,)
        assert solution.objective == pytest.approx(7.5, abs=1e-5)
        assert dispatch[0].generation["G1"] == pytest.approx(30.0, abs=1e-6)


# --- Decoding and audit ---


class TestExtractAndAudit:
    def test_audit_certifies_optimum(self) -> None:
        study = three_bus_line_study()
        milp = build_single_level_milp(study, mipgap=0.0)
        solution = branch_and_bound(milp)
        assert solution.x is not None
        audit = audit_solution(solution.x, milp.layout)
        assert audit.certified
        assert audit.active_dual_bounds == ()
        assert audit.passed

    def test_tight_big_m_is_reported(self) -> None:
        # without the PST the lower angle limit is worth exactly 200 per radian
        study = pst_triangle_study(pst_budget=0.0)
        milp = build_single_level_milp(study, dual_big_m=200.0, mipgap=0.0)
        solution = branch_and_bound(milp)
        assert solution.x is not None
        audit = audit_solution(solution.x, milp.layout)
        assert audit.active_dual_bounds == ("t1.pst_min[1-3]",)
        assert not audit.passed

    def test_loose_big_m_is_not_reported(self) -> None:
        study = pst_triangle_study(pst_budget=0.0)
        milp = build_single_level_milp(study, dual_big_m=2000.0, mipgap=0.0)
        solution = branch_and_bound(milp)
        assert solution.x is not None
        assert audit_solution(solution.x, milp.layout).active_dual_bounds == ()

    def test_fractional_binary_rejected(self) -> None:
        study = three_bus_line_study()
        milp = build_single_level_milp(study)
        x = np.zeros(milp.n_vars)
        x[0] = 0.4
        solution = MilpSolution(
            status=MilpStatus.OPTIMAL, x=x, objective=0.0, best_bound=0.0, gap=0.0, nodes=1
        )
        with pytest.raises(IntegralityError, match="binary 0"):
            extract_solution(solution, study, milp.layout)

    def test_no_incumbent(self) -> None:
        study = two_bus_study()
        milp = build_single_level_milp(study)
        solution = MilpSolution(
            status=MilpStatus.INFEASIBLE,
            x=None,
            objective=np.nan,
            best_bound=np.inf,
            gap=None,
            nodes=3,
        )
        with pytest.raises(SolverError, match="no planning solution"):
            extract_solution(solution, study, milp.layout)

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

import logging
import time
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

from tepps._config import SolverConfig
from tepps._exceptions import BigMAuditError, OptimalityAuditError
from tepps._formulation import audit_solution, build_single_level_milp, extract_solution
from tepps._milp import branch_and_bound
from tepps._oracle import evaluate_plan
from tepps._types import SolverEvent

if TYPE_CHECKING:
    from collections.abc import Iterable

    from tepps._formulation import AuditReport, MilpLayout
    from tepps._milp import MilpProblem, MilpSolution
    from tepps._model import Plan, PlanningStudy, PlanReport
    from tepps._types import Clock

_log = logging.getLogger("tepps")

_CONSISTENCY_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class PlanResult:
    plan: Plan
    report: PlanReport
    milp: MilpProblem
    solution: MilpSolution
    audit: AuditReport
    dual_big_m: float
    escalations: int
    solve_seconds: float


@dataclass(frozen=True)
class SweepPoint:
    pst_budget: float
    objective: float
    consumer_payment: float
    plan: Plan


class Planner:
    """Builds, solves, audits and evaluates the single-level planning model.

    While a coupled dual multiplier sits on its big-M bound the model is rebuilt
    with the bound multiplied by ``config.big_m_growth``, at most
    ``config.big_m_retries`` times.
    """

    def __init__(
        self,
        study: PlanningStudy,
        config: SolverConfig | None = None,
        mipgap: float | None = None,
        dual_big_m: float | None = None,
        clock: Clock = time.monotonic,
    ) -> None:
        self._study = study
        self._config = config or SolverConfig()
        self._mipgap = self._config.mipgap if mipgap is None else mipgap
        self._dual_big_m = study.dual_big_m if dual_big_m is None else dual_big_m
        self._clock = clock

    @property
    def config(self) -> SolverConfig:
        return self._config

    def _emit_event(self, kind: str, data: dict[str, Any]) -> None:
        if self._config.on_event is not None:
            self._config.on_event(SolverEvent(kind=kind, timestamp=self._clock(), data=data))

    def build(self, dual_big_m: float | None = None) -> MilpProblem:
        big_m = self._dual_big_m if dual_big_m is None else dual_big_m
        return build_single_level_milp(self._study, dual_big_m=big_m, mipgap=self._mipgap)

    def solve(self) -> PlanResult:
        """Run the full planning pipeline.

        Raises:
            BigMAuditError: a coupled dual stays on its bound after every escalation.
            OptimalityAuditError: the solved point fails the primal, dual, strong-duality
                or disjunctive checks.
        """
        started = self._clock()
        big_m = self._dual_big_m
        escalations = 0
        while True:
            milp = self.build(big_m)
            solution = branch_and_bound(milp, self._mipgap, self._config, self._clock)
            layout: MilpLayout = milp.layout
            plan, _ = extract_solution(
                solution, self._study, layout, self._config.integrality_tol
            )
            assert solution.x is not None
            audit = audit_solution(solution.x, layout, self._config.integrality_tol)
            if not audit.active_dual_bounds:
                break
            if escalations >= self._config.big_m_retries:
                raise BigMAuditError(audit.active_dual_bounds, big_m)
            new_big_m = big_m * self._config.big_m_growth
            _log.info(
                "Dual big-M %.6g active on %d row(s); re-solving with %.6g",
                big_m,
                len(audit.active_dual_bounds),
                new_big_m,
            )
            self._emit_event(
                "big_m_escalated",
                {"from": big_m, "to": new_big_m, "active": list(audit.active_dual_bounds)},
            )
            big_m = new_big_m
            escalations += 1

        if not audit.certified:
            raise OptimalityAuditError(audit)

        report = evaluate_plan(self._study, plan, self._config, big_m)
        drift = abs(report.objective - solution.objective) / max(1.0, abs(solution.objective))
        if drift > _CONSISTENCY_TOL:
            _log.warning(
                "Plan evaluation objective %.9g differs from MILP objective %.9g",
                report.objective,
                solution.objective,
            )
        elapsed = self._clock() - started
        _log.info(
            "Planning finished: objective %.9g, %d escalation(s), %.2fs",
            report.objective,
            escalations,
            elapsed,
        )
        return PlanResult(
            plan=plan,
            report=report,
            milp=milp,
            solution=solution,
            audit=audit,
            dual_big_m=big_m,
            escalations=escalations,
            solve_seconds=elapsed,
        )


def plan_study(
    study: PlanningStudy,
    config: SolverConfig | None = None,
    mipgap: float | None = None,
    dual_big_m: float | None = None,
) -> PlanResult:
    """Convenience wrapper around :class:`Planner`."""
    return Planner(study, config, mipgap=mipgap, dual_big_m=dual_big_m).solve()


def sweep_pst_budget(
    study: PlanningStudy,
    budgets: Iterable[float],
    config: SolverConfig | None = None,
    mipgap: float | None = None,
    dual_big_m: float | None = None,
) -> list[SweepPoint]:
    """Re-plan for each PST budget, keeping every other study input fixed."""
    points: list[SweepPoint] = []
    for budget in budgets:
        variant = study.with_budgets(pst_budget=budget, line_budget=study.line_budget)
        result = Planner(variant, config, mipgap=mipgap, dual_big_m=dual_big_m).solve()
        points.append(
            SweepPoint(
                pst_budget=budget,
                objective=result.report.objective,
                consumer_payment=result.report.consumer_payment,
                plan=result.plan,
            )
        )
        _log.info("PST budget %.6g: objective %.9g", budget, result.report.objective)
    return points

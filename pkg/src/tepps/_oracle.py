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

"""Fixed-plan market clearing, plan evaluation and the enumeration oracle."""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING, NamedTuple

import numpy as np
import scipy.sparse as sp

from tepps._config import SolverConfig
from tepps._costs import plan_investment
from tepps._exceptions import (
    EnumerationGuardError,
    InfeasiblePlanError,
    SolverError,
    StudyValidationError,
)
from tepps._formulation import (
    ScenarioMatrices,
    assemble_scenario_matrices,
    dispatch_from_vectors,
    payment_weights,
)
from tepps._model import Plan, PlanReport, Violation, require_valid
from tepps._simplex import LpProblem, simplex_solve
from tepps._types import LpStatus

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from numpy.typing import NDArray

    from tepps._model import PlanningStudy

_log = logging.getLogger("tepps")

ENUMERATION_LIMIT = 22

_DEGENERACY_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class ScenarioClearing:
    """Primal optimum and payment-minimising (optimistic) duals of one scenario."""

    y: NDArray[np.float64]
    lam: NDArray[np.float64]
    mu: NDArray[np.float64]
    primal_objective: float
    payment: float
    payment_max: float | None = None

    @property
    def degenerate(self) -> bool:
        if self.payment_max is None:
            return False
        return self.payment_max - self.payment > _DEGENERACY_TOL * (1.0 + abs(self.payment))


class OracleResult(NamedTuple):
    plan: Plan
    objective: float
    report: PlanReport


def _coupled_mask(sm: ScenarioMatrices) -> NDArray[np.bool_]:
    mask = np.zeros(sm.n_ineq, dtype=bool)
    mask[np.unique(sm.k.tocoo().row)] = True
    return mask


def _optimal_dual_lp(
    sm: ScenarioMatrices,
    rhs: NDArray[np.float64],
    primal_objective: float,
    dual_big_m: float,
    sense: float,
) -> LpProblem:
    """Optimise payment over the optimal dual set ``{(lam, mu)}`` of one scenario.

    Coupled multipliers are capped at ``dual_big_m``, the same bound the
    linearized single-level model imposes on them.
    """
    weights = np.zeros(sm.n_eq)
    weights[sm.balance_rows] = payment_weights(sm)
    c = sense * np.concatenate([weights, np.zeros(sm.n_ineq)])
    a_eq = sp.hstack([sm.e.T, sm.p.T], format="csr")
    tol = 1e-9 * (1.0 + abs(primal_objective))
    a_ub = sp.csr_matrix(np.concatenate([sm.h, rhs]).reshape(1, -1))
    ub = np.concatenate(
        [np.full(sm.n_eq, np.inf), np.where(_coupled_mask(sm), dual_big_m, np.inf)]
    )
    lb = np.concatenate([np.full(sm.n_eq, -np.inf), np.zeros(sm.n_ineq)])
    return LpProblem(
        c=c,
        a_ub=a_ub,
        b_ub=np.array([-primal_objective + tol]),
        a_eq=a_eq,
        b_eq=-sm.w,
        lb=lb,
        ub=ub,
    )


def clear_scenario(
    sm: ScenarioMatrices,
    x: NDArray[np.float64],
    dual_big_m: float,
    config: SolverConfig | None = None,
    bracket_payment: bool = False,
) -> ScenarioClearing | None:
    """Solve one scenario's market clearing with the binaries fixed at ``x``.

    Returns None when the clearing is infeasible. With ``bracket_payment`` the
    payment is also maximised over the optimal duals to expose degeneracy.
    """
    cfg = config or SolverConfig()
    rhs = sm.rhs(x)
    n_y = sm.n_y
    primal = simplex_solve(
        LpProblem(
            c=sm.w,
            a_ub=sm.p,
            b_ub=rhs,
            a_eq=sm.e,
            b_eq=sm.h,
            lb=np.full(n_y, -np.inf),
            ub=np.full(n_y, np.inf),
        ),
        cfg,
    )
    if primal.status is LpStatus.INFEASIBLE:
        return None
    if primal.status is not LpStatus.OPTIMAL:
        raise SolverError(
            f"scenario {sm.scenario}: market clearing ended with {primal.status.value}"
        )

    optimistic = simplex_solve(
        _optimal_dual_lp(sm, rhs, primal.objective, dual_big_m, 1.0), cfg
    )
    if optimistic.status is not LpStatus.OPTIMAL:
        raise SolverError(
            f"scenario {sm.scenario}: optimal-dual payment LP ended with "
            f"{optimistic.status.value}"
        )
    lam = optimistic.x[: sm.n_eq]
    mu = optimistic.x[sm.n_eq :]

    payment_max: float | None = None
    if bracket_payment:
        pessimistic = simplex_solve(
            _optimal_dual_lp(sm, rhs, primal.objective, dual_big_m, -1.0), cfg
        )
        payment_max = (
            -pessimistic.objective if pessimistic.status is LpStatus.OPTIMAL else np.inf
        )

    return ScenarioClearing(
        y=primal.x,
        lam=lam,
        mu=mu,
        primal_objective=primal.objective,
        payment=float(optimistic.objective),
        payment_max=payment_max,
    )


def _map_ordered(
    fn: Callable[[ScenarioMatrices], ScenarioClearing | None],
    items: Sequence[ScenarioMatrices],
    workers: int,
) -> list[ScenarioClearing | None]:
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _check_plan(study: PlanningStudy, plan: Plan) -> None:
    network = study.network
    if len(plan.pst_built) != len(network.pst_branches) or len(plan.lines_built) != len(
        network.prospective_branches
    ):
        raise StudyValidationError([Violation("plan", "dimensions differ from candidates")])
    summary = plan_investment(plan, study)
    violations = []
    if not summary.pst_budget_ok:
        violations.append(
            Violation("plan", f"PST investment {summary.pst_total:g} exceeds budget")
        )
    if not summary.line_budget_ok:
        violations.append(
            Violation("plan", f"line investment {summary.line_total:g} exceeds budget")
        )
    if violations:
        raise StudyValidationError(violations)


def evaluate_plan(
    study: PlanningStudy,
    plan: Plan,
    config: SolverConfig | None = None,
    dual_big_m: float | None = None,
) -> PlanReport:
    """Market outcome and annual metrics of a fixed investment plan.

    Raises:
        InfeasiblePlanError: a scenario's market clearing is infeasible.
        StudyValidationError: the plan does not fit the study or its budgets.
    """
    cfg = config or SolverConfig()
    require_valid(study)
    _check_plan(study, plan)
    big_m = study.dual_big_m if dual_big_m is None else dual_big_m
    x = plan.as_vector()
    matrices = [assemble_scenario_matrices(study, t) for t in range(len(study.scenarios))]

    def clear(sm: ScenarioMatrices) -> ScenarioClearing | None:
        return clear_scenario(sm, x, big_m, cfg, bracket_payment=True)

    clearings = _map_ordered(clear, matrices, cfg.workers)

    network = study.network
    farm_ids = [farm.id for farm in network.wind_farms]
    curtailment = dict.fromkeys(farm_ids, 0.0)
    wind_energy = 0.0
    demand_energy = 0.0
    dispatch = []
    degenerate = []
    for sm, clearing in zip(matrices, clearings):
        if clearing is None:
            raise InfeasiblePlanError(sm.scenario)
        lmp = clearing.lam[sm.balance_rows]
        result = dispatch_from_vectors(study, sm, plan, clearing.y, lmp)
        dispatch.append(result)
        if clearing.degenerate:
            degenerate.append(sm.scenario)
        for farm_id in farm_ids:
            spilled = result.wind_available[farm_id] - result.wind[farm_id]
            curtailment[farm_id] += sm.hours * max(0.0, spilled)
        wind_energy += sm.hours * sum(result.wind.values())
        demand_energy += sm.hours * float(sm.demand_mw.sum())

    invest = plan_investment(plan, study)
    payment = float(sum(c.payment for c in clearings if c is not None))
    penetration = 100.0 * wind_energy / demand_energy if demand_energy > 0 else 0.0
    if degenerate:
        _log.info("Dual-degenerate scenarios (optimistic LMPs reported): %s", degenerate)
    return PlanReport(
        plan=plan,
        annualized_line_investment=invest.line_annualized,
        annualized_pst_investment=invest.pst_annualized,
        line_investment_total=invest.line_total,
        pst_investment_total=invest.pst_total,
        consumer_payment=payment,
        objective=invest.annualized + payment,
        curtailment=curtailment,
        penetration=penetration,
        dispatch=tuple(dispatch),
        degenerate_scenarios=tuple(degenerate),
    )


def enumerate_oracle(
    study: PlanningStudy,
    config: SolverConfig | None = None,
    dual_big_m: float | None = None,
    limit: int = ENUMERATION_LIMIT,
) -> OracleResult:
    """Exhaustively evaluate every budget-feasible plan and return the cheapest.

    Ties keep the first plan in enumeration order (all-zero first, PST flags
    before line flags, ``itertools.product`` order).

    Raises:
        EnumerationGuardError: the study has more than ``limit`` binaries.
        InfeasiblePlanError: no budget-feasible plan clears every scenario.
    """
    cfg = config or SolverConfig()
    require_valid(study)
    n_bin = study.candidate_count
    if n_bin > limit:
        raise EnumerationGuardError(n_bin, limit)
    big_m = study.dual_big_m if dual_big_m is None else dual_big_m
    matrices = [assemble_scenario_matrices(study, t) for t in range(len(study.scenarios))]

    best_plan: Plan | None = None
    best_objective = np.inf
    evaluated = 0
    failed_scenario: int | None = None
    for bits in itertools.product((0.0, 1.0), repeat=n_bin):
        x = np.array(bits, dtype=float)
        plan = Plan.from_vector(study, x)
        invest = plan_investment(plan, study)
        if not invest.within_budget:
            continue

        def clear(sm: ScenarioMatrices, x: NDArray[np.float64] = x) -> ScenarioClearing | None:
            return clear_scenario(sm, x, big_m, cfg)

        clearings = _map_ordered(clear, matrices, cfg.workers)
        evaluated += 1
        missing = [sm.scenario for sm, c in zip(matrices, clearings) if c is None]
        if missing:
            failed_scenario = failed_scenario if failed_scenario is not None else missing[0]
            continue
        objective = invest.annualized + sum(c.payment for c in clearings if c is not None)
        if objective < best_objective:
            best_plan, best_objective = plan, objective

    if best_plan is None:
        raise InfeasiblePlanError(
            failed_scenario if failed_scenario is not None else 0,
            "no budget-feasible plan clears every scenario",
        )
    _log.info(
        "Enumeration oracle: %d of %d plans evaluated, best objective %.9g",
        evaluated,
        2**n_bin,
        best_objective,
    )
    report = evaluate_plan(study, best_plan, cfg, big_m)
    return OracleResult(plan=best_plan, objective=best_objective, report=report)

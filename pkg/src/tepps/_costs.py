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

from dataclasses import dataclass
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from tepps._model import Plan, PlanningStudy

_BUDGET_TOL = 1e-9


def annuity_factor(rate: float, lifetime: int) -> float:
    """Capital recovery factor ``d(1+d)^n / ((1+d)^n - 1)``; ``1/n`` at ``d = 0``."""
    if rate < 0:
        raise ValueError(f"rate must be >= 0, got {rate}")
    if lifetime < 1:
        raise ValueError(f"lifetime must be >= 1, got {lifetime}")
    if rate == 0:
        return 1.0 / lifetime
    growth = (1.0 + rate) ** lifetime
    return rate * growth / (growth - 1.0)


def annualize(total_cost: float, rate: float, lifetime: int) -> float:
    """Equivalent annual cost in M$ of a capital cost in M$."""
    if total_cost < 0:
        raise ValueError(f"total_cost must be >= 0, got {total_cost}")
    return total_cost * annuity_factor(rate, lifetime)


def pst_capital_cost(rating_mva: float, unit_cost_per_kva: float) -> float:
    """PST capital cost in M$ for a branch rating in MVA at a $/kVA unit cost."""
    if rating_mva <= 0:
        raise ValueError(f"rating_mva must be > 0, got {rating_mva}")
    return rating_mva * 1000.0 * unit_cost_per_kva / 1e6


@dataclass(frozen=True)
class InvestmentSummary:
    line_annualized: float
    pst_annualized: float
    line_total: float
    pst_total: float
    line_budget_ok: bool
    pst_budget_ok: bool

    @property
    def annualized(self) -> float:
        return self.line_annualized + self.pst_annualized

    @property
    def within_budget(self) -> bool:
        return self.line_budget_ok and self.pst_budget_ok


def candidate_costs(study: PlanningStudy) -> tuple[list[float], list[float]]:
    """Capital costs in M$ of PST candidates and prospective lines, in plan order."""
    network = study.network
    pst = [b.pst.invest_cost for b in network.pst_branches if b.pst is not None]
    lines = [b.invest_cost for b in network.prospective_branches]
    return pst, lines


def plan_investment(plan: Plan, study: PlanningStudy) -> InvestmentSummary:
    """Investment totals for ``plan``; budgets apply to capital, the objective to annuities."""
    pst_costs, line_costs = candidate_costs(study)
    if len(plan.pst_built) != len(pst_costs) or len(plan.lines_built) != len(line_costs):
        raise ValueError(
            f"plan has {len(plan.pst_built)}+{len(plan.lines_built)} entries, "
            f"study has {len(pst_costs)}+{len(line_costs)} candidates"
        )
    econ = study.economics
    line_total = sum(c for c, on in zip(line_costs, plan.lines_built) if on)
    pst_total = sum(c for c, on in zip(pst_costs, plan.pst_built) if on)
    return InvestmentSummary(
        line_annualized=annualize(line_total, econ.interest_rate, econ.line_lifetime),
        pst_annualized=annualize(pst_total, econ.interest_rate, econ.pst_lifetime),
        line_total=line_total,
        pst_total=pst_total,
        line_budget_ok=line_total <= study.line_budget * (1 + _BUDGET_TOL) + _BUDGET_TOL,
        pst_budget_ok=pst_total <= study.pst_budget * (1 + _BUDGET_TOL) + _BUDGET_TOL,
    )

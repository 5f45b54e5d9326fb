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

"""Market-based transmission expansion and PST placement planning."""

from tepps._config import SolverConfig
from tepps._costs import (
    InvestmentSummary,
    annualize,
    annuity_factor,
    plan_investment,
    pst_capital_cost,
)
from tepps._exceptions import (
    BigMAuditError,
    CaseParseError,
    CaseStructureError,
    EnumerationGuardError,
    InfeasiblePlanError,
    IntegralityError,
    MpsNameError,
    NumericalBreakdownError,
    OptimalityAuditError,
    ProfileError,
    ReportError,
    ScenarioReductionError,
    SolverError,
    StudyFormatError,
    StudyValidationError,
    TeppsError,
    UnboundedRelaxationError,
)
from tepps._formulation import (
    AuditReport,
    MilpLayout,
    ScenarioMatrices,
    assemble_scenario_matrices,
    audit_solution,
    build_dual_system,
    build_single_level_milp,
    build_strong_duality_row,
    extract_solution,
    linearize_bilinear,
)
from tepps._ieee24 import ieee24_study, load_case24
from tepps._matpower import (
    RawBranch,
    RawBus,
    RawCaseFile,
    RawGenerator,
    apply_modifiers,
    format_matpower,
    parse_matpower,
)
from tepps._milp import MilpProblem, MilpSolution, branch_and_bound
from tepps._model import (
    Branch,
    BranchKind,
    Bus,
    DispatchResult,
    Economics,
    Generator,
    LoadPoint,
    NetworkCase,
    Plan,
    PlanningStudy,
    PlanReport,
    PstCandidate,
    Scenario,
    Violation,
    WindFarm,
    require_valid,
    validate_study,
)
from tepps._mps import read_mps, write_mps
from tepps._oracle import OracleResult, clear_scenario, enumerate_oracle, evaluate_plan
from tepps._planner import Planner, PlanResult, SweepPoint, plan_study, sweep_pst_budget
from tepps._reporting import (
    ReportBundle,
    SolveStats,
    build_report,
    lmp_comparison,
    read_report,
    write_report,
)
from tepps._scenarios import (
    HourlySeries,
    ProfileKind,
    ingest_profile,
    kmeans_reduce,
    scenarios_from_table,
)
from tepps._simplex import LpProblem, LpSolution, simplex_solve
from tepps._study_io import (
    Budgets,
    CandidateSet,
    ProspectiveLineSpec,
    PstCandidateSpec,
    assemble_study,
    read_study,
    write_study,
)
from tepps._types import LpStatus, MilpStatus, SearchSnapshot, SearchState, SolverEvent
from tepps._version import __version__

__all__ = [
    "__version__",
    "AuditReport",
    "BigMAuditError",
    "Branch",
    "BranchKind",
    "Budgets",
    "Bus",
    "CandidateSet",
    "CaseParseError",
    "CaseStructureError",
    "DispatchResult",
    "Economics",
    "EnumerationGuardError",
    "Generator",
    "HourlySeries",
    "InfeasiblePlanError",
    "IntegralityError",
    "InvestmentSummary",
    "LoadPoint",
    "LpProblem",
    "LpSolution",
    "LpStatus",
    "MilpLayout",
    "MilpProblem",
    "MilpSolution",
    "MilpStatus",
    "MpsNameError",
    "NetworkCase",
    "NumericalBreakdownError",
    "OptimalityAuditError",
    "OracleResult",
    "Plan",
    "PlanReport",
    "PlanResult",
    "Planner",
    "PlanningStudy",
    "ProfileError",
    "ProfileKind",
    "ProspectiveLineSpec",
    "PstCandidate",
    "PstCandidateSpec",
    "RawBranch",
    "RawBus",
    "RawCaseFile",
    "RawGenerator",
    "ReportBundle",
    "ReportError",
    "Scenario",
    "ScenarioMatrices",
    "ScenarioReductionError",
    "SearchSnapshot",
    "SearchState",
    "SolveStats",
    "SolverConfig",
    "SolverError",
    "SolverEvent",
    "StudyFormatError",
    "StudyValidationError",
    "SweepPoint",
    "TeppsError",
    "UnboundedRelaxationError",
    "Violation",
    "WindFarm",
    "annualize",
    "annuity_factor",
    "apply_modifiers",
    "assemble_scenario_matrices",
    "assemble_study",
    "audit_solution",
    "branch_and_bound",
    "build_dual_system",
    "build_report",
    "build_single_level_milp",
    "build_strong_duality_row",
    "clear_scenario",
    "enumerate_oracle",
    "evaluate_plan",
    "extract_solution",
    "format_matpower",
    "ieee24_study",
    "ingest_profile",
    "kmeans_reduce",
    "linearize_bilinear",
    "lmp_comparison",
    "load_case24",
    "parse_matpower",
    "plan_investment",
    "plan_study",
    "pst_capital_cost",
    "read_mps",
    "read_report",
    "read_study",
    "require_valid",
    "scenarios_from_table",
    "simplex_solve",
    "sweep_pst_budget",
    "validate_study",
    "write_mps",
    "write_report",
    "write_study",
]

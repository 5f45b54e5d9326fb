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

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from collections.abc import Sequence

    from tepps._formulation import AuditReport
    from tepps._model import Violation


class TeppsError(Exception):
    """Base exception for all tepps errors.

    ``exit_code`` is the process exit status the command line maps the error to.
    """

    exit_code: int = 1


# --- Input errors (exit 2) ---


class CaseParseError(TeppsError):
    """Raised when a MATPOWER case contains a malformed token."""

    exit_code = 2

    def __init__(self, message: str, line: int, column: int) -> None:
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class CaseStructureError(TeppsError):
    """Raised when a MATPOWER case is missing a section or has short rows."""

    exit_code = 2


class StudyFormatError(TeppsError):
    """Raised when a native study or report document cannot be decoded."""

    exit_code = 2


class ProfileError(TeppsError):
    """Raised when an hourly CSV profile cannot be read."""

    exit_code = 2


# --- Validation errors (exit 3) ---


class StudyValidationError(TeppsError):
    """Raised when a planning study violates its invariants."""

    exit_code = 3

    def __init__(self, violations: Sequence[Violation]) -> None:
        self.violations = tuple(violations)
        detail = "; ".join(str(v) for v in self.violations)
        super().__init__(f"{len(self.violations)} violation(s): {detail}")


class ScenarioReductionError(TeppsError):
    """Raised when profiles cannot be reduced to the requested scenarios."""

    exit_code = 3


# --- Verification guard (exit 4) ---


class EnumerationGuardError(TeppsError):
    """Raised when a study has too many binaries for exhaustive enumeration."""

    exit_code = 4

    def __init__(self, binaries: int, limit: int) -> None:
        self.binaries = binaries
        self.limit = limit
        super().__init__(f"{binaries} candidate binaries exceed the enumeration limit of {limit}")


# --- Infeasible plan (exit 5) ---


class InfeasiblePlanError(TeppsError):
    """Raised when a fixed plan leaves a scenario's market clearing infeasible."""

    exit_code = 5

    def __init__(self, scenario: int, reason: str = "market clearing is infeasible") -> None:
        self.scenario = scenario
        super().__init__(f"scenario {scenario}: {reason}")


# --- Solver and internal errors (exit 1) ---


class SolverError(TeppsError):
    """Base class for LP/MILP engine failures."""


class NumericalBreakdownError(SolverError):
    """Raised when the simplex basis cannot be refactorised after bounded retries."""


class UnboundedRelaxationError(SolverError):
    """Raised when a branch-and-bound relaxation is unbounded."""

    def __init__(self) -> None:
        super().__init__(
            "LP relaxation is unbounded; the dual big-M bound is probably missing or too loose"
        )


class IntegralityError(SolverError):
    """Raised when a binary value is not within the integrality tolerance."""


class BigMAuditError(TeppsError):
    """Raised when a dual multiplier stays on its big-M bound after escalation."""

    def __init__(self, active: Sequence[str], dual_big_m: float) -> None:
        self.active = tuple(active)
        self.dual_big_m = dual_big_m
        preview = ", ".join(self.active[:5])
        super().__init__(
            f"{len(self.active)} dual multiplier(s) at the big-M bound {dual_big_m:g}: {preview}"
        )


class OptimalityAuditError(TeppsError):
    """Raised when a solved point fails the market-clearing optimality audit."""

    def __init__(self, audit: AuditReport) -> None:
        self.audit = audit
        super().__init__(
            f"optimality audit failed: primal residual {audit.primal_residual:.3e}, "
            f"dual residual {audit.dual_residual:.3e}, strong duality "
            f"{max(audit.strong_duality_residuals, default=0.0):.3e}, "
            f"{len(audit.disjunctive_violations)} disjunctive violation(s)"
        )


class MpsNameError(TeppsError):
    """Raised when names collide after MPS mangling."""

    def __init__(self, collisions: Sequence[str]) -> None:
        self.collisions = tuple(collisions)
        super().__init__(f"MPS name collision(s): {', '.join(self.collisions)}")


class ReportError(TeppsError):
    """Raised when report data is inconsistent."""

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

import os
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from tepps._types import EventCallback, ProgressCallback

_INT_FIELDS: dict[str, str] = {
    "MAX_ITERATIONS": "max_iterations",
    "DEGENERACY_STALL": "degeneracy_stall",
    "REFACTOR_EVERY": "refactor_every",
    "MAX_REFACTOR_RETRIES": "max_refactor_retries",
    "MAX_NODES": "max_nodes",
    "BIG_M_RETRIES": "big_m_retries",
    "WORKERS": "workers",
    "PROGRESS_EVERY": "progress_every",
}

_FLOAT_FIELDS: dict[str, str] = {
    "MIPGAP": "mipgap",
    "FEASIBILITY_TOL": "feasibility_tol",
    "OPTIMALITY_TOL": "optimality_tol",
    "INTEGRALITY_TOL": "integrality_tol",
    "PIVOT_TOL": "pivot_tol",
    "BIG_M_GROWTH": "big_m_growth",
}


@dataclass(frozen=True)
class SolverConfig:
    """LP/MILP engine configuration with validation."""

    mipgap: float = 0.001
    feasibility_tol: float = 1e-8
    optimality_tol: float = 1e-9
    integrality_tol: float = 1e-6
    pivot_tol: float = 1e-9
    max_iterations: int = 100_000
    degeneracy_stall: int = 50
    refactor_every: int = 64
    max_refactor_retries: int = 3
    max_nodes: int = 200_000
    big_m_growth: float = 10.0
    big_m_retries: int = 2
    workers: int = 1
    progress_every: int = 50
    on_progress: ProgressCallback | None = None
    on_event: EventCallback | None = None

    def __post_init__(self) -> None:
        if not (0.0 <= self.mipgap < 1.0):
            raise ValueError(f"mipgap must be in [0, 1), got {self.mipgap}")
        for name in ("feasibility_tol", "optimality_tol", "integrality_tol", "pivot_tol"):
            value = getattr(self, name)
            if not (0.0 < value < 0.5):
                raise ValueError(f"{name} must be in (0, 0.5), got {value}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.degeneracy_stall < 1:
            raise ValueError(f"degeneracy_stall must be >= 1, got {self.degeneracy_stall}")
        if self.refactor_every < 1:
            raise ValueError(f"refactor_every must be >= 1, got {self.refactor_every}")
        if self.max_refactor_retries < 0:
            raise ValueError(
                f"max_refactor_retries must be >= 0, got {self.max_refactor_retries}"
            )
        if self.max_nodes < 1:
            raise ValueError(f"max_nodes must be >= 1, got {self.max_nodes}")
        if self.big_m_growth <= 1.0:
            raise ValueError(f"big_m_growth must be > 1, got {self.big_m_growth}")
        if self.big_m_retries < 0:
            raise ValueError(f"big_m_retries must be >= 0, got {self.big_m_retries}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.progress_every < 1:
            raise ValueError(f"progress_every must be >= 1, got {self.progress_every}")

    def with_overrides(self, **overrides: Any) -> SolverConfig:
        """Return a copy with the non-None overrides applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    @staticmethod
    def from_dict(data: dict[str, Any]) -> SolverConfig:
        """Build config from a plain dict. Unknown keys are ignored."""
        kwargs: dict[str, Any] = {}

        for field in _INT_FIELDS.values():
            if field in data:
                kwargs[field] = int(data[field])

        for field in _FLOAT_FIELDS.values():
            if field in data:
                kwargs[field] = float(data[field])

        for passthrough in ("on_progress", "on_event"):
            if passthrough in data:
                kwargs[passthrough] = data[passthrough]

        return SolverConfig(**kwargs)

    @staticmethod
    def from_env(prefix: str = "TEPPS") -> SolverConfig:
        """Build config from environment variables such as ``TEPPS_MIPGAP``."""
        kwargs: dict[str, Any] = {}

        for env_suffix, field in _INT_FIELDS.items():
            val = os.environ.get(f"{prefix}_{env_suffix}")
            if val is not None:
                kwargs[field] = int(val)

        for env_suffix, field in _FLOAT_FIELDS.items():
            val = os.environ.get(f"{prefix}_{env_suffix}")
            if val is not None:
                kwargs[field] = float(val)

        return SolverConfig(**kwargs)

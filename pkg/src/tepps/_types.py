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

import enum
from collections.abc import Callable
from dataclasses import dataclass
from typing import Any


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"


class MilpStatus(enum.Enum):
    OPTIMAL = "optimal"
    GAP_REACHED = "gap_reached"
    INFEASIBLE = "infeasible"
    NODE_LIMIT = "node_limit"


class SearchState(enum.Enum):
    SEARCHING = "searching"
    TERMINATED = "terminated"


@dataclass(frozen=True)
class SearchSnapshot:
    """Point-in-time view of a branch-and-bound search."""

    nodes: int
    open_nodes: int
    incumbent: float | None
    best_bound: float
    gap: float | None
    elapsed_seconds: float
    state: SearchState


@dataclass(frozen=True)
class SolverEvent:
    """Structured event emitted on solver state transitions."""

    kind: str
    timestamp: float
    data: dict[str, Any]


ProgressCallback = Callable[[SearchSnapshot], Any]
EventCallback = Callable[[SolverEvent], Any]
Clock = Callable[[], float]

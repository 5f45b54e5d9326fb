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

import time
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from tepps._types import Clock


def relative_gap(incumbent: float | None, bound: float) -> float | None:
    """Relative gap ``(incumbent - bound) / max(1, |incumbent|)``; None without incumbent."""
    if incumbent is None:
        return None
    return max(0.0, incumbent - bound) / max(1.0, abs(incumbent))


class SearchProgress:
    """Counts branch-and-bound nodes, tracks elapsed time and detects milestones."""

    def __init__(self, every: int = 50, clock: Clock = time.monotonic) -> None:
        self._every = every
        self._clock = clock
        self._started = clock()
        self._nodes = 0
        self._incumbents = 0
        self._last_milestone = 0

    def record_node(self) -> bool:
        """Record a processed node. Returns True if a milestone was crossed."""
        self._nodes += 1
        if self._every <= 0:
            return False
        current = self._nodes // self._every
        if current > self._last_milestone:
            self._last_milestone = current
            return True
        return False

    def record_incumbent(self) -> None:
        self._incumbents += 1

    @property
    def nodes(self) -> int:
        return self._nodes

    @property
    def incumbents(self) -> int:
        return self._incumbents

    @property
    def elapsed_seconds(self) -> float:
        return self._clock() - self._started

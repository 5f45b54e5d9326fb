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

from tepps._progress import SearchProgress, relative_gap

if TYPE_CHECKING:
    from conftest import FakeClock


class TestRelativeGap:
    def test_no_incumbent(self) -> None:
        assert relative_gap(None, 1.0) is None

    def test_small_objective_uses_absolute_gap(self) -> None:
        assert relative_gap(0.5, 0.25) == 0.25

    def test_large_objective_is_relative(self) -> None:
        assert relative_gap(200.0, 190.0) == 0.05

    def test_bound_above_incumbent_clamps_to_zero(self) -> None:
        assert relative_gap(1.0, 1.5) == 0.0


class TestNodeCounting:
    def test_initial_state(self, fake_clock: FakeClock) -> None:
        progress = SearchProgress(every=10, clock=fake_clock)
        assert progress.nodes == 0
        assert progress.incumbents == 0

    def test_milestones(self, fake_clock: FakeClock) -> None:
        progress = SearchProgress(every=3, clock=fake_clock)
        crossed = [progress.record_node() for _ in range(7)]
        assert crossed == [False, False, True, False, False, True, False]
        assert progress.nodes == 7

    def test_incumbents(self, fake_clock: FakeClock) -> None:
        progress = SearchProgress(clock=fake_clock)
        progress.record_incumbent()
        progress.record_incumbent()
        assert progress.incumbents == 2


class TestElapsed:
    def test_elapsed_follows_clock(self, fake_clock: FakeClock) -> None:
        fake_clock.advance(5.0)
        progress = SearchProgress(clock=fake_clock)
        fake_clock.advance(2.5)
        assert progress.elapsed_seconds == 2.5

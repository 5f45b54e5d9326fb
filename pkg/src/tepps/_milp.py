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

import heapq
import logging
import time
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

import numpy as np

from tepps._config import SolverConfig
from tepps._exceptions import SolverError, UnboundedRelaxationError
from tepps._progress import SearchProgress, relative_gap
from tepps._simplex import LpProblem, simplex_solve
from tepps._types import LpStatus, MilpStatus, SearchSnapshot, SearchState, SolverEvent

if TYPE_CHECKING:
    import scipy.sparse as sp
    from numpy.typing import NDArray

    from tepps._types import Clock

_log = logging.getLogger("tepps")


@dataclass(frozen=True, eq=False)
class MilpProblem:
    """Minimisation MILP whose integer variables are all binary.

    ``layout`` carries the assembler's index maps so solutions can be decoded
    without re-deriving positions.
    """

    c: NDArray[np.float64]
    a_ub: sp.csr_matrix
    b_ub: NDArray[np.float64]
    a_eq: sp.csr_matrix
    b_eq: NDArray[np.float64]
    lb: NDArray[np.float64]
    ub: NDArray[np.float64]
    binaries: tuple[int, ...]
    var_names: tuple[str, ...]
    ub_names: tuple[str, ...]
    eq_names: tuple[str, ...]
    mipgap: float = 0.001
    objective_offset: float = 0.0
    layout: Any = None

    def __post_init__(self) -> None:
        n = len(self.c)
        if len(self.var_names) != n:
            raise ValueError(f"var_names must have length {n}, got {len(self.var_names)}")
        if len(self.ub_names) != len(self.b_ub) or len(self.eq_names) != len(self.b_eq):
            raise ValueError("row names must match constraint counts")
        if any(not (0 <= j < n) for j in self.binaries):
            raise ValueError("binary indices must reference variables")
        if not (0.0 <= self.mipgap < 1.0):
            raise ValueError(f"mipgap must be in [0, 1), got {self.mipgap}")

    @property
    def n_vars(self) -> int:
        return len(self.c)

    def relaxation(self) -> LpProblem:
        lb = self.lb.copy()
        ub = self.ub.copy()
        idx = list(self.binaries)
        lb[idx] = np.maximum(lb[idx], 0.0)
        ub[idx] = np.minimum(ub[idx], 1.0)
        return LpProblem(
            c=self.c, a_ub=self.a_ub, b_ub=self.b_ub, a_eq=self.a_eq, b_eq=self.b_eq, lb=lb, ub=ub
        )


@dataclass(frozen=True, eq=False)
class MilpSolution:
    status: MilpStatus
    x: NDArray[np.float64] | None
    objective: float
    best_bound: float
    gap: float | None
    nodes: int
    elapsed_seconds: float = 0.0

    @property
    def has_incumbent(self) -> bool:
        return self.x is not None


class _Search:
    """Best-first branch and bound over the binary variables of one MILP."""

    def __init__(
        self, milp: MilpProblem, mipgap: float, config: SolverConfig, clock: Clock
    ) -> None:
        self._milp = milp
        self._gap = mipgap
        self._cfg = config
        self._clock = clock
        self._progress = SearchProgress(config.progress_every, clock)
        self._lp = milp.relaxation()
        self._binaries = np.array(milp.binaries, dtype=np.int64)
        self._heap: list[tuple[float, int, NDArray[np.float64], NDArray[np.float64]]] = []
        self._counter = 0
        self._incumbent: NDArray[np.float64] | None = None
        self._incumbent_obj = np.inf
        self._pruned_bound = np.inf

    def _push(self, bound: float, lb: NDArray[np.float64], ub: NDArray[np.float64]) -> None:
        heapq.heappush(self._heap, (bound, self._counter, lb, ub))
        self._counter += 1

    def _closes_gap(self, bound: float) -> bool:
        if self._incumbent is None:
            return False
        gap = relative_gap(self._incumbent_obj, bound)
        return gap is not None and gap <= self._gap

    def _emit(self, kind: str, data: dict[str, Any]) -> None:
        if self._cfg.on_event is not None:
            self._cfg.on_event(SolverEvent(kind=kind, timestamp=self._clock(), data=data))

    def _best_bound(self) -> float:
        bounds = [self._pruned_bound, self._incumbent_obj]
        if self._heap:
            bounds.append(self._heap[0][0])
        return min(bounds)

    def snapshot(self, state: SearchState) -> SearchSnapshot:
        incumbent = None if self._incumbent is None else self._incumbent_obj
        bound = self._best_bound()
        return SearchSnapshot(
            nodes=self._progress.nodes,
            open_nodes=len(self._heap),
            incumbent=incumbent,
            best_bound=bound,
            gap=relative_gap(incumbent, bound),
            elapsed_seconds=self._progress.elapsed_seconds,
            state=state,
        )

    def _fractional(self, x: NDArray[np.float64]) -> int:
        """Index of the most fractional binary, or -1 when all are integral."""
        if self._binaries.size == 0:
            return -1
        values = x[self._binaries]
        distance = np.abs(values - np.round(values))
        if distance.max() <= self._cfg.integrality_tol:
            return -1
        closeness = np.abs(values - np.floor(values) - 0.5)
        closeness[distance <= self._cfg.integrality_tol] = np.inf
        return int(self._binaries[int(np.argmin(closeness))])

    def _process(self, lb: NDArray[np.float64], ub: NDArray[np.float64]) -> None:
        node = self._progress.nodes
        solution = simplex_solve(self._lp.with_bounds(lb, ub), self._cfg)
        if solution.status is LpStatus.UNBOUNDED:
            raise UnboundedRelaxationError()
        if solution.status is LpStatus.ITERATION_LIMIT:
            raise SolverError(f"LP relaxation hit the iteration limit at node {node}")
        if solution.status is LpStatus.INFEASIBLE:
            _log.debug("Node %d infeasible", node)
            self._emit("pruned_infeasible", {"node": node})
            return

        bound = solution.objective
        if bound >= self._incumbent_obj or self._closes_gap(bound):
            self._pruned_bound = min(self._pruned_bound, bound)
            return

        branch_var = self._fractional(solution.x)
        if branch_var < 0:
            self._incumbent = solution.x
            self._incumbent_obj = bound
            self._progress.record_incumbent()
            _log.info("Incumbent %.9g at node %d", bound, node)
            self._emit("incumbent", {"objective": bound, "node": node})
            return

        down_ub = ub.copy()
        down_ub[branch_var] = 0.0
        up_lb = lb.copy()
        up_lb[branch_var] = 1.0
        self._push(bound, lb, down_ub)
        self._push(bound, up_lb, ub)

    def run(self) -> MilpSolution:
        self._push(-np.inf, self._lp.lower.copy(), self._lp.upper.copy())
        status: MilpStatus | None = None

        while self._heap:
            bound, _, lb, ub = self._heap[0]
            if self._closes_gap(bound):
                status = MilpStatus.GAP_REACHED
                break
            if self._progress.nodes >= self._cfg.max_nodes:
                status = MilpStatus.NODE_LIMIT
                break
            heapq.heappop(self._heap)
            if bound >= self._incumbent_obj:
                self._pruned_bound = min(self._pruned_bound, bound)
                continue
            self._process(lb, ub)
            if self._progress.record_node() and self._cfg.on_progress is not None:
                self._cfg.on_progress(self.snapshot(SearchState.SEARCHING))

        best_bound = self._best_bound()
        incumbent = None if self._incumbent is None else self._incumbent_obj
        gap = relative_gap(incumbent, best_bound)
        proven = gap is not None and gap <= 1e-12
        if status is None:
            if incumbent is None:
                status = MilpStatus.INFEASIBLE
            else:
                status = MilpStatus.OPTIMAL if proven else MilpStatus.GAP_REACHED
        elif status is MilpStatus.GAP_REACHED and proven:
            status = MilpStatus.OPTIMAL

        snapshot = self.snapshot(SearchState.TERMINATED)
        _log.info(
            "Branch and bound finished: %s, objective %.9g, bound %.9g, %d nodes",
            status.value,
            self._incumbent_obj,
            best_bound,
            snapshot.nodes,
        )
        self._emit("terminated", {"status": status.value, "nodes": snapshot.nodes, "gap": gap})
        if self._cfg.on_progress is not None:
            self._cfg.on_progress(snapshot)
        return MilpSolution(
            status=status,
            x=self._incumbent,
            objective=self._incumbent_obj if self._incumbent is not None else np.nan,
            best_bound=best_bound,
            gap=gap,
            nodes=snapshot.nodes,
            elapsed_seconds=snapshot.elapsed_seconds,
        )


def branch_and_bound(
    milp: MilpProblem,
    mipgap: float | None = None,
    config: SolverConfig | None = None,
    clock: Clock = time.monotonic,
) -> MilpSolution:
    """Solve ``milp`` by best-first branch and bound.

    Terminates when the relative gap ``(incumbent - bound) / max(1, |incumbent|)``
    drops to ``mipgap`` (default: ``milp.mipgap``), when the tree is exhausted, or
    at ``config.max_nodes``.

    Raises:
        UnboundedRelaxationError: a node relaxation is unbounded.
    """
    cfg = config or SolverConfig()
    gap = milp.mipgap if mipgap is None else mipgap
    if not (0.0 <= gap < 1.0):
        raise ValueError(f"mipgap must be in [0, 1), got {gap}")
    return _Search(milp, gap, cfg, clock).run()

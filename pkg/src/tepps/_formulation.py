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

"""Market-clearing matrices and the single-level planning MILP.

Each scenario's market clearing is the LP::

    min  w @ y
    s.t. P @ y <= r - K @ x     (mu >= 0)
         E @ y == h             (lam)

over free lower-level variables ``y = [pg, pw, flow, psi, theta]`` in per-unit
on the study MVA base, with ``x = [delta (PST candidates), alpha (prospective
lines)]``. The objective is scaled by ``1 / mva_base`` so balance-row duals are
prices in $/MWh. Balance rows read ``out - in - pg - pw == -demand`` which
makes those duals positive LMPs.

Inequality rows always come in (upper, lower) pairs at positions ``2i, 2i+1``.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
import scipy.sparse as sp

from tepps._costs import annuity_factor, candidate_costs
from tepps._exceptions import IntegralityError, SolverError, StudyValidationError
from tepps._milp import MilpProblem
from tepps._model import DispatchResult, Plan, Violation, require_valid
from tepps._types import MilpStatus

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from tepps._milp import MilpSolution
    from tepps._model import Branch, PlanningStudy

_log = logging.getLogger("tepps")

_PAYMENT_SCALE = 1e-6  # $ -> M$


class Constraint(enum.Enum):
    BALANCE = "balance"
    EXISTING_FLOW = "existing_flow"
    PST_FLOW = "pst_flow"
    REFERENCE_ANGLE = "reference_angle"
    PST_ANGLE_MAX = "pst_angle_max"
    PST_ANGLE_MIN = "pst_angle_min"
    DISJUNCTIVE_MAX = "disjunctive_max"
    DISJUNCTIVE_MIN = "disjunctive_min"
    GENERATION_MAX = "generation_max"
    GENERATION_MIN = "generation_min"
    WIND_MAX = "wind_max"
    WIND_MIN = "wind_min"
    THERMAL_MAX = "thermal_max"
    THERMAL_MIN = "thermal_min"
    CANDIDATE_THERMAL_MAX = "candidate_thermal_max"
    CANDIDATE_THERMAL_MIN = "candidate_thermal_min"
    ANGLE_MAX = "angle_max"
    ANGLE_MIN = "angle_min"


COUPLED_CONSTRAINTS = frozenset(
    {
        Constraint.PST_ANGLE_MAX,
        Constraint.PST_ANGLE_MIN,
        Constraint.DISJUNCTIVE_MAX,
        Constraint.DISJUNCTIVE_MIN,
        Constraint.CANDIDATE_THERMAL_MAX,
        Constraint.CANDIDATE_THERMAL_MIN,
    }
)


@dataclass(frozen=True)
class ColumnLayout:
    """Offsets of the lower-level variable groups inside ``y``."""

    n_gen: int
    n_wind: int
    n_branch: int
    n_pst: int
    n_bus: int

    @property
    def pg(self) -> slice:
        return slice(0, self.n_gen)

    @property
    def pw(self) -> slice:
        return slice(self.pg.stop, self.pg.stop + self.n_wind)

    @property
    def flow(self) -> slice:
        return slice(self.pw.stop, self.pw.stop + self.n_branch)

    @property
    def psi(self) -> slice:
        return slice(self.flow.stop, self.flow.stop + self.n_pst)

    @property
    def theta(self) -> slice:
        return slice(self.psi.stop, self.psi.stop + self.n_bus)

    @property
    def size(self) -> int:
        return self.theta.stop


@dataclass(frozen=True, eq=False)
class ScenarioMatrices:
    scenario: int
    position: int
    p: sp.csr_matrix
    k: sp.csr_matrix
    r: NDArray[np.float64]
    e: sp.csr_matrix
    h: NDArray[np.float64]
    w: NDArray[np.float64]
    columns: ColumnLayout
    col_names: tuple[str, ...]
    x_names: tuple[str, ...]
    ineq_names: tuple[str, ...]
    ineq_tags: tuple[Constraint, ...]
    eq_names: tuple[str, ...]
    eq_tags: tuple[Constraint, ...]
    demand_mw: NDArray[np.float64]
    hours: float
    prospective_flow_cols: tuple[int, ...] = ()
    disjunctive_rows: tuple[int, ...] = ()

    @property
    def n_y(self) -> int:
        return self.p.shape[1]

    @property
    def n_x(self) -> int:
        return self.k.shape[1]

    @property
    def n_ineq(self) -> int:
        return self.p.shape[0]

    @property
    def n_eq(self) -> int:
        return self.e.shape[0]

    @property
    def balance_rows(self) -> slice:
        return slice(0, self.columns.n_bus)

    def coupled_entries(self) -> list[tuple[int, int, float]]:
        """Nonzeros ``(row, x index, K value)`` of the coupling matrix in row-major order."""
        coo = self.k.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return [(int(coo.row[i]), int(coo.col[i]), float(coo.data[i])) for i in order]

    def rhs(self, x: NDArray[np.float64]) -> NDArray[np.float64]:
        """Inequality right-hand side ``r - K x`` for fixed binaries."""
        out: NDArray[np.float64] = self.r - self.k @ x
        return out


class _Rows:
    """Triplet collector for one block of constraint rows."""

    def __init__(self) -> None:
        self.rows: list[int] = []
        self.cols: list[int] = []
        self.vals: list[float] = []
        self.k_rows: list[int] = []
        self.k_cols: list[int] = []
        self.k_vals: list[float] = []
        self.rhs: list[float] = []
        self.names: list[str] = []
        self.tags: list[Constraint] = []

    def add(
        self,
        coefs: dict[int, float],
        rhs: float,
        name: str,
        tag: Constraint,
        coupling: dict[int, float] | None = None,
    ) -> None:
        row = len(self.rhs)
        for col, val in coefs.items():
            if val != 0.0:
                self.rows.append(row)
                self.cols.append(col)
                self.vals.append(val)
        for col, val in (coupling or {}).items():
            if val != 0.0:
                self.k_rows.append(row)
                self.k_cols.append(col)
                self.k_vals.append(val)
        self.rhs.append(rhs)
        self.names.append(name)
        self.tags.append(tag)

    def matrix(self, n_cols: int) -> sp.csr_matrix:
        return sp.csr_matrix(
            (self.vals, (self.rows, self.cols)), shape=(len(self.rhs), n_cols), dtype=float
        )

    def coupling(self, n_x: int) -> sp.csr_matrix:
        return sp.csr_matrix(
            (self.k_vals, (self.k_rows, self.k_cols)), shape=(len(self.rhs), n_x), dtype=float
        )


def big_m_for_line(branch: Branch) -> float:
    """Disjunctive constant ``2*pi/x`` for a prospective line, in per-unit flow."""
    if branch.reactance <= 0:
        raise ValueError(f"reactance must be > 0, got {branch.reactance}")
    return 2.0 * math.pi / branch.reactance


def candidate_names(study: PlanningStudy) -> tuple[str, ...]:
    network = study.network
    return tuple(f"delta[{b.id}]" for b in network.pst_branches) + tuple(
        f"alpha[{b.id}]" for b in network.prospective_branches
    )


def assemble_scenario_matrices(study: PlanningStudy, t: int) -> ScenarioMatrices:
    """Market-clearing matrices of the scenario at position ``t``."""
    net = study.network
    base = study.mva_base
    cols = ColumnLayout(
        n_gen=len(net.generators),
        n_wind=len(net.wind_farms),
        n_branch=len(net.branches),
        n_pst=len(net.pst_branches),
        n_bus=len(net.buses),
    )
    pos = net.bus_position
    pst_col = {b.id: cols.psi.start + k for k, b in enumerate(net.pst_branches)}
    n_pst = cols.n_pst
    x_index = {b.id: k for k, b in enumerate(net.pst_branches)}
    x_index.update({b.id: n_pst + k for k, b in enumerate(net.prospective_branches)})
    n_x = n_pst + len(net.prospective_branches)

    def theta(bus: int) -> int:
        return cols.theta.start + pos[bus]

    demand_mw = study.bus_demand(t)
    available_mw = study.wind_available(t)

    # --- Equalities ---
    eq = _Rows()
    balance: list[dict[int, float]] = [{} for _ in net.buses]
    for i, branch in enumerate(net.branches):
        col = cols.flow.start + i
        balance[pos[branch.from_bus]][col] = balance[pos[branch.from_bus]].get(col, 0.0) + 1.0
        balance[pos[branch.to_bus]][col] = balance[pos[branch.to_bus]].get(col, 0.0) - 1.0
    for g, gen in enumerate(net.generators):
        balance[pos[gen.bus]][cols.pg.start + g] = -1.0
    for w, farm in enumerate(net.wind_farms):
        balance[pos[farm.bus]][cols.pw.start + w] = -1.0
    for b, bus in enumerate(net.buses):
        eq.add(balance[b], -demand_mw[b] / base, f"balance[{bus.id}]", Constraint.BALANCE)

    for i, branch in enumerate(net.branches):
        if branch.is_prospective:
            continue
        sus = branch.susceptance
        coefs = {
            cols.flow.start + i: 1.0,
            theta(branch.from_bus): -sus,
            theta(branch.to_bus): sus,
        }
        tag = Constraint.EXISTING_FLOW
        if branch.pst is not None:
            coefs[pst_col[branch.id]] = -sus
            tag = Constraint.PST_FLOW
        eq.add(coefs, 0.0, f"flow_def[{branch.id}]", tag)

    ref = net.reference_bus
    eq.add({theta(ref.id): 1.0}, 0.0, "ref_angle", Constraint.REFERENCE_ANGLE)

    # --- Inequalities, in (upper, lower) pairs ---
    ineq = _Rows()
    for branch in net.pst_branches:
        assert branch.pst is not None
        col, j = pst_col[branch.id], x_index[branch.id]
        ineq.add(
            {col: 1.0}, 0.0, f"pst_max[{branch.id}]", Constraint.PST_ANGLE_MAX,
            {j: -branch.pst.angle_max},
        )
        ineq.add(
            {col: -1.0}, 0.0, f"pst_min[{branch.id}]", Constraint.PST_ANGLE_MIN,
            {j: branch.pst.angle_min},
        )

    flow_col = {b.id: cols.flow.start + i for i, b in enumerate(net.branches)}
    disjunctive_rows: list[int] = []
    for branch in net.prospective_branches:
        disjunctive_rows.append(len(ineq.rhs))
        big_m = big_m_for_line(branch)
        sus = branch.susceptance
        col, j = flow_col[branch.id], x_index[branch.id]
        f, to = theta(branch.from_bus), theta(branch.to_bus)
        ineq.add(
            {col: 1.0, f: -sus, to: sus}, big_m, f"disj_max[{branch.id}]",
            Constraint.DISJUNCTIVE_MAX, {j: big_m},
        )
        ineq.add(
            {col: -1.0, f: sus, to: -sus}, big_m, f"disj_min[{branch.id}]",
            Constraint.DISJUNCTIVE_MIN, {j: big_m},
        )

    for g, gen in enumerate(net.generators):
        col = cols.pg.start + g
        ineq.add({col: 1.0}, gen.p_max / base, f"gen_max[{gen.id}]", Constraint.GENERATION_MAX)
        ineq.add({col: -1.0}, -gen.p_min / base, f"gen_min[{gen.id}]", Constraint.GENERATION_MIN)

    for w, farm in enumerate(net.wind_farms):
        col = cols.pw.start + w
        ineq.add({col: 1.0}, available_mw[w] / base, f"wind_max[{farm.id}]", Constraint.WIND_MAX)
        ineq.add({col: -1.0}, 0.0, f"wind_min[{farm.id}]", Constraint.WIND_MIN)

    for branch in net.existing_branches:
        col, limit = flow_col[branch.id], branch.rating / base
        ineq.add({col: 1.0}, limit, f"therm_max[{branch.id}]", Constraint.THERMAL_MAX)
        ineq.add({col: -1.0}, limit, f"therm_min[{branch.id}]", Constraint.THERMAL_MIN)

    for branch in net.prospective_branches:
        col, limit, j = flow_col[branch.id], branch.rating / base, x_index[branch.id]
        ineq.add(
            {col: 1.0}, 0.0, f"cand_max[{branch.id}]", Constraint.CANDIDATE_THERMAL_MAX,
            {j: -limit},
        )
        ineq.add(
            {col: -1.0}, 0.0, f"cand_min[{branch.id}]", Constraint.CANDIDATE_THERMAL_MIN,
            {j: -limit},
        )

    for bus in net.buses:
        if bus.id == ref.id:
            continue
        col = theta(bus.id)
        ineq.add({col: 1.0}, math.pi, f"angle_max[{bus.id}]", Constraint.ANGLE_MAX)
        ineq.add({col: -1.0}, math.pi, f"angle_min[{bus.id}]", Constraint.ANGLE_MIN)

    w_vec = np.zeros(cols.size)
    w_vec[cols.pg] = [gen.marginal_cost for gen in net.generators]

    col_names = (
        tuple(f"pg[{g.id}]" for g in net.generators)
        + tuple(f"pw[{w.id}]" for w in net.wind_farms)
        + tuple(f"flow[{b.id}]" for b in net.branches)
        + tuple(f"psi[{b.id}]" for b in net.pst_branches)
        + tuple(f"theta[{b.id}]" for b in net.buses)
    )
    scenario = study.scenarios[t]
    return ScenarioMatrices(
        scenario=scenario.index,
        position=t,
        p=ineq.matrix(cols.size),
        k=ineq.coupling(n_x),
        r=np.array(ineq.rhs, dtype=float),
        e=eq.matrix(cols.size),
        h=np.array(eq.rhs, dtype=float),
        w=w_vec,
        columns=cols,
        col_names=col_names,
        x_names=candidate_names(study),
        ineq_names=tuple(ineq.names),
        ineq_tags=tuple(ineq.tags),
        eq_names=tuple(eq.names),
        eq_tags=tuple(eq.tags),
        demand_mw=demand_mw,
        hours=scenario.hours,
        prospective_flow_cols=tuple(flow_col[b.id] for b in net.prospective_branches),
        disjunctive_rows=tuple(disjunctive_rows),
    )


def payment_weights(sm: ScenarioMatrices) -> NDArray[np.float64]:
    """Coefficients turning balance duals ($/MWh) into consumer payment (M$)."""
    out: NDArray[np.float64] = sm.hours * sm.demand_mw * _PAYMENT_SCALE
    return out


# --- Dual system and strong duality ---


@dataclass(frozen=True, eq=False)
class DualSystem:
    """Stationarity rows ``P.T mu + E.T lam == -w``, one per lower-level column."""

    mu_block: sp.csr_matrix
    lam_block: sp.csr_matrix
    rhs: NDArray[np.float64]
    row_names: tuple[str, ...]
    mu_names: tuple[str, ...]
    lam_names: tuple[str, ...]


def build_dual_system(sm: ScenarioMatrices) -> DualSystem:
    return DualSystem(
        mu_block=sm.p.T.tocsr(),
        lam_block=sm.e.T.tocsr(),
        rhs=-sm.w,
        row_names=tuple(f"dual[{name}]" for name in sm.col_names),
        mu_names=tuple(f"mu[{name}]" for name in sm.ineq_names),
        lam_names=tuple(f"lam[{name}]" for name in sm.eq_names),
    )


@dataclass(frozen=True, eq=False)
class StrongDualityRow:
    """``w @ y + r @ mu + h @ lam + sum(coef * x_j * mu_row) == 0``."""

    y_coefs: NDArray[np.float64]
    mu_coefs: NDArray[np.float64]
    lam_coefs: NDArray[np.float64]
    bilinear: tuple[tuple[int, int, float], ...]

    def residual(
        self,
        x: NDArray[np.float64],
        y: NDArray[np.float64],
        mu: NDArray[np.float64],
        lam: NDArray[np.float64],
    ) -> float:
        value = self.y_coefs @ y + self.mu_coefs @ mu + self.lam_coefs @ lam
        value += sum(coef * x[j] * mu[row] for row, j, coef in self.bilinear)
        return float(value)


def build_strong_duality_row(sm: ScenarioMatrices) -> StrongDualityRow:
    """Strong duality ``w y = (x K^T - r^T) mu - h^T lam`` with bilinear terms isolated."""
    return StrongDualityRow(
        y_coefs=sm.w.copy(),
        mu_coefs=sm.r.copy(),
        lam_coefs=sm.h.copy(),
        bilinear=tuple((row, j, -kval) for row, j, kval in sm.coupled_entries()),
    )


@dataclass(frozen=True)
class McCormickRows:
    """Exact linearization of ``z = x * mu`` for binary ``x`` and ``0 <= mu <= big_m``.

    Rows are ``(coefficients by variable index, rhs)`` in ``<=`` form; ``z >= 0``
    is a variable bound.
    """

    z: int
    rows: tuple[tuple[dict[int, float], float], ...]


def linearize_bilinear(x: int, mu: int, z: int, big_m: float) -> McCormickRows:
    if big_m <= 0:
        raise ValueError(f"big_m must be > 0, got {big_m}")
    return McCormickRows(
        z=z,
        rows=(
            ({z: 1.0, x: -big_m}, 0.0),
            ({z: 1.0, mu: -1.0}, 0.0),
            ({z: -1.0, mu: 1.0, x: big_m}, big_m),
        ),
    )


# --- Single-level MILP ---


@dataclass(frozen=True)
class ScenarioBlock:
    """Variable and row offsets of one scenario inside the MILP."""

    y: slice
    lam: slice
    mu: slice
    z: slice
    pairs: tuple[tuple[int, int, float], ...]
    strong_duality_row: int
    strong_duality_scale: float


@dataclass(frozen=True, eq=False)
class MilpLayout:
    n_x: int
    n_pst: int
    matrices: tuple[ScenarioMatrices, ...]
    blocks: tuple[ScenarioBlock, ...]
    dual_big_m: float


class _Triplets:
    def __init__(self) -> None:
        self._rows: list[NDArray[np.int64]] = []
        self._cols: list[NDArray[np.int64]] = []
        self._vals: list[NDArray[np.float64]] = []

    def block(self, matrix: sp.spmatrix, row0: int, col0: int, scale: float = 1.0) -> None:
        coo = sp.coo_matrix(matrix)
        self._rows.append(coo.row.astype(np.int64) + row0)
        self._cols.append(coo.col.astype(np.int64) + col0)
        self._vals.append(coo.data.astype(float) * scale)

    def entries(self, rows: list[int], cols: list[int], vals: list[float]) -> None:
        self._rows.append(np.asarray(rows, dtype=np.int64))
        self._cols.append(np.asarray(cols, dtype=np.int64))
        self._vals.append(np.asarray(vals, dtype=float))

    def matrix(self, n_rows: int, n_cols: int) -> sp.csr_matrix:
        if not self._rows:
            return sp.csr_matrix((n_rows, n_cols))
        return sp.csr_matrix(
            (np.concatenate(self._vals), (np.concatenate(self._rows), np.concatenate(self._cols))),
            shape=(n_rows, n_cols),
        )


def build_single_level_milp(
    study: PlanningStudy,
    dual_big_m: float | None = None,
    mipgap: float = 0.001,
) -> MilpProblem:
    """Single-level MILP: budgets, primal, dual and linearized strong-duality rows."""
    require_valid(study)
    if not study.scenarios:
        raise StudyValidationError([Violation("study", "at least one scenario is required")])
    big_m = study.dual_big_m if dual_big_m is None else dual_big_m
    if big_m <= 0:
        raise ValueError(f"dual_big_m must be > 0, got {big_m}")

    net = study.network
    n_pst = len(net.pst_branches)
    x_names = candidate_names(study)
    n_x = len(x_names)
    econ = study.economics

    matrices = tuple(assemble_scenario_matrices(study, t) for t in range(len(study.scenarios)))

    var_names: list[str] = list(x_names)
    c_parts: list[NDArray[np.float64]] = []
    pst_costs, line_costs = candidate_costs(study)
    c_x = np.concatenate(
        [
            np.array(pst_costs) * annuity_factor(econ.interest_rate, econ.pst_lifetime),
            np.array(line_costs) * annuity_factor(econ.interest_rate, econ.line_lifetime),
        ]
    ) if n_x else np.zeros(0)
    c_parts.append(c_x)
    lb_parts = [np.zeros(n_x)]
    ub_parts = [np.ones(n_x)]

    blocks: list[ScenarioBlock] = []
    offset = n_x
    eq_offset = 0
    for sm in matrices:
        pairs = tuple(sm.coupled_entries())
        y = slice(offset, offset + sm.n_y)
        lam = slice(y.stop, y.stop + sm.n_eq)
        mu = slice(lam.stop, lam.stop + sm.n_ineq)
        z = slice(mu.stop, mu.stop + len(pairs))
        offset = z.stop

        tag = f"t{sm.scenario}"
        var_names += [f"{tag}.{name}" for name in sm.col_names]
        var_names += [f"{tag}.lam[{name}]" for name in sm.eq_names]
        var_names += [f"{tag}.mu[{name}]" for name in sm.ineq_names]
        var_names += [f"{tag}.z[{sm.ineq_names[row]}|{x_names[j]}]" for row, j, _ in pairs]

        c_lam = np.zeros(sm.n_eq)
        c_lam[sm.balance_rows] = payment_weights(sm)
        c_parts += [np.zeros(sm.n_y), c_lam, np.zeros(sm.n_ineq), np.zeros(len(pairs))]
        lb_parts += [
            np.full(sm.n_y, -np.inf),
            np.full(sm.n_eq, -np.inf),
            np.zeros(sm.n_ineq),
            np.zeros(len(pairs)),
        ]
        ub_parts += [np.full(sm.n_y + sm.n_eq + sm.n_ineq + len(pairs), np.inf)]

        sd_row = eq_offset + sm.n_eq + sm.n_y
        sd = build_strong_duality_row(sm)
        sd_scale = max(
            float(np.abs(sd.y_coefs).max(initial=0.0)),
            float(np.abs(sd.mu_coefs).max(initial=0.0)),
            float(np.abs(sd.lam_coefs).max(initial=0.0)),
            max((abs(coef) for _, _, coef in sd.bilinear), default=0.0),
            1.0,
        )
        blocks.append(
            ScenarioBlock(
                y=y,
                lam=lam,
                mu=mu,
                z=z,
                pairs=pairs,
                strong_duality_row=sd_row,
                strong_duality_scale=sd_scale,
            )
        )
        eq_offset += sm.n_eq + sm.n_y + 1

    n_vars = offset
    c = np.concatenate(c_parts)
    lb = np.concatenate(lb_parts)
    ub = np.concatenate(ub_parts)

    # --- Inequalities: budgets, then per scenario primal rows and McCormick rows ---
    a_ub = _Triplets()
    b_ub: list[float] = []
    ub_names: list[str] = []
    budget_rows = (
        ("budget_pst", range(0, n_pst), pst_costs, study.pst_budget),
        ("budget_line", range(n_pst, n_x), line_costs, study.line_budget),
    )
    for name, cols, costs, budget in budget_rows:
        scale = max((abs(v) for v in costs), default=0.0)
        if scale <= 0 or math.isinf(budget):
            continue
        row = len(b_ub)
        a_ub.entries([row] * len(costs), list(cols), [v / scale for v in costs])
        b_ub.append(budget / scale)
        ub_names.append(name)

    for sm, blk in zip(matrices, blocks):
        tag = f"t{sm.scenario}"
        row0 = len(b_ub)
        a_ub.block(sm.p, row0, blk.y.start)
        a_ub.block(sm.k, row0, 0)
        b_ub.extend(sm.r.tolist())
        ub_names += [f"{tag}.primal[{name}]" for name in sm.ineq_names]

        for q, (row, j, _) in enumerate(blk.pairs):
            mc = linearize_bilinear(j, blk.mu.start + row, blk.z.start + q, big_m)
            pair_name = f"{tag}.mc[{sm.ineq_names[row]}|{x_names[j]}]"
            for suffix, (coefs, rhs) in zip(("a", "b", "c"), mc.rows):
                r_idx = len(b_ub)
                a_ub.entries([r_idx] * len(coefs), list(coefs), list(coefs.values()))
                b_ub.append(rhs)
                ub_names.append(f"{pair_name}.{suffix}")

    # --- Equalities: primal, dual, strong duality ---
    a_eq = _Triplets()
    b_eq: list[float] = []
    eq_names: list[str] = []
    for sm, blk in zip(matrices, blocks):
        tag = f"t{sm.scenario}"
        row0 = len(b_eq)
        a_eq.block(sm.e, row0, blk.y.start)
        b_eq.extend(sm.h.tolist())
        eq_names += [f"{tag}.eq[{name}]" for name in sm.eq_names]

        dual = build_dual_system(sm)
        row0 = len(b_eq)
        a_eq.block(dual.mu_block, row0, blk.mu.start)
        a_eq.block(dual.lam_block, row0, blk.lam.start)
        b_eq.extend(dual.rhs.tolist())
        eq_names += [f"{tag}.{name}" for name in dual.row_names]

        sd = build_strong_duality_row(sm)
        row = len(b_eq)
        assert row == blk.strong_duality_row
        scale = 1.0 / blk.strong_duality_scale
        a_eq.block(sp.csr_matrix(sd.y_coefs.reshape(1, -1)), row, blk.y.start, scale)
        a_eq.block(sp.csr_matrix(sd.mu_coefs.reshape(1, -1)), row, blk.mu.start, scale)
        a_eq.block(sp.csr_matrix(sd.lam_coefs.reshape(1, -1)), row, blk.lam.start, scale)
        if blk.pairs:
            a_eq.entries(
                [row] * len(sd.bilinear),
                [blk.z.start + q for q in range(len(sd.bilinear))],
                [coef * scale for _, _, coef in sd.bilinear],
            )
        b_eq.append(0.0)
        eq_names.append(f"{tag}.strong_duality")

    layout = MilpLayout(
        n_x=n_x,
        n_pst=n_pst,
        matrices=matrices,
        blocks=tuple(blocks),
        dual_big_m=big_m,
    )
    milp = MilpProblem(
        c=c,
        a_ub=a_ub.matrix(len(b_ub), n_vars),
        b_ub=np.array(b_ub, dtype=float),
        a_eq=a_eq.matrix(len(b_eq), n_vars),
        b_eq=np.array(b_eq, dtype=float),
        lb=lb,
        ub=ub,
        binaries=tuple(range(n_x)),
        var_names=tuple(var_names),
        ub_names=tuple(ub_names),
        eq_names=tuple(eq_names),
        mipgap=mipgap,
        layout=layout,
    )
    _log.info(
        "Built planning MILP: %d variables (%d binaries), %d inequality and %d equality rows",
        n_vars,
        n_x,
        len(b_ub),
        len(b_eq),
    )
    return milp


# --- Solution decoding ---


@dataclass(frozen=True, eq=False)
class DualSolution:
    """Market-clearing duals of one scenario; ``lmp`` holds the balance-row prices."""

    scenario: int
    eq_duals: NDArray[np.float64]
    ineq_duals: NDArray[np.float64]
    lmp: NDArray[np.float64]
    eq_tags: tuple[Constraint, ...] = field(default=())
    ineq_tags: tuple[Constraint, ...] = field(default=())

    def by_tag(self, tag: Constraint) -> NDArray[np.float64]:
        if tag in self.ineq_tags:
            mask = np.array([t is tag for t in self.ineq_tags], dtype=bool)
            return self.ineq_duals[mask]
        mask = np.array([t is tag for t in self.eq_tags], dtype=bool)
        return self.eq_duals[mask]


def dispatch_from_vectors(
    study: PlanningStudy,
    sm: ScenarioMatrices,
    plan: Plan,
    y: NDArray[np.float64],
    lmp: NDArray[np.float64],
) -> DispatchResult:
    """Convert per-unit lower-level values into a :class:`DispatchResult` in MW."""
    net = study.network
    base = study.mva_base
    cols = sm.columns
    psi = y[cols.psi]
    available = study.wind_available(sm.position)
    return DispatchResult(
        scenario=sm.scenario,
        hours=sm.hours,
        generation={g.id: float(v) * base for g, v in zip(net.generators, y[cols.pg])},
        wind={w.id: float(v) * base for w, v in zip(net.wind_farms, y[cols.pw])},
        wind_available={w.id: float(v) for w, v in zip(net.wind_farms, available)},
        flows={b.id: float(v) * base for b, v in zip(net.branches, y[cols.flow])},
        angles={b.id: float(v) for b, v in zip(net.buses, y[cols.theta])},
        pst_shift={b.id: float(v) for b, v in zip(net.pst_branches, psi)},
        pst_angle={
            b.id: float(v) if on else 0.0
            for b, v, on in zip(net.pst_branches, psi, plan.pst_built)
        },
        lmp={b.id: float(v) for b, v in zip(net.buses, lmp)},
        demand={b.id: float(v) for b, v in zip(net.buses, sm.demand_mw)},
        payment=float(payment_weights(sm) @ lmp),
    )


def _certified_binaries(x: NDArray[np.float64], n_x: int, tol: float) -> NDArray[np.float64]:
    values = x[:n_x]
    off = np.abs(values - np.round(values))
    if off.size and off.max() > tol:
        worst = int(np.argmax(off))
        raise IntegralityError(
            f"binary {worst} has value {values[worst]:.9g}, outside tolerance {tol:g}"
        )
    return np.round(values)


def scenario_duals(x: NDArray[np.float64], layout: MilpLayout) -> list[DualSolution]:
    out: list[DualSolution] = []
    for sm, blk in zip(layout.matrices, layout.blocks):
        lam = x[blk.lam]
        out.append(
            DualSolution(
                scenario=sm.scenario,
                eq_duals=lam.copy(),
                ineq_duals=np.maximum(x[blk.mu], 0.0),
                lmp=lam[sm.balance_rows].copy(),
                eq_tags=sm.eq_tags,
                ineq_tags=sm.ineq_tags,
            )
        )
    return out


def extract_solution(
    solution: MilpSolution,
    study: PlanningStudy,
    layout: MilpLayout,
    integrality_tol: float = 1e-6,
) -> tuple[Plan, list[DispatchResult]]:
    """Decode the plan and per-scenario dispatch from a MILP incumbent.

    Raises:
        SolverError: the solve produced no incumbent.
        IntegralityError: a binary is not within ``integrality_tol`` of 0 or 1.
    """
    if solution.x is None or solution.status not in (
        MilpStatus.OPTIMAL,
        MilpStatus.GAP_REACHED,
        MilpStatus.NODE_LIMIT,
    ):
        raise SolverError(f"no planning solution available: {solution.status.value}")
    x = solution.x
    binaries = _certified_binaries(x, layout.n_x, integrality_tol)
    plan = Plan.from_vector(study, binaries)
    dispatch = [
        dispatch_from_vectors(study, sm, plan, x[blk.y], x[blk.lam][sm.balance_rows])
        for sm, blk in zip(layout.matrices, layout.blocks)
    ]
    return plan, dispatch


# --- Optimality audit ---


@dataclass(frozen=True)
class AuditReport:
    primal_residual: float
    dual_residual: float
    strong_duality_residuals: tuple[float, ...]
    disjunctive_violations: tuple[str, ...]
    active_dual_bounds: tuple[str, ...]
    primal_tol: float = 1e-8
    dual_tol: float = 1e-8
    strong_duality_tol: float = 1e-6

    @property
    def certified(self) -> bool:
        """True when every residual is within tolerance and no disjunction misbehaves."""
        return (
            self.primal_residual <= self.primal_tol
            and self.dual_residual <= self.dual_tol
            and all(r <= self.strong_duality_tol for r in self.strong_duality_residuals)
            and not self.disjunctive_violations
        )

    @property
    def passed(self) -> bool:
        return self.certified and not self.active_dual_bounds


def normalized_pair_duals(mu: NDArray[np.float64]) -> NDArray[np.float64]:
    """Remove the common part of each (upper, lower) dual pair.

    A pair of rows that are both tight carries a ray ``(s, s)`` that leaves
    stationarity, payment and strong duality unchanged.
    """
    pairs = mu.reshape(-1, 2)
    common = pairs.min(axis=1, keepdims=True)
    out: NDArray[np.float64] = (pairs - common).reshape(-1)
    return out


def audit_solution(
    x: NDArray[np.float64],
    layout: MilpLayout,
    integrality_tol: float = 1e-6,
    primal_tol: float = 1e-8,
    dual_tol: float = 1e-8,
    strong_duality_tol: float = 1e-6,
) -> AuditReport:
    """Check a MILP point against each scenario's market-clearing optimality conditions.

    Residuals are per-unit and relative to ``max(1, |rhs|)`` of the checked block.
    """
    xb = _certified_binaries(x, layout.n_x, integrality_tol)
    primal = 0.0
    dual = 0.0
    sd_residuals: list[float] = []
    disjunctive: list[str] = []
    active: list[str] = []
    bound_tol = layout.dual_big_m * (1.0 - 1e-6)

    for sm, blk in zip(layout.matrices, layout.blocks):
        y, lam, mu = x[blk.y], x[blk.lam], np.maximum(x[blk.mu], 0.0)
        rhs = sm.rhs(xb)
        ineq_excess = np.maximum(sm.p @ y - rhs, 0.0)
        eq_excess = np.abs(sm.e @ y - sm.h)
        scale = max(1.0, float(np.abs(rhs).max(initial=0.0)), float(np.abs(sm.h).max(initial=0.0)))
        primal = max(
            primal,
            float(ineq_excess.max(initial=0.0)) / scale,
            float(eq_excess.max(initial=0.0)) / scale,
        )

        stationarity = sm.p.T @ mu + sm.e.T @ lam + sm.w
        d_scale = max(1.0, float(np.abs(sm.w).max(initial=0.0)))
        dual = max(dual, float(np.abs(stationarity).max(initial=0.0)) / d_scale)

        primal_obj = float(sm.w @ y)
        dual_obj = float(-rhs @ mu - sm.h @ lam)
        sd_residuals.append(abs(primal_obj - dual_obj) / (1.0 + abs(primal_obj)))

        row_values = sm.p @ y
        for j, (col, row) in enumerate(zip(sm.prospective_flow_cols, sm.disjunctive_rows)):
            built = xb[layout.n_pst + j] > 0.5
            name = f"t{sm.scenario}.{sm.ineq_names[row]}"
            mismatch = float(row_values[row])
            if built and abs(mismatch) > primal_tol * scale:
                disjunctive.append(f"{name}: flow differs from susceptance times angle")
            if not built and (
                abs(y[col]) > primal_tol * scale or abs(mismatch) >= sm.r[row] * (1 - 1e-9)
            ):
                disjunctive.append(f"{name}: big-M row binding on an unbuilt line")

        normalized = normalized_pair_duals(mu)
        coupled_rows = sorted({row for row, _, _ in blk.pairs})
        for row in coupled_rows:
            if normalized[row] >= bound_tol:
                active.append(f"t{sm.scenario}.{sm.ineq_names[row]}")

    return AuditReport(
        primal_residual=primal,
        dual_residual=dual,
        strong_duality_residuals=tuple(sd_residuals),
        disjunctive_violations=tuple(disjunctive),
        active_dual_bounds=tuple(active),
        primal_tol=primal_tol,
        dual_tol=dual_tol,
        strong_duality_tol=strong_duality_tol,
    )

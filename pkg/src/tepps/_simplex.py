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

"""Bounded-variable two-phase revised primal simplex.

Problem form::

    min  c @ x
    s.t. a_ub @ x <= b_ub      (duals mu >= 0)
         a_eq @ x == b_eq      (duals lam, free)
         lb <= x <= ub

Duals follow the Lagrangian ``c @ x + mu @ (a_ub x - b_ub) + lam @ (a_eq x - b_eq)``
so that at an optimum ``c + a_ub.T @ mu + a_eq.T @ lam`` equals the reduced costs.
"""

from __future__ import annotations

import enum
import logging
import warnings
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np
import scipy.sparse as sp
from scipy.linalg import lu_factor, lu_solve

from tepps._config import SolverConfig
from tepps._exceptions import NumericalBreakdownError
from tepps._types import LpStatus

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

_log = logging.getLogger("tepps")

_SINGULAR_TOL = 1e-11


def _as_sparse(matrix: Any, n_cols: int) -> sp.csr_matrix:
    if matrix is None:
        return sp.csr_matrix((0, n_cols))
    return sp.csr_matrix(matrix, dtype=float)


def _as_vector(values: Any, size: int, fill: float) -> NDArray[np.float64]:
    if values is None:
        return np.full(size, fill, dtype=float)
    return np.asarray(values, dtype=float).reshape(-1)


@dataclass(frozen=True, eq=False)
class LpProblem:
    """Linear program with sparse constraint blocks. Missing pieces default to empty."""

    c: NDArray[np.float64]
    a_ub: sp.csr_matrix | None = None
    b_ub: NDArray[np.float64] | None = None
    a_eq: sp.csr_matrix | None = None
    b_eq: NDArray[np.float64] | None = None
    lb: NDArray[np.float64] | None = None
    ub: NDArray[np.float64] | None = None

    def __post_init__(self) -> None:
        c = np.asarray(self.c, dtype=float).reshape(-1)
        n = c.size
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "a_ub", _as_sparse(self.a_ub, n))
        object.__setattr__(self, "a_eq", _as_sparse(self.a_eq, n))
        object.__setattr__(self, "b_ub", _as_vector(self.b_ub, 0, 0.0))
        object.__setattr__(self, "b_eq", _as_vector(self.b_eq, 0, 0.0))
        object.__setattr__(self, "lb", _as_vector(self.lb, n, 0.0))
        object.__setattr__(self, "ub", _as_vector(self.ub, n, np.inf))

        if self.ub_matrix.shape != (self.b_ub_vector.size, n):
            raise ValueError(
                f"a_ub must have shape ({self.b_ub_vector.size}, {n}), "
                f"got {self.ub_matrix.shape}"
            )
        if self.eq_matrix.shape != (self.b_eq_vector.size, n):
            raise ValueError(
                f"a_eq must have shape ({self.b_eq_vector.size}, {n}), "
                f"got {self.eq_matrix.shape}"
            )
        if self.lower.size != n or self.upper.size != n:
            raise ValueError(f"bounds must have length {n}")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bounds must be <= upper bounds")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(self.b_ub_vector))):
            raise ValueError("problem data must be finite")
        if not np.all(np.isfinite(self.b_eq_vector)):
            raise ValueError("problem data must be finite")

    # Narrowed accessors; the constructor guarantees these are populated.

    @property
    def ub_matrix(self) -> sp.csr_matrix:
        assert self.a_ub is not None
        return self.a_ub

    @property
    def eq_matrix(self) -> sp.csr_matrix:
        assert self.a_eq is not None
        return self.a_eq

    @property
    def b_ub_vector(self) -> NDArray[np.float64]:
        assert self.b_ub is not None
        return self.b_ub

    @property
    def b_eq_vector(self) -> NDArray[np.float64]:
        assert self.b_eq is not None
        return self.b_eq

    @property
    def lower(self) -> NDArray[np.float64]:
        assert self.lb is not None
        return self.lb

    @property
    def upper(self) -> NDArray[np.float64]:
        assert self.ub is not None
        return self.ub

    @property
    def n_vars(self) -> int:
        return int(self.c.size)

    @property
    def n_ub(self) -> int:
        return int(self.b_ub_vector.size)

    @property
    def n_eq(self) -> int:
        return int(self.b_eq_vector.size)

    def with_bounds(self, lb: ArrayLike, ub: ArrayLike) -> LpProblem:
        return LpProblem(
            c=self.c,
            a_ub=self.a_ub,
            b_ub=self.b_ub,
            a_eq=self.a_eq,
            b_eq=self.b_eq,
            lb=np.asarray(lb, dtype=float),
            ub=np.asarray(ub, dtype=float),
        )


@dataclass(frozen=True, eq=False)
class LpSolution:
    status: LpStatus
    x: NDArray[np.float64]
    objective: float
    eq_duals: NDArray[np.float64] = field(default_factory=lambda: np.zeros(0))
    ineq_duals: NDArray[np.float64] = field(default_factory=lambda: np.zeros(0))
    reduced_costs: NDArray[np.float64] = field(default_factory=lambda: np.zeros(0))
    dual_objective: float = float("nan")
    iterations: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class _Var(enum.IntEnum):
    BASIC = 0
    AT_LOWER = 1
    AT_UPPER = 2
    FREE = 3


def _solve_unconstrained(lp: LpProblem) -> LpSolution:
    x = np.zeros(lp.n_vars)
    for j, cost in enumerate(lp.c):
        lo, hi = lp.lower[j], lp.upper[j]
        if cost > 0:
            if not np.isfinite(lo):
                return LpSolution(LpStatus.UNBOUNDED, x, -np.inf)
            x[j] = lo
        elif cost < 0:
            if not np.isfinite(hi):
                return LpSolution(LpStatus.UNBOUNDED, x, -np.inf)
            x[j] = hi
        else:
            x[j] = lo if np.isfinite(lo) else (hi if np.isfinite(hi) else 0.0)
    objective = float(lp.c @ x)
    return LpSolution(
        status=LpStatus.OPTIMAL,
        x=x,
        objective=objective,
        reduced_costs=lp.c.copy(),
        dual_objective=objective,
    )


class _RevisedSimplex:
    """Mutable solver state for one LP. Not shared between threads."""

    def __init__(self, lp: LpProblem, config: SolverConfig) -> None:
        self._lp = lp
        self._cfg = config
        self._pivot_tol = config.pivot_tol
        self._bland = False
        self._iterations = 0
        self._retries = 0

        n, m_ub, m_eq = lp.n_vars, lp.n_ub, lp.n_eq
        m = m_ub + m_eq
        a = sp.vstack([lp.ub_matrix, lp.eq_matrix], format="csc")
        b = np.concatenate([lp.b_ub_vector, lp.b_eq_vector])

        x_struct = np.where(
            np.isfinite(lp.lower),
            lp.lower,
            np.where(np.isfinite(lp.upper), lp.upper, 0.0),
        )
        residual = b - a @ x_struct
        needs_art = np.ones(m, dtype=bool)
        needs_art[:m_ub] = residual[:m_ub] < 0
        art_rows = np.flatnonzero(needs_art)
        art_sign = np.where(residual[art_rows] >= 0, 1.0, -1.0)
        n_art = art_rows.size

        slack = sp.vstack(
            [sp.identity(m_ub, format="csc"), sp.csc_matrix((m_eq, m_ub))], format="csc"
        )
        art = sp.csc_matrix((art_sign, (art_rows, np.arange(n_art))), shape=(m, n_art))
        self._matrix = sp.hstack([a, slack, art], format="csc")
        self._matrix_t = self._matrix.T.tocsr()
        self._b = b
        self._m = m
        self._n = n
        self._n_total = n + m_ub + n_art
        self._art = np.arange(n + m_ub, self._n_total)

        self._lb = np.concatenate([lp.lower, np.zeros(m_ub), np.zeros(n_art)])
        self._ub = np.concatenate([lp.upper, np.full(m_ub, np.inf), np.full(n_art, np.inf)])

        self._x = np.concatenate([x_struct, np.zeros(m_ub), np.abs(residual[art_rows])])
        self._status = np.empty(self._n_total, dtype=np.int8)
        self._status[:n] = np.where(
            np.isfinite(lp.lower),
            _Var.AT_LOWER,
            np.where(np.isfinite(lp.upper), _Var.AT_UPPER, _Var.FREE),
        )
        self._status[n:] = _Var.AT_LOWER

        self._basis = np.empty(m, dtype=np.int64)
        row_art = dict(zip(art_rows.tolist(), self._art.tolist()))
        for i in range(m):
            col = row_art.get(i, n + i)
            self._basis[i] = col
            self._status[col] = _Var.BASIC
            if col == n + i:
                self._x[col] = residual[i]

        self._etas: list[tuple[int, NDArray[np.float64]]] = []
        self._lu: tuple[NDArray[np.float64], NDArray[np.int32]] | None = None
        self._good = (self._basis.copy(), self._status.copy(), self._x.copy())
        self._refresh_movable()
        self._refactor()

    # --- Linear algebra ---

    def _column(self, j: int) -> NDArray[np.float64]:
        out = np.zeros(self._m)
        start, end = self._matrix.indptr[j], self._matrix.indptr[j + 1]
        out[self._matrix.indices[start:end]] = self._matrix.data[start:end]
        return out

    def _ftran(self, v: NDArray[np.float64]) -> NDArray[np.float64]:
        assert self._lu is not None
        out: NDArray[np.float64] = lu_solve(self._lu, v, check_finite=False)
        for r, w in self._etas:
            vr = out[r] / w[r]
            out -= w * vr
            out[r] = vr
        return out

    def _btran(self, v: NDArray[np.float64]) -> NDArray[np.float64]:
        assert self._lu is not None
        z = v.astype(float, copy=True)
        for r, w in reversed(self._etas):
            z[r] = (z[r] - (w @ z - w[r] * z[r])) / w[r]
        out: NDArray[np.float64] = lu_solve(self._lu, z, trans=1, check_finite=False)
        return out

    def _refactor(self) -> None:
        if self._m == 0:
            return
        basis_matrix = self._matrix[:, self._basis].toarray()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            lu = lu_factor(basis_matrix, check_finite=False)
        diag = np.abs(np.diag(lu[0]))
        if diag.min() <= _SINGULAR_TOL * max(1.0, float(diag.max())):
            self._recover()
            return
        self._lu = lu
        self._etas.clear()
        self._recompute_basic()
        self._good = (self._basis.copy(), self._status.copy(), self._x.copy())

    def _recover(self) -> None:
        self._retries += 1
        if self._retries > self._cfg.max_refactor_retries:
            raise NumericalBreakdownError(
                f"basis is singular after {self._cfg.max_refactor_retries} "
                f"refactorization retries"
            )
        _log.warning(
            "Singular basis at iteration %d; restoring last good basis (retry %d)",
            self._iterations,
            self._retries,
        )
        basis, status, x = self._good
        self._basis, self._status, self._x = basis.copy(), status.copy(), x.copy()
        self._bland = True
        self._pivot_tol *= 10.0
        self._refactor()

    def _recompute_basic(self) -> None:
        x_nb = self._x.copy()
        x_nb[self._basis] = 0.0
        rhs = self._b - self._matrix @ x_nb
        assert self._lu is not None
        self._x[self._basis] = lu_solve(self._lu, rhs, check_finite=False)

    def _refresh_movable(self) -> None:
        self._movable = (self._ub - self._lb) > 0

    # --- Iteration ---

    def _choose_entering(self, d: NDArray[np.float64], tol: float) -> tuple[int, float]:
        st = self._status
        eligible = (
            ((st == _Var.AT_LOWER) & (d < -tol))
            | ((st == _Var.AT_UPPER) & (d > tol))
            | ((st == _Var.FREE) & (np.abs(d) > tol))
        ) & self._movable
        candidates = np.flatnonzero(eligible)
        if candidates.size == 0:
            return -1, 0.0
        if self._bland:
            q = int(candidates[0])
        else:
            q = int(candidates[np.argmax(np.abs(d[candidates]))])
        return q, (1.0 if d[q] < 0 else -1.0)

    def _ratio_test(
        self, q: int, w: NDArray[np.float64], direction: float
    ) -> tuple[float, int, bool]:
        """Return (step, leaving row, leaving goes to upper). Row -1 means a bound flip."""
        flip = self._ub[q] - self._lb[q]
        if self._m == 0:
            return flip, -1, False

        basis = self._basis
        xb = self._x[basis]
        delta = -direction * w
        ratios = np.full(self._m, np.inf)
        tol = self._pivot_tol
        dec = delta < -tol
        inc = delta > tol
        with np.errstate(invalid="ignore"):
            ratios[dec] = (xb[dec] - self._lb[basis][dec]) / -delta[dec]
            ratios[inc] = (self._ub[basis][inc] - xb[inc]) / delta[inc]
        ratios = np.maximum(ratios, 0.0)
        theta = float(ratios.min())

        if flip <= theta:
            return flip, -1, False
        if not np.isfinite(theta):
            return np.inf, -1, False

        ties = np.flatnonzero(ratios <= theta + self._cfg.feasibility_tol)
        if self._bland:
            r = int(ties[np.argmin(basis[ties])])
        else:
            r = int(ties[np.argmax(np.abs(w[ties]))])
        return theta, r, bool(delta[r] > 0)

    def _pivot(self, q: int, r: int, w: NDArray[np.float64], to_upper: bool) -> None:
        leaving = int(self._basis[r])
        if to_upper:
            self._status[leaving] = _Var.AT_UPPER
            self._x[leaving] = self._ub[leaving]
        else:
            self._status[leaving] = _Var.AT_LOWER
            self._x[leaving] = self._lb[leaving]
        self._basis[r] = q
        self._status[q] = _Var.BASIC
        self._etas.append((r, w))
        if len(self._etas) >= self._cfg.refactor_every:
            self._refactor()

    def iterate(self, cost: NDArray[np.float64]) -> LpStatus:
        cfg = self._cfg
        tol_d = cfg.optimality_tol * max(1.0, float(np.abs(cost).max(initial=0.0)))
        self._bland = False
        stall = 0
        while True:
            if self._iterations >= cfg.max_iterations:
                return LpStatus.ITERATION_LIMIT
            y = self._btran(cost[self._basis]) if self._m else np.zeros(0)
            d = cost - self._matrix_t @ y
            q, direction = self._choose_entering(d, tol_d)
            if q < 0:
                if self._etas:
                    self._refactor()
                    continue
                return LpStatus.OPTIMAL

            w = self._ftran(self._column(q)) if self._m else np.zeros(0)
            step, r, to_upper = self._ratio_test(q, w, direction)
            if not np.isfinite(step):
                return LpStatus.UNBOUNDED

            self._iterations += 1
            stall = stall + 1 if step <= cfg.feasibility_tol else 0
            if stall >= cfg.degeneracy_stall and not self._bland:
                _log.debug("Degeneracy stall after %d steps; switching to Bland", stall)
                self._bland = True

            if self._m:
                self._x[self._basis] -= direction * step * w
            if r < 0:
                if direction > 0:
                    self._status[q] = _Var.AT_UPPER
                    self._x[q] = self._ub[q]
                else:
                    self._status[q] = _Var.AT_LOWER
                    self._x[q] = self._lb[q]
            else:
                self._x[q] += direction * step
                self._pivot(q, r, w, to_upper)

    # --- Phases ---

    def solve(self) -> LpSolution:
        lp = self._lp
        n, m_ub = self._n, lp.n_ub

        if self._art.size:
            phase_one = np.zeros(self._n_total)
            phase_one[self._art] = 1.0
            status = self.iterate(phase_one)
            if status is LpStatus.ITERATION_LIMIT:
                return self._partial(status)
            infeasibility = float(self._x[self._art].sum())
            scale = 1.0 + float(np.abs(self._b).max(initial=0.0))
            if infeasibility > self._cfg.feasibility_tol * scale:
                _log.debug("Phase 1 ended with infeasibility %.3e", infeasibility)
                return self._partial(LpStatus.INFEASIBLE)
            self._ub[self._art] = 0.0
            nonbasic_art = self._art[self._status[self._art] != _Var.BASIC]
            self._x[nonbasic_art] = 0.0
            self._status[nonbasic_art] = _Var.AT_LOWER
            self._refresh_movable()

        cost = np.concatenate([lp.c, np.zeros(self._n_total - n)])
        status = self.iterate(cost)
        if status is not LpStatus.OPTIMAL:
            return self._partial(status)

        y = self._btran(cost[self._basis])
        d = cost - self._matrix_t @ y
        ineq_duals = np.maximum(-y[:m_ub], 0.0)
        eq_duals = -y[m_ub:]
        x = self._x[:n].copy()
        reduced = d[:n].copy()
        reduced[self._status[:n] == _Var.BASIC] = 0.0

        # Nonbasic columns sit on the bound their reduced cost prices.
        bound_term = float(reduced @ x)
        dual_objective = float(
            -lp.b_ub_vector @ ineq_duals - lp.b_eq_vector @ eq_duals + bound_term
        )
        return LpSolution(
            status=LpStatus.OPTIMAL,
            x=x,
            objective=float(lp.c @ x),
            eq_duals=eq_duals,
            ineq_duals=ineq_duals,
            reduced_costs=reduced,
            dual_objective=dual_objective,
            iterations=self._iterations,
        )

    def _partial(self, status: LpStatus) -> LpSolution:
        objective = -np.inf if status is LpStatus.UNBOUNDED else np.nan
        return LpSolution(
            status=status,
            x=self._x[: self._n].copy(),
            objective=objective,
            iterations=self._iterations,
        )


def simplex_solve(lp: LpProblem, config: SolverConfig | None = None) -> LpSolution:
    """Solve ``lp`` to optimality or report why it cannot be solved.

    Raises:
        NumericalBreakdownError: the basis stays singular after
            ``config.max_refactor_retries`` recoveries.
    """
    cfg = config or SolverConfig()
    if lp.n_ub + lp.n_eq == 0:
        return _solve_unconstrained(lp)
    solution = _RevisedSimplex(lp, cfg).solve()
    _log.debug(
        "LP %dx%d finished: %s after %d iterations",
        lp.n_ub + lp.n_eq,
        lp.n_vars,
        solution.status.value,
        solution.iterations,
    )
    return solution

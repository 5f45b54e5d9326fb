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

import dataclasses
import hashlib
import io
from typing import TYPE_CHECKING

import numpy as np
import pytest
import scipy.sparse as sp

from tepps import (
    MilpProblem,
    MpsNameError,
    branch_and_bound,
    build_single_level_milp,
    read_mps,
    write_mps,
)
from tepps._mps import mps_names
from tests.studies import pst_triangle_study, three_bus_line_study

if TYPE_CHECKING:
    from pathlib import Path


def _line_milp() -> MilpProblem:
    return build_single_level_milp(three_bus_line_study(), mipgap=0.0)


def _written(milp: MilpProblem, free: bool = False) -> str:
    buffer = io.StringIO()
    write_mps(milp, buffer, free=free)
    return buffer.getvalue()


def _assert_same_problem(left: MilpProblem, right: MilpProblem) -> None:
    np.testing.assert_allclose(left.c, right.c, rtol=1e-11)
    np.testing.assert_allclose(left.a_ub.toarray(), right.a_ub.toarray(), rtol=1e-11)
    np.testing.assert_allclose(left.b_ub, right.b_ub, rtol=1e-11)
    np.testing.assert_allclose(left.a_eq.toarray(), right.a_eq.toarray(), rtol=1e-11)
    np.testing.assert_allclose(left.b_eq, right.b_eq, rtol=1e-11)
    np.testing.assert_allclose(left.lb, right.lb)
    np.testing.assert_allclose(left.ub, right.ub, rtol=1e-11)
    assert left.binaries == right.binaries


# --- Names ---


class TestNames:
    def test_short_names_kept(self) -> None:
        assert mps_names(["x0", "alpha[3]"], "C") == ["x0", "alpha[3]"]

    def test_long_names_mangled_in_fixed_format(self) -> None:
        (name,) = mps_names(["t1.theta[12]"], "C")
        digest = hashlib.sha1(b"t1.theta[12]").hexdigest()[:7]
        assert name == f"C{digest}"
        assert len(name) == 8

    def test_free_format_keeps_long_names(self) -> None:
        assert mps_names(["t1.theta[12]"], "C", free=True) == ["t1.theta[12]"]

    def test_whitespace_always_mangled(self) -> None:
        (name,) = mps_names(["a b"], "R", free=True)
        assert name.startswith("R") and " " not in name

    def test_duplicates(self) -> None:
        with pytest.raises(MpsNameError, match="duplicate name 'x'"):
            mps_names(["x", "y", "x"], "C")

    def test_collision_after_mangling(self) -> None:
        long_name = "a-very-long-name"
        mangled = "C" + hashlib.sha1(long_name.encode()).hexdigest()[:7]
        with pytest.raises(MpsNameError) as info:
            mps_names([long_name, mangled], "C")
        assert info.value.collisions == (f"{mangled} <- {long_name}, {mangled}",)


# --- Writing ---


class TestWrite:
    def test_sections_and_markers(self) -> None:
        text = _written(_line_milp())
        lines = text.splitlines()
        assert lines[0].split() == ["NAME", "TEPPS"]
        headers = [line for line in lines if not line[0].isspace()]
        assert headers == ["NAME          TEPPS", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"]
        assert text.count("'INTORG'") == 1
        assert text.count("'INTEND'") == 1
        assert lines[2].split() == ["N", "COST"]

    def test_fixed_columns(self) -> None:
        milp = MilpProblem(
            c=np.array([2.5]),
            a_ub=sp.csr_matrix([[1.0]]),
            b_ub=np.array([4.0]),
            a_eq=sp.csr_matrix((0, 1)),
            b_eq=np.zeros(0),
            lb=np.zeros(1),
            ub=np.array([np.inf]),
            binaries=(),
            var_names=("x0",),
            ub_names=("r0",),
            eq_names=(),
        )
        lines = _written(milp).splitlines()
        entry = lines[lines.index("COLUMNS") + 1]
        assert entry[4:12].strip() == "x0"
        assert entry[14:22].strip() == "COST"
        assert entry[24:36].strip() == "2.5"
        rhs = lines[lines.index("RHS") + 1]
        assert rhs.split() == ["RHS", "r0", "4"]
        assert lines[lines.index("BOUNDS") + 1] == "ENDATA"

    def test_offset_is_rejected(self) -> None:
        milp = dataclasses.replace(_line_milp(), objective_offset=1.0)
        with pytest.raises(ValueError, match="constant-free"):
            write_mps(milp, io.StringIO())

    def test_deterministic(self) -> None:
        assert _written(_line_milp()) == _written(_line_milp())


# --- Reading ---


class TestRead:
    @pytest.mark.parametrize("free", [False, True])
    def test_read_back(self, free: bool) -> None:
        milp = build_single_level_milp(pst_triangle_study(), mipgap=0.0)
        again = read_mps(io.StringIO(_written(milp, free=free)))
        _assert_same_problem(milp, again)
        expected = mps_names(milp.var_names, "C", free)
        assert list(again.var_names) == expected

    def test_free_format_keeps_names(self) -> None:
        milp = _line_milp()
        again = read_mps(io.StringIO(_written(milp, free=True)))
        assert again.var_names == milp.var_names
        assert again.ub_names == milp.ub_names
        assert again.eq_names == milp.eq_names

    def test_read_back_solves_to_same_objective(self) -> None:
        milp = _line_milp()
        again = dataclasses.replace(read_mps(io.StringIO(_written(milp))), mipgap=0.0)
        assert branch_and_bound(again).objective == pytest.approx(1.702426, abs=1e-6)

    def test_greater_equal_rows_are_negated(self) -> None:
        text = "\n".join(
            [
                "NAME          G",
                "ROWS",
                " N  obj",
                " G  lim",
                "COLUMNS",
                "    x         obj       1",
                "    x         lim       2",
                "RHS",
                "    RHS       lim       3",
                "ENDATA",
            ]
        )
        milp = read_mps(io.StringIO(text))
        assert milp.a_ub.toarray().tolist() == [[-2.0]]
        assert milp.b_ub.tolist() == [-3.0]
        assert milp.c.tolist() == [1.0]

    def test_ranges_unsupported(self) -> None:
        text = "NAME X\nROWS\n N  obj\nRANGES\n    RNG  obj  1\nENDATA\n"
        with pytest.raises(ValueError, match="RANGES"):
            read_mps(io.StringIO(text))

    def test_general_integer_rejected(self) -> None:
        text = "\n".join(
            [
                "NAME          I",
                "ROWS",
                " N  obj",
                "COLUMNS",
                "    M0        'MARKER'                 'INTORG'",
                "    x         obj       1",
                "    M1        'MARKER'                 'INTEND'",
                "BOUNDS",
                " UP BND       x         5",
                "ENDATA",
            ]
        )
        with pytest.raises(ValueError, match="not binary"):
            read_mps(io.StringIO(text))


# --- Third-party reader ---


class TestThirdPartyReader:
    def test_cbc_agrees(self, tmp_path: Path) -> None:
        pulp = pytest.importorskip("pulp")
        path = tmp_path / "plan.mps"
        path.write_text(_written(_line_milp()))
        _, problem = pulp.LpProblem.fromMPS(str(path))
        problem.solve(pulp.PULP_CBC_CMD(msg=0))
        assert pulp.LpStatus[problem.status] == "Optimal"
        assert pulp.value(problem.objective) == pytest.approx(1.702426, abs=1e-5)

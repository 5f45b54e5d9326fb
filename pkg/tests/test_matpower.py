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

from importlib import resources

import pytest

from tepps import (
    CaseParseError,
    CaseStructureError,
    RawGenerator,
    apply_modifiers,
    format_matpower,
    load_case24,
    parse_matpower,
)
from tepps._ieee24 import LOAD_SCALE
from tepps._matpower import PIECEWISE_LINEAR_COST
from tests.studies import TINY_CASE


def _replace_section(text: str, name: str, body: str) -> str:
    head, _, rest = text.partition(f"mpc.{name} = [")
    _, _, tail = rest.partition("];")
    return f"{head}mpc.{name} = [\n{body}\n];{tail}"


# --- Parsing ---


class TestParse:
    def test_tiny_case(self) -> None:
        case = parse_matpower(TINY_CASE)
        assert [b.id for b in case.buses] == [1, 2]
        assert case.buses[0].is_reference
        assert case.buses[1].load == 50.0
        assert len(case.generators) == 1
        assert case.generators[0].marginal_cost == pytest.approx(20.0)
        assert len(case.branches) == 1
        assert case.branches[0].reactance == 0.1
        assert case.branches[0].rating == 80.0
        assert case.mva_base == 100.0

    def test_warnings_report_dropped_rows(self) -> None:
        case = parse_matpower(TINY_CASE)
        assert case.warnings[0] == "ignored section mpc.areas"
        assert any("generator row 2" in w and "out of service" in w for w in case.warnings)
        assert any("branch row 2" in w for w in case.warnings)

    def test_warnings_are_logged(self, caplog: pytest.LogCaptureFixture) -> None:
        with caplog.at_level("WARNING", logger="tepps"):
            parse_matpower(TINY_CASE)
        assert "ignored section mpc.areas" in caplog.text

    def test_comments_are_ignored(self) -> None:
        text = TINY_CASE.replace("mpc.bus = [\n", "mpc.bus = [\n  % id type Pd\n")
        text = text.replace("0.95;\n", "0.95;  % slack\n", 1)
        assert parse_matpower(text).buses[1].load == 50.0

    def test_reference_case(self) -> None:
        text = resources.files("tepps").joinpath("data/case24_ieee_rts.m").read_text("utf-8")
        case = parse_matpower(text)
        assert len(case.buses) == 24
        assert len(case.branches) == 38
        assert len(case.generators) == 32
        # the synchronous condenser at bus 14 has no active capacity
        assert 14 not in {g.bus for g in case.generators}
        assert [b.id for b in case.buses if b.is_reference] == [13]


# --- Errors ---


class TestParseErrors:
    def test_malformed_token_position(self) -> None:
        text = _replace_section(TINY_CASE, "bus", "  1  3  0;\n  2  1  4x0;")
        with pytest.raises(CaseParseError) as info:
            parse_matpower(text)
        assert info.value.column == 9
        assert info.value.line == text.splitlines().index("  2  1  4x0;") + 1
        assert "4x0" in str(info.value)
        assert info.value.exit_code == 2

    def test_malformed_scalar(self) -> None:
        with pytest.raises(CaseParseError):
            parse_matpower(TINY_CASE.replace("mpc.baseMVA = 100;", "mpc.baseMVA = 1o0;"))

    def test_truncated_row(self) -> None:
        text = _replace_section(TINY_CASE, "branch", "  1  2  0  0.1  0;")
        with pytest.raises(CaseStructureError, match="branch row 1"):
            parse_matpower(text)

    def test_missing_section(self) -> None:
        head, _, _ = TINY_CASE.partition("mpc.gencost")
        with pytest.raises(CaseStructureError, match="gencost"):
            parse_matpower(head)

    def test_unclosed_matrix(self) -> None:
        head, _, _ = TINY_CASE.partition("];\nmpc.areas")
        with pytest.raises(CaseStructureError, match="not closed"):
            parse_matpower(head)

    def test_short_gencost_table(self) -> None:
        text = _replace_section(TINY_CASE, "gencost", "  2  0  0  3  0.01  20  0;")
        with pytest.raises(CaseStructureError, match="gencost has 1 rows"):
            parse_matpower(text)

    def test_unsupported_cost_model(self) -> None:
        text = TINY_CASE.replace("  2  0  0  3  0.01  20  0;", "  3  0  0  3  0.01  20  0;")
        with pytest.raises(CaseStructureError, match="unsupported model"):
            parse_matpower(text)

    def test_unknown_bus_reference(self) -> None:
        text = TINY_CASE.replace("  1  2  0  0.1  0  80", "  1  7  0  0.1  0  80")
        with pytest.raises(CaseStructureError, match="unknown buses"):
            parse_matpower(text)


# --- Marginal cost ---


class TestMarginalCost:
    def test_linear_coefficient(self) -> None:
        gen = RawGenerator(bus=1, p_min=0.0, p_max=100.0, cost=(0.01, 20.0, 0.0))
        assert gen.marginal_cost == 20.0

    def test_pure_quadratic_uses_midpoint_derivative(self) -> None:
        gen = RawGenerator(bus=1, p_min=0.0, p_max=100.0, cost=(0.01, 0.0, 0.0))
        assert gen.marginal_cost == pytest.approx(1.0)

    def test_piecewise_average_slope(self) -> None:
        gen = RawGenerator(
            bus=1,
            p_min=0.0,
            p_max=100.0,
            cost_model=PIECEWISE_LINEAR_COST,
            cost=(0.0, 0.0, 50.0, 1000.0, 100.0, 3000.0),
        )
        assert gen.marginal_cost == pytest.approx(30.0)

    def test_constant_cost(self) -> None:
        assert RawGenerator(bus=1, p_min=0.0, p_max=1.0, cost=(5.0,)).marginal_cost == 0.0


# --- Printing and modifiers ---


class TestFormat:
    def test_tiny_case_reads_back(self) -> None:
        case = parse_matpower(TINY_CASE)
        assert parse_matpower(format_matpower(case, "tiny")) == case

    def test_reference_case_reads_back(self) -> None:
        case = load_case24()
        again = parse_matpower(format_matpower(case))
        assert again == case
        assert again.warnings == ()


class TestModifiers:
    def test_scales(self) -> None:
        case = load_case24()
        first_branch = case.branches[0]
        assert (first_branch.from_bus, first_branch.to_bus) == (1, 2)
        assert first_branch.rating == pytest.approx(105.0)
        assert case.buses[0].load == pytest.approx(108.0 * LOAD_SCALE)
        assert case.generators[0].p_max == pytest.approx(30.0)
        assert case.generators[0].p_min == pytest.approx(24.0)

    def test_identity(self) -> None:
        case = parse_matpower(TINY_CASE)
        assert apply_modifiers(case) == case

    def test_reactance_untouched(self) -> None:
        case = parse_matpower(TINY_CASE)
        scaled = apply_modifiers(case, load_scale=2.0, gen_scale=3.0, thermal_derate=0.5)
        assert scaled.branches[0].reactance == case.branches[0].reactance
        assert scaled.branches[0].rating == 40.0
        assert scaled.buses[1].load == 100.0
        assert scaled.generators[0].p_max == 300.0

    @pytest.mark.parametrize("field", ["load_scale", "gen_scale", "thermal_derate"])
    def test_rejects_non_positive(self, field: str) -> None:
        with pytest.raises(ValueError, match=field):
            apply_modifiers(parse_matpower(TINY_CASE), **{field: 0.0})

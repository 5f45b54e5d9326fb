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
import json
from typing import TYPE_CHECKING, Any

import pytest

from tepps import (
    Budgets,
    CandidateSet,
    ProspectiveLineSpec,
    PstCandidateSpec,
    _planner,
    cli,
    enumerate_oracle,
    parse_matpower,
    read_study,
    write_study,
)
from tepps._formulation import audit_solution
from tepps._study_io import (
    read_case,
    read_scenarios,
    write_candidates,
    write_case,
    write_scenarios,
)
from tests.studies import (
    TINY_CASE,
    pst_triangle_study,
    single_scenario,
    three_bus_line_study,
    two_bus_study,
)

if TYPE_CHECKING:
    from pathlib import Path

    from tepps import AuditReport, PlanningStudy, SolverConfig


def _study_file(tmp_path: Path, study: PlanningStudy | None = None) -> str:
    path = tmp_path / "study.json"
    write_study(study or three_bus_line_study(), path)
    return str(path)


def _report(directory: Path) -> dict[str, object]:
    return json.loads((directory / "report.json").read_text())


# --- Planning commands ---


class TestPlan:
    def test_outputs(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        out = tmp_path / "out"
        args = ["plan", "--study", _study_file(tmp_path), "--mipgap", "0", "--out", str(out)]
        assert cli.main(args) == 0
        for name in ("plan.json", "report.json", "summary.csv", "lmp.csv", "dispatch.csv"):
            assert (out / name).exists()
        assert json.loads((out / "plan.json").read_text())["lines"] == ["1-3+"]
        summary = _report(out)["summary"]
        assert isinstance(summary, dict)
        assert summary["objective"] == pytest.approx(1.702426, abs=1e-6)
        assert summary["status"] == "optimal"
        assert summary["solve_seconds"] is None
        assert "objective 1.702426" in capsys.readouterr().out

    def test_deterministic(self, tmp_path: Path) -> None:
        study = _study_file(tmp_path)
        for name in ("a", "b"):
            assert cli.main(["plan", "--study", study, "--out", str(tmp_path / name)]) == 0
        for name in ("report.json", "summary.csv", "lmp.csv", "dispatch.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_timing_is_opt_in(self, tmp_path: Path) -> None:
        out = tmp_path / "out"
        args = ["plan", "--study", _study_file(tmp_path), "--timing", "--out", str(out)]
        assert cli.main(args) == 0
        summary = _report(out)["summary"]
        assert isinstance(summary, dict)
        assert summary["solve_seconds"] >= 0.0

    def test_export_mps(self, tmp_path: Path) -> None:
        mps = tmp_path / "model.mps"
        args = ["plan", "--study", _study_file(tmp_path), "--export-mps", str(mps)]
        assert cli.main([*args, "--out", str(tmp_path / "out")]) == 0
        text = mps.read_text()
        assert text.startswith("NAME")
        assert text.rstrip().endswith("ENDATA")

    def test_pst_budget_sweep(self, tmp_path: Path) -> None:
        out = tmp_path / "sweep"
        study = _study_file(tmp_path, pst_triangle_study())
        args = ["plan", "--study", study, "--pst-budget-sweep", "0,15", "--out", str(out)]
        assert cli.main(args) == 0
        lines = (out / "sweep.csv").read_text().splitlines()
        assert lines[0] == "pst_budget,objective,consumer_payment"
        assert len(lines) == 3

    def test_sweep_honours_dual_big_m(
        self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        monkeypatch.setenv("TEPPS_BIG_M_RETRIES", "0")
        study = _study_file(tmp_path, pst_triangle_study())
        args = ["plan", "--study", study, "--pst-budget-sweep", "0", "--mipgap", "0"]
        assert cli.main([*args, "--out", str(tmp_path / "a")]) == 0
        assert cli.main([*args, "--dual-big-m", "200", "--out", str(tmp_path / "b")]) == 1


class TestOracleAndEvaluate:
    def test_oracle_matches_plan(self, tmp_path: Path) -> None:
        study = _study_file(tmp_path)
        assert cli.main(["oracle", "--study", study, "--out", str(tmp_path / "o")]) == 0
        summary = _report(tmp_path / "o")["summary"]
        assert isinstance(summary, dict)
        assert summary["status"] == "enumerated"
        assert summary["objective"] == pytest.approx(1.702426, abs=1e-6)

    def test_evaluate_plan_file(self, tmp_path: Path) -> None:
        study = _study_file(tmp_path)
        assert cli.main(["plan", "--study", study, "--out", str(tmp_path / "p")]) == 0
        plan = str(tmp_path / "p" / "plan.json")
        args = ["evaluate", "--study", study, "--plan", plan, "--out", str(tmp_path / "e")]
        assert cli.main(args) == 0
        evaluated = _report(tmp_path / "e")["summary"]
        assert isinstance(evaluated, dict)
        assert evaluated["objective"] == pytest.approx(1.702426, abs=1e-6)

    def test_compare_reports(self, tmp_path: Path) -> None:
        study = _study_file(tmp_path)
        empty_plan = str(tmp_path / "empty.json")
        (tmp_path / "empty.json").write_text(
            json.dumps({"schema_version": 1, "kind": "plan", "psts": [], "lines": []})
        )
        assert cli.main(["plan", "--study", study, "--out", str(tmp_path / "p")]) == 0
        out = str(tmp_path / "e")
        assert cli.main(["evaluate", "--study", study, "--plan", empty_plan, "--out", out]) == 0
        table = tmp_path / "lmp.csv"
        args = [
            "compare",
            str(tmp_path / "e" / "report.json"),
            str(tmp_path / "p" / "report.json"),
            "--scenarios",
            "1",
            "--out",
            str(table),
        ]
        assert cli.main(args) == 0
        lines = table.read_text().splitlines()
        assert lines[0] == "scenario,bus,lmp_a,lmp_b,difference"
        assert len(lines) == 4


# --- Data preparation commands ---


class TestPreparation:
    def test_ingest(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        case_path = tmp_path / "tiny.m"
        case_path.write_text(TINY_CASE)
        out = tmp_path / "network.json"
        args = ["ingest", str(case_path), "--scale-load", "2", "--out", str(out)]
        assert cli.main(args) == 0
        case = read_case(out)
        assert case.buses[1].load == 100.0
        assert "warnings 3" in capsys.readouterr().out

    def test_reduce(self, tmp_path: Path) -> None:
        load = tmp_path / "load.csv"
        wind = tmp_path / "wind.csv"
        load.write_text("value\n" + "\n".join(["50", "52", "100", "98"]) + "\n")
        wind.write_text("value\n" + "\n".join(["0.1", "0.1", "0.9", "0.9"]) + "\n")
        out = tmp_path / "scenarios.json"
        args = ["reduce", "--load", str(load), "--wind", str(wind), "--k", "2", "--out", str(out)]
        assert cli.main(args) == 0
        scenarios = read_scenarios(out)
        assert sorted(s.hours for s in scenarios) == [2.0, 2.0]

    def test_assemble(self, tmp_path: Path) -> None:
        write_case(parse_matpower(TINY_CASE), tmp_path / "network.json")
        write_scenarios(single_scenario(), tmp_path / "scenarios.json")
        write_candidates(
            CandidateSet(
                lines=(ProspectiveLineSpec(1, 2, 0.1, 50.0, 4.0),),
                psts=(PstCandidateSpec("1-2", -0.1, 0.1),),
                budgets=Budgets(pst=10.0, line=10.0),
            ),
            tmp_path / "candidates.json",
        )
        out = tmp_path / "study.json"
        args = [
            "assemble",
            "--network",
            str(tmp_path / "network.json"),
            "--scenarios",
            str(tmp_path / "scenarios.json"),
            "--candidates",
            str(tmp_path / "candidates.json"),
            "--out",
            str(out),
        ]
        assert cli.main(args) == 0
        assert read_study(out).candidate_count == 2

    def test_ieee24(self, tmp_path: Path) -> None:
        out = tmp_path / "case3.json"
        assert cli.main(["ieee24", "--case", "3", "--out", str(out)]) == 0
        study = read_study(out)
        assert study.candidate_count == 17
        assert study.pst_budget == 15.0


# --- Exit codes ---


class TestExitCodes:
    def test_version(self, capsys: pytest.CaptureFixture[str]) -> None:
        assert cli.main(["--version"]) == 0
        assert "tepps 0.1.0" in capsys.readouterr().out

    def test_missing_input_file(self, tmp_path: Path) -> None:
        args = ["plan", "--study", str(tmp_path / "nope.json"), "--out", str(tmp_path)]
        assert cli.main(args) == 2

    def test_malformed_case(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        case_path = tmp_path / "bad.m"
        case_path.write_text(TINY_CASE.replace("mpc.baseMVA = 100;", "mpc.baseMVA = 1o0;"))
        assert cli.main(["ingest", str(case_path), "--out", str(tmp_path / "n.json")]) == 2
        assert "line 3" in capsys.readouterr().err

    def test_bad_arguments(self) -> None:
        assert cli.main(["plan"]) == 3
        assert cli.main(["plan", "--study", "s", "--out", "o", "--pst-budget-sweep", "a,b"]) == 3

    def test_invalid_study(self, tmp_path: Path) -> None:
        path = tmp_path / "study.json"
        write_study(three_bus_line_study(), path)
        doc = json.loads(path.read_text())
        doc["network"]["branches"][0]["rating"] = -1.0
        path.write_text(json.dumps(doc))
        assert cli.main(["plan", "--study", str(path), "--out", str(tmp_path / "o")]) == 3

    def test_enumeration_guard(self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
        def guarded(study: PlanningStudy, config: SolverConfig) -> object:
            return enumerate_oracle(study, config, limit=0)

        monkeypatch.setattr(cli, "enumerate_oracle", guarded)
        study = _study_file(tmp_path)
        assert cli.main(["oracle", "--study", study, "--out", str(tmp_path / "o")]) == 4

    def test_infeasible_plan(self, tmp_path: Path) -> None:
        study = _study_file(tmp_path, two_bus_study(load_mw=500.0, rating=100.0))
        plan = tmp_path / "plan.json"
        plan.write_text(json.dumps({"schema_version": 1, "kind": "plan", "psts": [], "lines": []}))
        args = ["evaluate", "--study", study, "--plan", str(plan), "--out", str(tmp_path / "o")]
        assert cli.main(args) == 5

    def test_undecodable_study(self, tmp_path: Path) -> None:
        path = tmp_path / "study.json"
        path.write_bytes(b"\xff\xfe{\x00}")
        assert cli.main(["plan", "--study", str(path), "--out", str(tmp_path / "o")]) == 2

    def test_failed_optimality_audit(
        self,
        tmp_path: Path,
        monkeypatch: pytest.MonkeyPatch,
        capsys: pytest.CaptureFixture[str],
    ) -> None:
        def uncertified(*args: Any, **kwargs: Any) -> AuditReport:
            return dataclasses.replace(audit_solution(*args, **kwargs), dual_residual=1.0)

        monkeypatch.setattr(_planner, "audit_solution", uncertified)
        args = ["plan", "--study", _study_file(tmp_path), "--out", str(tmp_path / "o")]
        assert cli.main(args) == 1
        assert "optimality audit failed" in capsys.readouterr().err
        assert not (tmp_path / "o" / "report.json").exists()

    def test_unexpected_failure(self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
        def broken(source: object) -> PlanningStudy:
            raise RuntimeError("boom")

        monkeypatch.setattr(cli, "read_study", broken)
        assert cli.main(["plan", "--study", "s", "--out", str(tmp_path)]) == 1

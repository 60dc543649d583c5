import json
from pathlib import Path

import numpy as np
import pytest

from corridor_opt.cli import main

from conftest import FIXTURE_DIR, scenario_path


def read_csv(path: Path) -> np.ndarray:
    return np.genfromtxt(path, delimiter=",", skip_header=1)


class TestSolveVerb:
    def test_case1_outputs(self, tmp_path):
        out = tmp_path / "case1"
        code = main(["solve", "--scenario", str(scenario_path("case1")),
                     "--out", str(out), "--plots"])
        assert code == 0
        rows = read_csv(out / "trajectory.csv")
        terminal = rows[np.isclose(rows[:, 1], 26.0)]
        assert abs(terminal[0, 4]) <= 1e-6          # u(26) ~ 0
        assert terminal[0, 2] == pytest.approx(300.0, abs=1e-6)
        report = json.loads((out / "report.json").read_text())
        assert report["schema_version"] == 1
        assert report["vehicles"][0]["cost"] > 0
        svg = (out / "trajectory.svg").read_text()
        assert svg.lstrip().startswith("<?xml")

    def test_case4_margin_touches_zero_in_window(self, tmp_path):
        out = tmp_path / "case4"
        assert main(["solve", "--scenario", str(scenario_path("case4")),
                     "--out", str(out)]) == 0
        rows = read_csv(out / "trajectory.csv")
        report = json.loads((out / "report.json").read_text())
        (w_start, w_end), = report["vehicles"][0]["constrained_windows"]
        in_window = rows[(rows[:, 1] >= w_start) & (rows[:, 1] <= w_end)]
        assert len(in_window) > 0
        assert np.abs(in_window[:, 5]).max() <= 1e-6
        assert rows[:, 5].min() >= -1e-6

    def test_malformed_file_exits_2_without_outputs(self, tmp_path):
        bad = tmp_path / "bad.yaml"
        bad.write_text("corridor: {length_m: -5}\n")
        out = tmp_path / "outdir"
        assert main(["solve", "--scenario", str(bad), "--out", str(out)]) == 2
        assert not out.exists()

    def test_infeasible_exits_3(self, tmp_path):
        out = tmp_path / "outdir"
        code = main(["solve", "--scenario", str(FIXTURE_DIR / "infeasible.yaml"),
                     "--out", str(out)])
        assert code == 3
        assert not out.exists()

    def test_byte_identical_reruns(self, tmp_path):
        blobs = []
        for sub in ("a", "b"):
            out = tmp_path / sub
            main(["solve", "--scenario", str(scenario_path("case3")),
                  "--out", str(out), "--plots"])
            blobs.append(tuple((out / n).read_bytes()
                               for n in ("trajectory.csv", "report.json",
                                         "trajectory.svg")))
        assert blobs[0] == blobs[1]

    def test_dynamics_finite_difference_check(self, tmp_path):
        out = tmp_path / "case4"
        main(["solve", "--scenario", str(scenario_path("case4")),
              "--out", str(out), "--dt", "0.05"])
        rows = read_csv(out / "trajectory.csv")
        report = json.loads((out / "report.json").read_text())
        junctions = set(report["vehicles"][0]["junction_times"])
        t, p, v, u = rows[:, 1], rows[:, 2], rows[:, 3], rows[:, 4]
        dt = t[1] - t[0]
        for j in range(1, len(t) - 1):
            # skip rows braketing a control discontinuity
            if any(t[j - 1] - 1e-9 <= jt <= t[j + 1] + 1e-9 for jt in junctions):
                continue
            dp = (p[j + 1] - p[j - 1]) / (2 * dt)
            dv = (v[j + 1] - v[j - 1]) / (2 * dt)
            assert dp == pytest.approx(v[j], abs=1e-3 * max(1.0, abs(v[j])))
            assert dv == pytest.approx(u[j], abs=1e-3 * max(1.0, abs(u[j])))


class TestSimulateVerb:
    def test_outputs_and_schema(self, tmp_path):
        out = tmp_path / "sim"
        code = main(["simulate", "--scenario", str(FIXTURE_DIR / "minicorridor.yaml"),
                     "--out", str(out), "--mode", "optimal"])
        assert code == 0
        assert (out / "samples.csv").exists()
        events = [json.loads(line) for line in
                  (out / "events.jsonl").read_text().splitlines()]
        assert any(e["event"] == "exit" for e in events)
        report = json.loads((out / "report.json").read_text())
        assert report["aggregates"]["vehicle_count"] > 0


class TestCompareVerb:
    def test_single_vehicle_scenario_well_formed(self, tmp_path):
        out = tmp_path / "cmp"
        code = main(["compare", "--scenario", str(FIXTURE_DIR / "single.yaml"),
                     "--out", str(out)])
        assert code == 0
        cmp_payload = json.loads((out / "comparison.json").read_text())
        assert cmp_payload["modes"] == ["baseline", "optimal"]
        assert cmp_payload["violation_counts"] == [0, 0]

    def test_seed_changes_values_not_schema(self, tmp_path):
        payloads = []
        for seed in ("3", "4"):
            out = tmp_path / f"cmp{seed}"
            code = main(["compare", "--scenario",
                         str(FIXTURE_DIR / "minicorridor.yaml"),
                         "--out", str(out), "--seed", seed])
            assert code == 0
            payloads.append(json.loads((out / "comparison.json").read_text()))
        assert payloads[0].keys() == payloads[1].keys()
        assert payloads[0] != payloads[1]


class TestOracleCheckVerb:
    def test_case1_passes(self, capsys):
        assert main(["oracle-check", "--scenario", str(scenario_path("case1"))]) == 0
        assert "OK" in capsys.readouterr().out

    def test_case3_passes(self):
        assert main(["oracle-check", "--scenario", str(scenario_path("case3"))]) == 0

    def test_infeasible_exits_3(self):
        code = main(["oracle-check", "--scenario",
                     str(FIXTURE_DIR / "infeasible.yaml")])
        assert code == 3

    def test_impossible_tolerance_exits_4(self):
        code = main(["oracle-check", "--scenario", str(scenario_path("case3")),
                     "--steps", "40", "--tol", "1e-12"])
        assert code == 4


class TestPlotVerb:
    def test_renders_csv(self, tmp_path):
        out = tmp_path / "solved"
        main(["solve", "--scenario", str(scenario_path("case1")), "--out", str(out)])
        plot_out = tmp_path / "plots"
        assert main(["plot", "--csv", str(out / "trajectory.csv"),
                     "--out", str(plot_out)]) == 0
        assert (plot_out / "trajectory.svg").exists()

    def test_missing_csv_exits_2(self, tmp_path):
        assert main(["plot", "--csv", str(tmp_path / "nope.csv"),
                     "--out", str(tmp_path)]) == 2

"""Command-line interface: artifact plumbing, exit codes, determinism."""

import json
import os

import numpy as np
import pytest

from tankfdi import fuzzy, harness
from tankfdi.cli import main

from conftest import OPERATING_INPUTS


@pytest.fixture
def scenario_file(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps({
        "schema": 1, "seed": 3, "duration": 8.0, "dt": 0.1,
        "noise_std_R": 0.0, "noise_std_C": 0.0,
        "events": [{"target": "De1", "start": 3.0, "magnitude": 2.0,
                    "profile": "step"}],
        "inputs": {"Msf1": 1.0, "Msf2": 0.8},
    }))
    return str(path)


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "cfg.json"
    fuzzy.save_config(fuzzy.example_tuned_config("swarm"), str(path))
    return str(path)


@pytest.fixture
def suite_file(tmp_path):
    path = tmp_path / "suite.json"
    harness.save_suite(harness.generate_suite(5, seed=7), str(path),
                       inputs=OPERATING_INPUTS)
    return str(path)


class TestSimulate:
    def test_writes_matching_csvs(self, tmp_path, scenario_file):
        trace = tmp_path / "trace.csv"
        resid = tmp_path / "resid.csv"
        code = main(["simulate", "--scenario", scenario_file,
                     "--out-trace", str(trace), "--out-residuals", str(resid)])
        assert code == 0
        t_lines = trace.read_text().splitlines()
        r_lines = resid.read_text().splitlines()
        assert len(t_lines) == len(r_lines) == 82
        assert (tmp_path / "trace.csv.run.json").exists()

    def test_fault_free_scenario_residuals_near_zero(self, tmp_path):
        sc = tmp_path / "clean.json"
        sc.write_text(json.dumps({"schema": 1, "duration": 5.0, "dt": 0.1,
                                  "events": []}))
        resid = tmp_path / "resid.csv"
        code = main(["simulate", "--scenario", str(sc),
                     "--out-trace", str(tmp_path / "t.csv"),
                     "--out-residuals", str(resid)])
        assert code == 0
        rows = [ln.split(",") for ln in resid.read_text().splitlines()[1:]]
        values = np.array([[float(v) for v in row[1:]] for row in rows])
        assert np.abs(values).max() < 1e-9

    def test_malformed_scenario_exits_2_naming_field(self, tmp_path, capsys):
        sc = tmp_path / "bad.json"
        sc.write_text(json.dumps({"schema": 1, "events": [
            {"target": "De1", "start": 1.0}]}))
        code = main(["simulate", "--scenario", str(sc),
                     "--out-trace", str(tmp_path / "t.csv"),
                     "--out-residuals", str(tmp_path / "r.csv")])
        assert code == 2
        assert "magnitude" in capsys.readouterr().err

    def test_divergent_plant_exits_3(self, tmp_path, capsys):
        plant_cfg = tmp_path / "plant.json"
        # microscopic capacitance with a huge step makes the plant stiff
        # beyond the fixed-step integrator's stability region
        plant_cfg.write_text(json.dumps({"schema": 1, "C1": 1e-8, "C2": 1e-8,
                                         "C3": 1e-8}))
        sc = tmp_path / "sc.json"
        sc.write_text(json.dumps({"schema": 1, "duration": 50.0, "dt": 0.5,
                                  "events": [],
                                  "inputs": {"Msf1": 1e6, "Msf2": 0.0}}))
        code = main(["simulate", "--scenario", str(sc), "--plant", str(plant_cfg),
                     "--out-trace", str(tmp_path / "t.csv"),
                     "--out-residuals", str(tmp_path / "r.csv")])
        assert code == 3
        assert "diverged" in capsys.readouterr().err


class TestTune:
    def test_pso_history_non_increasing(self, tmp_path, suite_file, capsys):
        out_cfg = tmp_path / "tuned.json"
        out_hist = tmp_path / "hist.csv"
        code = main(["tune", "--method", "pso", "--suite", suite_file,
                     "--swarm-size", "6", "--iterations", "4", "--seed", "1",
                     "--out-config", str(out_cfg), "--out-history", str(out_hist)])
        assert code == 0
        lines = out_hist.read_text().splitlines()
        assert lines[0] == "iteration,best_fitness,mean_fitness"
        best = [float(ln.split(",")[1]) for ln in lines[1:]]
        assert len(best) == 5
        assert all(b <= a for a, b in zip(best, best[1:]))
        assert "final fitness" in capsys.readouterr().out
        fuzzy.load_config(str(out_cfg))  # parses back as a valid config

    def test_ga_single_generation(self, tmp_path, suite_file):
        code = main(["tune", "--method", "ga", "--suite", suite_file,
                     "--population", "6", "--max-generations", "1",
                     "--stall-generations", "1", "--seed", "1",
                     "--out-config", str(tmp_path / "cfg.json"),
                     "--out-history", str(tmp_path / "hist.csv")])
        assert code == 0
        lines = (tmp_path / "hist.csv").read_text().splitlines()
        assert len(lines) == 3  # header + init + one generation

    def test_invalid_acceleration_exits_2(self, tmp_path, suite_file, capsys):
        code = main(["tune", "--method", "pso", "--suite", suite_file,
                     "--c1", "2", "--c2", "2",
                     "--out-config", str(tmp_path / "cfg.json"),
                     "--out-history", str(tmp_path / "hist.csv")])
        assert code == 2
        assert "c1 + c2 > 4" in capsys.readouterr().err

    def test_generate_flag_builds_suite(self, tmp_path):
        code = main(["tune", "--method", "pso", "--generate", "4",
                     "--suite-seed", "5", "--swarm-size", "5",
                     "--iterations", "2", "--seed", "2",
                     "--out-config", str(tmp_path / "cfg.json"),
                     "--out-history", str(tmp_path / "hist.csv")])
        assert code == 0


class TestDetect:
    def test_writes_degree_csv_and_dot(self, tmp_path, scenario_file, config_file):
        out = tmp_path / "degrees.csv"
        dot = tmp_path / "state.dot"
        code = main(["detect", "--config", config_file, "--scenario",
                     scenario_file, "--out", str(out), "--dot", str(dot)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("t,deg_Msf1")
        assert len(lines) == 81
        assert dot.read_text().startswith("digraph")


class TestEvaluate:
    def test_single_row_metrics(self, tmp_path, config_file, suite_file):
        out = tmp_path / "metrics.csv"
        code = main(["evaluate", "--config", config_file, "--suite", suite_file,
                     "--out", str(out), "--reports", str(tmp_path / "rep.jsonl")])
        assert code == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 2
        assert lines[1].split(",")[1] == "5"
        assert len((tmp_path / "rep.jsonl").read_text().splitlines()) == 5

    def test_render_flag_emits_dot_per_scenario(self, tmp_path, config_file,
                                                suite_file):
        out_dir = tmp_path / "dots"
        code = main(["evaluate", "--config", config_file, "--suite", suite_file,
                     "--out", str(tmp_path / "m.csv"), "--render", str(out_dir)])
        assert code == 0
        assert sorted(os.listdir(out_dir)) == [
            f"scenario_{i:03d}.dot" for i in range(5)]


class TestCompare:
    def test_rows_share_suite_column(self, tmp_path, config_file, suite_file):
        detuned = tmp_path / "detuned.json"
        fuzzy.save_config(fuzzy.detuned_config(), str(detuned))
        out = tmp_path / "cmp.csv"
        code = main(["compare", "--config", f"tuned={config_file}",
                     "--config", f"untuned={detuned}",
                     "--suite", suite_file, "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 3
        assert [ln.split(",")[0] for ln in lines[1:]] == ["tuned", "untuned"]
        assert lines[1].split(",")[1] == lines[2].split(",")[1] == "5"

    def test_name_path_syntax_enforced(self, tmp_path, suite_file, capsys):
        code = main(["compare", "--config", "nameonly", "--suite", suite_file,
                     "--out", str(tmp_path / "x.csv")])
        assert code == 2
        assert "NAME=PATH" in capsys.readouterr().err

    def test_render_flag_writes_per_config_dirs(self, tmp_path, config_file,
                                                suite_file):
        detuned = tmp_path / "detuned.json"
        fuzzy.save_config(fuzzy.detuned_config(), str(detuned))
        out_dir = tmp_path / "dots"
        code = main(["compare", "--config", f"tuned={config_file}",
                     "--config", f"untuned={detuned}", "--suite", suite_file,
                     "--out", str(tmp_path / "cmp.csv"),
                     "--render", str(out_dir)])
        assert code == 0
        assert len(os.listdir(out_dir / "tuned")) == 5
        assert len(os.listdir(out_dir / "untuned")) == 5


class TestSimulateModes:
    def test_nonlinear_mode_changes_trace(self, tmp_path, scenario_file):
        outs = {}
        for mode in ("linear", "nonlinear"):
            trace = tmp_path / f"{mode}.csv"
            code = main(["simulate", "--scenario", scenario_file, "--mode", mode,
                         "--out-trace", str(trace),
                         "--out-residuals", str(tmp_path / f"{mode}_r.csv")])
            assert code == 0
            outs[mode] = trace.read_bytes()
        assert outs["linear"] != outs["nonlinear"]


class TestRender:
    def test_dot_to_stdout(self, capsys):
        code = main(["render", "--degrees", "0,0,0,0,0,0,0"])
        assert code == 0
        assert capsys.readouterr().out.startswith("digraph")

    def test_ansi_respects_no_color(self, capsys, monkeypatch):
        monkeypatch.setenv("NO_COLOR", "1")
        code = main(["render", "--degrees", "0,0.5,1,0,0,0,0", "--ansi"])
        assert code == 0
        assert "\x1b" not in capsys.readouterr().out

    def test_wrong_degree_count_exits_2(self, capsys):
        code = main(["render", "--degrees", "0,1"])
        assert code == 2


class TestDeterminism:
    def run_twice(self, argv_builder, tmp_path):
        outputs = []
        for tag in ("a", "b"):
            sub = tmp_path / tag
            sub.mkdir()
            argv, files = argv_builder(sub)
            assert main(argv) == 0
            outputs.append([open(f, "rb").read() for f in files])
        return outputs

    def test_simulate_byte_identical(self, tmp_path, scenario_file):
        def build(sub):
            t, r = sub / "t.csv", sub / "r.csv"
            return (["simulate", "--scenario", scenario_file,
                     "--out-trace", str(t), "--out-residuals", str(r)],
                    [t, r])

        a, b = self.run_twice(build, tmp_path)
        assert a == b

    def test_tune_byte_identical(self, tmp_path, suite_file):
        def build(sub):
            c, h = sub / "c.json", sub / "h.csv"
            return (["tune", "--method", "pso", "--suite", suite_file,
                     "--swarm-size", "5", "--iterations", "3", "--seed", "9",
                     "--out-config", str(c), "--out-history", str(h)],
                    [c, h])

        a, b = self.run_twice(build, tmp_path)
        assert a == b

    def test_evaluate_byte_identical(self, tmp_path, config_file, suite_file):
        def build(sub):
            m, r = sub / "m.csv", sub / "r.jsonl"
            return (["evaluate", "--config", config_file, "--suite", suite_file,
                     "--out", str(m), "--reports", str(r)],
                    [m, r])

        a, b = self.run_twice(build, tmp_path)
        assert a == b

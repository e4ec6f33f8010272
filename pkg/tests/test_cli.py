import csv
import json

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from proxsim.api import create_app
from proxsim.campaign import CampaignConfig
from proxsim.cli import main
from proxsim.errors import InvalidConfig
from proxsim.journal import read_journal
from proxsim.serialize import load_model


@pytest.fixture
def runner():
    return CliRunner()


def _run_config(tmp_path, **campaign):
    campaign.setdefault("initial_design_size", 6)
    campaign.setdefault("max_iterations", 2)
    campaign.setdefault("holdout_size", 5)
    campaign.setdefault("seed", 1)
    doc = {"simulator": "atm_slot_overload", "campaign": campaign}
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc))
    return path


class TestRun:
    def test_zero_iteration_run_writes_artifacts(self, runner, tmp_path):
        cfg = _run_config(tmp_path, max_iterations=0)
        out = tmp_path / "out"
        result = runner.invoke(main, ["run", str(cfg), "-o", str(out)])
        assert result.exit_code == 0, result.output
        events = [r["event"] for r in read_journal(out / "journal.jsonl")]
        assert events[0] == "init"
        assert "fit" in events
        assert events[-1] == "stop"
        model = load_model(out / "model.json")
        assert model.n_training == 6
        rows = list(csv.reader(open(out / "metrics.csv")))
        assert rows[0][:2] == ["iteration", "simulator_calls"]
        assert rows[0][2:6] == [
            "avg_delay_rmse", "avg_delay_mae", "avg_delay_r2", "avg_delay_picp95",
        ]

    def test_malformed_config_exits_2_naming_field(self, runner, tmp_path):
        cfg = _run_config(tmp_path, batch_size=0)
        result = runner.invoke(main, ["run", str(cfg), "-o", str(tmp_path / "out")])
        assert result.exit_code == 2
        assert "batch_size" in result.output

    def test_unknown_simulator_exits_2(self, runner, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"simulator": "nope", "campaign": {"max_iterations": 1}}))
        result = runner.invoke(main, ["run", str(path), "-o", str(tmp_path / "out")])
        assert result.exit_code == 2
        assert "nope" in result.output

    def test_rerun_same_seed_byte_identical_journal(self, runner, tmp_path):
        cfg = _run_config(tmp_path)
        a, b = tmp_path / "a", tmp_path / "b"
        assert runner.invoke(main, ["run", str(cfg), "-o", str(a)]).exit_code == 0
        assert runner.invoke(main, ["run", str(cfg), "-o", str(b)]).exit_code == 0
        assert (a / "journal.jsonl").read_bytes() == (b / "journal.jsonl").read_bytes()

    def test_toml_config_supported(self, runner, tmp_path):
        path = tmp_path / "config.toml"
        path.write_text(
            '[campaign]\ninitial_design_size = 5\nmax_iterations = 0\nseed = 2\n'
            'simulator = "atm_slot_overload"\n'.replace("simulator", "x_sim")  # placeholder
        )
        # write a proper toml: top-level simulator + campaign table
        path.write_text(
            'simulator = "atm_slot_overload"\n'
            "[campaign]\ninitial_design_size = 5\nmax_iterations = 0\nseed = 2\n"
        )
        result = runner.invoke(main, ["run", str(path), "-o", str(tmp_path / "out")])
        assert result.exit_code == 0, result.output


class TestPredictCmd:
    def _trained_model(self, runner, tmp_path):
        cfg = _run_config(tmp_path, max_iterations=0, initial_design_size=8)
        out = tmp_path / "out"
        assert runner.invoke(main, ["run", str(cfg), "-o", str(out)]).exit_code == 0
        return out / "model.json", out / "journal.jsonl"

    def test_training_point_prediction_matches_label(self, runner, tmp_path):
        model_path, journal_path = self._trained_model(runner, tmp_path)
        first = next(
            r for r in read_journal(journal_path)
            if r["event"] == "simulate" and r["phase"] == "initial"
        )
        pts = tmp_path / "points.csv"
        pts.write_text(
            "demand,capacity\n%s,%s\n" % (first["inputs"]["demand"], first["inputs"]["capacity"])
        )
        out_csv = tmp_path / "pred.csv"
        result = runner.invoke(main, ["predict", str(model_path), str(pts), str(out_csv)])
        assert result.exit_code == 0, result.output
        rows = list(csv.DictReader(open(out_csv)))
        assert float(rows[0]["mean_avg_delay"]) == pytest.approx(
            first["outputs"]["avg_delay"], abs=1e-6
        )

    def test_empty_points_file_yields_header_only(self, runner, tmp_path):
        model_path, _ = self._trained_model(runner, tmp_path)
        pts = tmp_path / "points.csv"
        pts.write_text("demand,capacity\n")
        out_csv = tmp_path / "pred.csv"
        result = runner.invoke(main, ["predict", str(model_path), str(pts), str(out_csv)])
        assert result.exit_code == 0
        rows = list(csv.reader(open(out_csv)))
        assert len(rows) == 1
        assert rows[0][:2] == ["demand", "capacity"]

    def test_column_typo_exits_2_naming_column(self, runner, tmp_path):
        model_path, _ = self._trained_model(runner, tmp_path)
        pts = tmp_path / "points.csv"
        pts.write_text("demand,capac\n50,40\n")
        result = runner.invoke(main, ["predict", str(model_path), str(pts), str(tmp_path / "o.csv")])
        assert result.exit_code == 2
        assert "capacity" in result.output

    def test_out_dir_is_self_contained(self, runner, tmp_path):
        # prediction works from the run output directory alone
        model_path, _ = self._trained_model(runner, tmp_path)
        pts = tmp_path / "points.csv"
        pts.write_text("demand,capacity\n55,45\n")
        out_csv = tmp_path / "pred.csv"
        assert (
            runner.invoke(main, ["predict", str(model_path), str(pts), str(out_csv)]).exit_code
            == 0
        )


class TestSweepCmd:
    def test_sweep_csv(self, runner, tmp_path):
        cfg = _run_config(tmp_path, max_iterations=0, initial_design_size=8)
        out = tmp_path / "out"
        runner.invoke(main, ["run", str(cfg), "-o", str(out)])
        result = runner.invoke(
            main,
            ["--format", "csv", "sweep", "--model", str(out / "model.json"),
             "--vary", "demand", "--steps", "5", "--fixed", "capacity=40"],
        )
        assert result.exit_code == 0, result.output
        rows = list(csv.reader(result.output.strip().splitlines()))
        assert rows[0][0] == "demand"
        assert [float(r[0]) for r in rows[1:]] == [10.0, 32.5, 55.0, 77.5, 100.0]

    def test_missing_fixed_exits_2(self, runner, tmp_path):
        cfg = _run_config(tmp_path, max_iterations=0)
        out = tmp_path / "out"
        runner.invoke(main, ["run", str(cfg), "-o", str(out)])
        result = runner.invoke(
            main, ["sweep", "--model", str(out / "model.json"), "--vary", "demand"]
        )
        assert result.exit_code == 2
        assert "capacity" in result.output


class TestIngestCmd:
    def test_two_file_join(self, runner, tmp_path):
        (tmp_path / "inputs.csv").write_text(
            "run_id,demand,capacity\nr1,40,50\nr2,60,40\nr3,80,30\n"
        )
        (tmp_path / "outputs.csv").write_text(
            "run_id,avg_delay,throughput\nr1,0.0,40\nr2,5.0,40\nr3,31.25,30\n"
        )
        schema = {
            "files": [
                {"path": "inputs.csv", "role": "inputs", "key": ["run_id"],
                 "columns": {"demand": "demand", "capacity": "capacity"}},
                {"path": "outputs.csv", "role": "outputs", "key": ["run_id"],
                 "columns": {"avg_delay": "avg_delay", "throughput": "throughput"}},
            ],
            "levels": {},
            "domain": {
                "inputs": [
                    {"name": "demand", "kind": "continuous", "lower": 10.0, "upper": 100.0},
                    {"name": "capacity", "kind": "continuous", "lower": 20.0, "upper": 60.0},
                ],
                "outputs": [
                    {"name": "avg_delay", "kind": "continuous", "lower": -10.0, "upper": 110.0},
                    {"name": "throughput", "kind": "continuous", "lower": 10.0, "upper": 60.0},
                ],
            },
        }
        schema_path = tmp_path / "schema.json"
        schema_path.write_text(json.dumps(schema))
        out_path = tmp_path / "ts.json"
        result = runner.invoke(main, ["ingest", str(schema_path), str(out_path)])
        assert result.exit_code == 0, result.output
        doc = json.loads(out_path.read_text())
        assert len(doc["X"]) == 3
        report = json.loads(result.output)
        assert report["rows_joined"] == 3

    def test_missing_file_exits_2(self, runner, tmp_path):
        schema = {
            "files": [{"path": "gone.csv", "role": "inputs", "key": ["k"], "columns": {"x": "x"}}],
            "domain": {
                "inputs": [{"name": "x", "kind": "continuous", "lower": 0, "upper": 1}],
                "outputs": [{"name": "y", "kind": "continuous", "lower": 0, "upper": 1}],
            },
        }
        schema_path = tmp_path / "schema.json"
        schema_path.write_text(json.dumps(schema))
        result = runner.invoke(main, ["ingest", str(schema_path), str(tmp_path / "o.json")])
        assert result.exit_code == 2
        assert "gone.csv" in result.output


class TestExternalSimulator:
    def test_subprocess_simulator_from_config(self, runner, tmp_path):
        import sys
        import textwrap

        script = tmp_path / "sim.py"
        script.write_text(
            textwrap.dedent(
                """
                import csv, sys
                rows = list(csv.reader(sys.stdin))
                header, data = rows[0], rows[1:]
                w = csv.writer(sys.stdout)
                w.writerow(["y"])
                for r in data:
                    w.writerow([3.0 * float(r[header.index("x")])])
                """
            )
        )
        doc = {
            "simulator": {
                "id": "tripler",
                "command": [sys.executable, str(script)],
                "domain": {
                    "inputs": [{"name": "x", "kind": "continuous", "lower": 0.0, "upper": 1.0}],
                    "outputs": [{"name": "y", "kind": "continuous", "lower": 0.0, "upper": 3.0}],
                },
            },
            "campaign": {"initial_design_size": 5, "max_iterations": 1, "seed": 3},
        }
        cfg = tmp_path / "config.json"
        cfg.write_text(json.dumps(doc))
        out = tmp_path / "out"
        result = runner.invoke(main, ["run", str(cfg), "-o", str(out)])
        assert result.exit_code == 0, result.output
        records = read_journal(out / "journal.jsonl")
        sims = [r for r in records if r["event"] == "simulate" and "outputs" in r]
        for r in sims:
            assert r["outputs"]["y"] == pytest.approx(3.0 * r["inputs"]["x"], rel=1e-9)

    def test_failing_external_simulator_exits_3(self, runner, tmp_path):
        import sys

        doc = {
            "simulator": {
                "command": [sys.executable, "-c", "import sys; sys.exit(1)"],
                "domain": {
                    "inputs": [{"name": "x", "kind": "continuous", "lower": 0.0, "upper": 1.0}],
                    "outputs": [{"name": "y", "kind": "continuous", "lower": 0.0, "upper": 1.0}],
                },
            },
            "campaign": {"initial_design_size": 4, "max_iterations": 1, "seed": 3},
        }
        cfg = tmp_path / "config.json"
        cfg.write_text(json.dumps(doc))
        result = runner.invoke(main, ["run", str(cfg), "-o", str(tmp_path / "out")])
        assert result.exit_code == 3

    def test_out_of_domain_points_csv_exits_2(self, runner, tmp_path):
        cfg = _run_config(tmp_path, max_iterations=0)
        out = tmp_path / "out"
        assert runner.invoke(main, ["run", str(cfg), "-o", str(out)]).exit_code == 0
        pts = tmp_path / "points.csv"
        pts.write_text("demand,capacity\n5000,40\n")
        result = runner.invoke(
            main, ["predict", str(out / "model.json"), str(pts), str(tmp_path / "o.csv")]
        )
        assert result.exit_code == 2
        assert "demand" in result.output


class TestListSimulators:
    def test_json_listing(self, runner):
        result = runner.invoke(main, ["list-simulators"])
        assert result.exit_code == 0
        ids = [s["id"] for s in json.loads(result.output)]
        assert "atm_slot_overload" in ids and "branin" in ids


class TestServe:
    def test_serve_answers_simulator_listing(self, tmp_path):
        import os
        import subprocess
        import sys
        import time
        import urllib.request

        port = 8600 + os.getpid() % 200
        proc = subprocess.Popen(
            [sys.executable, "-m", "proxsim.cli", "--data-dir", str(tmp_path),
             "serve", "--bind", f"127.0.0.1:{port}"],
            stdout=subprocess.DEVNULL,
            stderr=subprocess.DEVNULL,
        )
        try:
            deadline = time.time() + 30
            body = None
            while time.time() < deadline:
                try:
                    with urllib.request.urlopen(
                        f"http://127.0.0.1:{port}/api/v1/simulators", timeout=2
                    ) as resp:
                        assert resp.status == 200
                        body = json.loads(resp.read())
                        break
                except OSError:
                    time.sleep(0.25)
            assert body is not None, "server never came up"
            assert "atm_slot_overload" in [s["id"] for s in body]
        finally:
            proc.terminate()
            proc.wait(timeout=10)


class TestSharedValidation:
    # the CLI and the API reject the same configs for the same reasons
    BAD_CONFIGS = [
        {"batch_size": 0, "max_iterations": 1},
        {"initial_design_size": -3, "max_iterations": 1},
        {"acquisition": "magic", "max_iterations": 1},
        {},  # no stopping criterion
        {"max_iterations": 1, "bogus_field": 7},
        {"rmse_threshold": 0.1, "holdout_size": 0},
        {"max_simulator_calls": 3, "initial_design_size": 10},
    ]

    @pytest.mark.parametrize("bad", BAD_CONFIGS)
    def test_cli_and_api_agree(self, runner, tmp_path, bad):
        with pytest.raises(InvalidConfig):
            CampaignConfig.from_dict(dict(bad))
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"simulator": "atm_slot_overload", "campaign": bad}))
        result = runner.invoke(main, ["run", str(path), "-o", str(tmp_path / "out")])
        assert result.exit_code == 2
        with TestClient(create_app(data_dir=tmp_path / "api")) as client:
            resp = client.post(
                "/api/v1/campaigns",
                json={"simulator_id": "atm_slot_overload", "config": dict(bad)},
            )
            assert resp.status_code == 422
            assert resp.json()["code"] == "invalid_config"

"""Command-line client: file plumbing, exit codes, staged-pipeline parity."""

from __future__ import annotations

import json
import subprocess
import sys

import pytest

CLI = [sys.executable, "-m", "blinklink.cli"]


def run_cli(*args, stdin: str | None = None):
    return subprocess.run(
        CLI + list(args), input=stdin, capture_output=True, text=True
    )


def read_jsonl(path):
    return [json.loads(line) for line in path.read_text().splitlines()]


class TestExitCodes:
    def test_success_is_zero(self):
        result = run_cli("encode", "--payload", "0xA5")
        assert result.returncode == 0

    def test_unknown_flag_is_one(self):
        result = run_cli("decode", "--bogus-flag")
        assert result.returncode == 1
        assert "unrecognized" in result.stderr

    def test_missing_subcommand_is_one(self):
        result = run_cli()
        assert result.returncode == 1

    def test_missing_input_file_is_two(self):
        result = run_cli("decode", "-i", "/nonexistent/scores.csv")
        assert result.returncode == 2

    def test_invalid_payload_is_one(self):
        result = run_cli("encode", "--payload", "300")
        assert result.returncode == 1

    def test_version_flag(self):
        result = run_cli("--version")
        assert result.returncode == 0


class TestEncode:
    def test_waveform_to_stdout(self):
        result = run_cli("encode", "--payload", "0xA5")
        lines = result.stdout.splitlines()
        assert lines[0] == "fps=30.0"
        assert len(lines) == 1 + 192
        assert set(lines[1:]) <= {"0", "1"}

    def test_all_payloads_length(self, tmp_path):
        out = tmp_path / "wf.txt"
        result = run_cli("encode", "--all", "-o", str(out))
        assert result.returncode == 0
        assert len(out.read_text().splitlines()) == 1 + 24 + 256 * 168

    def test_sos_repeat(self, tmp_path):
        out = tmp_path / "wf.txt"
        run_cli("encode", "--sos", "2", "-o", str(out))
        assert len(out.read_text().splitlines()) == 1 + 24 + 2 * 168


class TestStagedPipeline:
    def test_encode_simulate_decode_round_trip(self, tmp_path):
        wf, sc, rp = (tmp_path / n for n in ("wf.txt", "sc.csv", "rp.jsonl"))
        assert run_cli("encode", "--payload", "0x53", "--payload", "0xA5",
                       "-o", str(wf)).returncode == 0
        assert run_cli("simulate", "--flip-p", "0", "-i", str(wf),
                       "-o", str(sc)).returncode == 0
        assert run_cli("decode", "-i", str(sc), "-o", str(rp)).returncode == 0
        records = read_jsonl(rp)
        assert [r["payload"] for r in records] == [0x53, 0xA5]
        assert all(r["status"] == "ok" for r in records)

    def test_trace_svg_written(self, tmp_path):
        wf, sc, rp = (tmp_path / n for n in ("wf.txt", "sc.csv", "rp.jsonl"))
        svg = tmp_path / "trace.svg"
        run_cli("encode", "--payload", "7", "-o", str(wf))
        run_cli("simulate", "--flip-p", "0", "-i", str(wf), "-o", str(sc))
        result = run_cli("decode", "-i", str(sc), "-o", str(rp),
                         "--trace-svg", str(svg))
        assert result.returncode == 0
        content = svg.read_text()
        assert content.count('<circle class="dot"') == 144

    def test_stdin_stdout_chaining(self):
        encoded = run_cli("encode", "--payload", "0x0F").stdout
        simulated = run_cli("simulate", "--flip-p", "0", stdin=encoded).stdout
        decoded = run_cli("decode", stdin=simulated).stdout
        assert json.loads(decoded.splitlines()[0])["payload"] == 0x0F

    def test_matches_experiment_run(self, tmp_path):
        # One experiment trial must equal the hand-staged pipeline with the
        # same seed: encode, simulate, decode as separate processes.
        config = {
            "channel": {"score_model": {"kind": "flip", "p": 0.049}, "seed": 31},
            "payload_set": [0x00, 0x53, 0xFF, 0xA5],
            "trials": 1,
        }
        config_file = tmp_path / "exp.json"
        config_file.write_text(json.dumps(config))
        exp_dir = tmp_path / "exp"
        assert run_cli("experiment", "--config", str(config_file),
                       "-o", str(exp_dir)).returncode == 0
        from_experiment = read_jsonl(exp_dir / "reports.jsonl")

        wf, sc, rp = (tmp_path / n for n in ("wf.txt", "sc.csv", "rp.jsonl"))
        run_cli("encode", "--payload", "0", "--payload", "0x53",
                "--payload", "0xFF", "--payload", "0xA5", "-o", str(wf))
        run_cli("simulate", "--flip-p", "0.049", "--seed", "31",
                "-i", str(wf), "-o", str(sc))
        run_cli("decode", "-i", str(sc), "-o", str(rp))
        staged = read_jsonl(rp)

        stripped = [{k: v for k, v in r.items() if k != "trial"}
                    for r in from_experiment]
        assert stripped == staged


class TestExperimentCommand:
    def test_writes_stats_and_reports(self, tmp_path):
        config_file = tmp_path / "exp.json"
        config_file.write_text(json.dumps({
            "channel": {"score_model": {"kind": "flip", "p": 0.0}},
            "payload_set": {"sos": 3},
            "trials": 2,
        }))
        out = tmp_path / "run"
        result = run_cli("experiment", "--config", str(config_file), "-o", str(out))
        assert result.returncode == 0
        assert (out / "stats.csv").exists()
        records = read_jsonl(out / "reports.jsonl")
        assert len(records) == 6
        assert {r["trial"] for r in records} == {0, 1}

    def test_set_overrides_config(self, tmp_path):
        config_file = tmp_path / "exp.json"
        config_file.write_text(json.dumps({
            "channel": {"score_model": {"kind": "flip", "p": 0.0}},
            "payload_set": [1],
        }))
        out = tmp_path / "run"
        result = run_cli("experiment", "--config", str(config_file),
                         "--set", "trials=3", "-o", str(out))
        assert result.returncode == 0
        records = read_jsonl(out / "reports.jsonl")
        assert {r["trial"] for r in records} == {0, 1, 2}

    def test_repeated_runs_are_byte_identical(self, tmp_path):
        config_file = tmp_path / "exp.json"
        config_file.write_text(json.dumps({
            "channel": {"score_model": {"kind": "flip", "p": 0.08}, "seed": 7},
            "payload_set": [1, 2, 3],
            "trials": 2,
        }))
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        run_cli("experiment", "--config", str(config_file), "-o", str(out_a))
        run_cli("experiment", "--config", str(config_file), "-o", str(out_b))
        for name in ("reports.jsonl", "stats.csv"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_missing_config_is_one(self):
        result = run_cli("experiment")
        assert result.returncode == 1


class TestSweepCommand:
    def test_sweep_csv(self, tmp_path):
        spec_file = tmp_path / "sweep.json"
        spec_file.write_text(json.dumps({
            "parameter": "flip_p",
            "grid": [0.0, 0.3],
            "base": {
                "channel": {"score_model": {"kind": "flip", "p": 0.0}},
                "payload_set": [0x53, 0x53],
            },
        }))
        out = tmp_path / "sweeprun"
        result = run_cli("sweep", "--config", str(spec_file), "-o", str(out))
        assert result.returncode == 0
        lines = (out / "sweep.csv").read_text().splitlines()
        assert len(lines) == 3
        first = lines[1].split(",")
        assert first[0] == "flip_p"
        assert float(first[-1]) == 1.0  # clean grid point decodes everything

    def test_decreasing_grid_is_one(self, tmp_path):
        spec_file = tmp_path / "sweep.json"
        spec_file.write_text(json.dumps({
            "parameter": "flip_p",
            "grid": [0.3, 0.1],
            "base": {
                "channel": {"score_model": {"kind": "flip", "p": 0.0}},
                "payload_set": [1],
            },
        }))
        result = run_cli("sweep", "--config", str(spec_file))
        assert result.returncode == 1


class TestAnalysisCommands:
    def test_roc_prints_auc(self, tmp_path):
        wf, sc = tmp_path / "wf.txt", tmp_path / "sc.csv"
        run_cli("encode", "--payload", "0xA5", "-o", str(wf))
        run_cli("simulate", "--flip-p", "0.1", "--seed", "3",
                "-i", str(wf), "-o", str(sc))
        curve = tmp_path / "curve.csv"
        result = run_cli("roc", "-i", str(sc), "-o", str(curve))
        assert result.returncode == 0
        assert "auc=" in result.stdout + result.stderr
        assert curve.read_text().splitlines()[0] == "fpr,tpr,threshold"

    def test_roc_without_truth_is_one(self, tmp_path):
        sc = tmp_path / "sc.csv"
        sc.write_text("frame_index,score,truth\n0,0.5,\n1,0.7,\n")
        result = run_cli("roc", "-i", str(sc))
        assert result.returncode == 1

    def test_calibrate_emits_model_json(self):
        result = run_cli("calibrate", "--auc", "0.9888", "--acc", "0.951")
        assert result.returncode == 0
        model = json.loads(result.stdout)
        assert model["kind"] == "beta"
        assert model["a_on"] > model["b_on"] > 0

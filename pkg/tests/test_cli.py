"""Command line interface: exit codes and outputs."""
from __future__ import annotations

import json

import pytest

from manetsim.cli import EXIT_ERROR, EXIT_NOT_CONVERGED, EXIT_OK, main


@pytest.fixture
def triangle_file(tmp_path):
    data = {
        "schema": 1,
        "name": "triangle",
        "protocol": "CLUSTERING",
        "params": {"k": 1, "radio_range": 12.0},
        "agents": [
            {"uid": 0, "pos": [10, 10]},
            {"uid": 1, "pos": [18, 10]},
            {"uid": 2, "pos": [14, 16]},
        ],
        "boot": {"mode": "ALL_AT_ONCE"},
        "run": {"max_ticks": 200, "quiescence_window": 8},
    }
    path = tmp_path / "triangle.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


class TestUsage:
    def test_no_arguments_is_a_usage_error(self, capsys):
        assert main([]) == EXIT_ERROR
        assert "error" in capsys.readouterr().err

    def test_unknown_subcommand(self, capsys):
        assert main(["explode"]) == EXIT_ERROR

    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == EXIT_OK
        assert "run" in capsys.readouterr().out
        assert main(["serve", "--help"]) == EXIT_OK


class TestRun:
    def test_converged_run_exits_zero_and_prints_metrics(self, triangle_file,
                                                         capsys):
        assert main(["run", str(triangle_file)]) == EXIT_OK
        out = capsys.readouterr().out
        assert "triangle: converged" in out
        metrics = json.loads(out[out.index("{"):])
        assert metrics["node_count"] == 3
        assert metrics["cluster_count"] == 1

    def test_non_converged_run_exits_two(self, triangle_file, tmp_path,
                                         capsys):
        data = json.loads(triangle_file.read_text())
        data["run"]["max_ticks"] = 3
        short = tmp_path / "short.json"
        short.write_text(json.dumps(data), encoding="utf-8")
        assert main(["run", str(short)]) == EXIT_NOT_CONVERGED
        assert "did not converge" in capsys.readouterr().out

    def test_out_dir_artifacts(self, triangle_file, tmp_path, capsys):
        out = tmp_path / "artifacts"
        assert main(["run", str(triangle_file), "--out", str(out)]) == EXIT_OK
        for name in ("events.log", "metrics.json", "final_state.json"):
            assert (out / name).exists()

    def test_missing_scenario_file(self, tmp_path, capsys):
        assert main(["run", str(tmp_path / "nope.json")]) == EXIT_ERROR
        assert "does not exist" in capsys.readouterr().err

    def test_invalid_scenario_lists_issues(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"schema": 1, "protocol": "CLUSTERING",
                                   "params": {}, "agents": []}),
                       encoding="utf-8")
        assert main(["run", str(bad)]) == EXIT_ERROR
        err = capsys.readouterr().err
        assert "params.k" in err and "agents" in err

    def test_seed_override_accepted(self, triangle_file, capsys):
        assert main(["run", str(triangle_file), "--seed", "7"]) == EXIT_OK


class TestValidate:
    def test_valid(self, triangle_file, capsys):
        assert main(["validate", str(triangle_file)]) == EXIT_OK
        out = capsys.readouterr().out
        assert "valid scenario" in out and "CLUSTERING" in out

    def test_invalid(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json", encoding="utf-8")
        assert main(["validate", str(bad)]) == EXIT_ERROR
        assert "parse error" in capsys.readouterr().err


class TestReplay:
    def test_replay_matches_original_metrics(self, triangle_file, tmp_path,
                                             capsys):
        out = tmp_path / "artifacts"
        assert main(["run", str(triangle_file), "--out", str(out)]) == EXIT_OK
        capsys.readouterr()
        assert main(["replay", str(out / "events.log")]) == EXIT_OK
        replayed = json.loads(capsys.readouterr().out)
        original = json.loads((out / "metrics.json").read_text())
        assert replayed == original

    def test_replay_missing_log(self, tmp_path, capsys):
        assert main(["replay", str(tmp_path / "none.log")]) == EXIT_ERROR

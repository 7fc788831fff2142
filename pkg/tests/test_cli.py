"""Command-line interface: exit codes, artifacts, determinism."""

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from chaindiff.cli import main


def write_config(tmp_path: Path, **overrides) -> Path:
    """Small campaign that reliably produces divergence reports quickly."""
    cfg = {
        "rngSeed": 7,
        "seedCount": 10,
        "mutationsPerRound": 30,
        "callsPerContext": 120,
        "contextRounds": 1,
        "blockGasLimit": 300_000,
        "clients": [
            {"clientId": "ref", "faults": []},
            {"clientId": "v", "faults": ["F4", "F5", "F6"]},
        ],
        "outDir": str(tmp_path / "out"),
    }
    cfg.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


@pytest.fixture
def runner():
    return CliRunner()


class TestConfigErrors:
    def test_unknown_config_key_exits_2(self, runner, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"rngSeed": 1, "bogusKnob": 5}))
        result = runner.invoke(main, ["fuzz", "--config", str(path)])
        assert result.exit_code == 2
        assert "bogusKnob" in result.output

    def test_fuzz_single_client_exits_2(self, runner, tmp_path):
        path = write_config(tmp_path,
                            clients=[{"clientId": "ref", "faults": []}])
        result = runner.invoke(main, ["fuzz", "--config", str(path)])
        assert result.exit_code == 2

    def test_unknown_fault_name_exits_2(self, runner, tmp_path):
        path = write_config(tmp_path,
                            clients=[{"clientId": "ref", "faults": []},
                                     {"clientId": "v", "faults": ["F99"]}])
        result = runner.invoke(main, ["fuzz", "--config", str(path)])
        assert result.exit_code == 2

    def test_missing_config_file_exits_2(self, runner, tmp_path):
        result = runner.invoke(main, ["fuzz", "--config",
                                      str(tmp_path / "nope.json")])
        assert result.exit_code == 2


class TestFuzz:
    def test_produces_reports_and_stats(self, runner, tmp_path):
        path = write_config(tmp_path)
        result = runner.invoke(main, ["fuzz", "--config", str(path)])
        assert result.exit_code == 0, result.output
        out = tmp_path / "out"
        reports = (out / "reports.jsonl").read_text().splitlines()
        assert len(reports) >= 1
        stats = json.loads((out / "stats.json").read_text())
        assert stats["rngSeed"] == 7
        assert stats["dedupedReports"] == len(reports)
        assert stats["rpcCallsSent"] == 120

    def test_reports_byte_identical_across_runs(self, runner, tmp_path):
        blobs = []
        for name in ("a", "b"):
            sub = tmp_path / name
            sub.mkdir()
            path = write_config(sub)
            result = runner.invoke(main, ["fuzz", "--config", str(path)])
            assert result.exit_code == 0, result.output
            blobs.append((sub / "out" / "reports.jsonl").read_bytes())
        assert blobs[0] == blobs[1] and blobs[0]

    def test_zero_calls_sends_nothing(self, runner, tmp_path):
        path = write_config(tmp_path, callsPerContext=0)
        result = runner.invoke(main, ["fuzz", "--config", str(path)])
        assert result.exit_code == 0
        stats = json.loads((tmp_path / "out" / "stats.json").read_text())
        assert stats["rpcCallsSent"] == 0 and stats["dedupedReports"] == 0

    def test_fault_free_clients_never_diverge(self, runner, tmp_path):
        path = write_config(tmp_path,
                            clients=[{"clientId": "a", "faults": []},
                                     {"clientId": "b", "faults": []}])
        result = runner.invoke(main, ["fuzz", "--config", str(path)])
        assert result.exit_code == 0
        stats = json.loads((tmp_path / "out" / "stats.json").read_text())
        assert stats["divergences"] == 0
        assert (tmp_path / "out" / "reports.jsonl").read_text() == ""

    def test_flag_overrides_config_file(self, runner, tmp_path):
        path = write_config(tmp_path)
        result = runner.invoke(main, ["fuzz", "--config", str(path),
                                      "--calls-per-context", "0"])
        assert result.exit_code == 0
        stats = json.loads((tmp_path / "out" / "stats.json").read_text())
        assert stats["rpcCallsSent"] == 0


class TestCorpusSelect:
    def test_writes_corpus_directory(self, runner, tmp_path):
        path = write_config(tmp_path)
        result = runner.invoke(main, ["corpus", "select", "--config", str(path)])
        assert result.exit_code == 0, result.output
        entries = (tmp_path / "out" / "corpus" / "entries.jsonl")
        assert entries.exists()
        assert len(entries.read_text().splitlines()) >= 1
        assert "selected" in result.output


class TestReplay:
    def test_fresh_campaign_reproduces(self, runner, tmp_path):
        path = write_config(tmp_path)
        assert runner.invoke(main, ["fuzz", "--config", str(path)]).exit_code == 0
        reports = tmp_path / "out" / "reports.jsonl"
        result = runner.invoke(main, ["replay", "--reports", str(reports),
                                      "--config", str(path)])
        assert result.exit_code == 0, result.output
        n = len(reports.read_text().splitlines())
        assert f"reproduced: {n}/{n}" in result.output

    def test_wrong_seed_exits_1(self, runner, tmp_path):
        path = write_config(tmp_path)
        assert runner.invoke(main, ["fuzz", "--config", str(path)]).exit_code == 0
        reports = tmp_path / "out" / "reports.jsonl"
        result = runner.invoke(main, ["replay", "--reports", str(reports),
                                      "--config", str(path),
                                      "--rng-seed", "999"])
        assert result.exit_code == 1
        assert "seed mismatch" in result.output

    def test_missing_reports_exits_1(self, runner, tmp_path):
        path = write_config(tmp_path)
        result = runner.invoke(main, ["replay", "--reports",
                                      str(tmp_path / "nope.jsonl"),
                                      "--config", str(path)])
        assert result.exit_code == 1


class TestReformCheck:
    def test_all_equivalent(self, runner, tmp_path):
        path = write_config(tmp_path)
        result = runner.invoke(main, ["reform-check", "--config", str(path)])
        assert result.exit_code == 0, result.output
        line = [l for l in result.output.splitlines()
                if l.startswith("equivalent:")][0]
        counts = line.split()[1]  # "N/N"
        checked = int(counts.split("/")[1])
        assert checked >= 1 and counts == f"{checked}/{checked}"

    def test_matching_corpus_dir_accepted(self, runner, tmp_path):
        path = write_config(tmp_path)
        assert runner.invoke(main, ["corpus", "select", "--config",
                                    str(path)]).exit_code == 0
        result = runner.invoke(main, ["reform-check", "--config", str(path),
                                      "--corpus",
                                      str(tmp_path / "out" / "corpus")])
        assert result.exit_code == 0, result.output

    def test_mismatched_corpus_dir_exits_1(self, runner, tmp_path):
        path = write_config(tmp_path)
        assert runner.invoke(main, ["corpus", "select", "--config",
                                    str(path)]).exit_code == 0
        result = runner.invoke(main, ["reform-check", "--config", str(path),
                                      "--rng-seed", "8",
                                      "--corpus",
                                      str(tmp_path / "out" / "corpus")])
        assert result.exit_code == 1
        assert "does not match" in result.output


class TestStats:
    def test_missing_file_exits_1(self, runner, tmp_path):
        result = runner.invoke(main, ["stats", "--path",
                                      str(tmp_path / "nope.json")])
        assert result.exit_code == 1

    def test_pretty_prints(self, runner, tmp_path):
        path = write_config(tmp_path, callsPerContext=0)
        assert runner.invoke(main, ["fuzz", "--config", str(path)]).exit_code == 0
        result = runner.invoke(main, ["stats", "--path",
                                      str(tmp_path / "out" / "stats.json")])
        assert result.exit_code == 0
        assert json.loads(result.output)["rngSeed"] == 7

    def test_corrupt_file_exits_1(self, runner, tmp_path):
        bad = tmp_path / "stats.json"
        bad.write_text("{nope")
        result = runner.invoke(main, ["stats", "--path", str(bad)])
        assert result.exit_code == 1

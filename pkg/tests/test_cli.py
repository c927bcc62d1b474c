"""
Tests for the voxsel command line.
"""

import json
import logging
import os
import shutil
import tempfile
from pathlib import Path
from unittest.mock import patch

import numpy as np
import pytest
from click.testing import CliRunner

from voxsel import REPORT_FORMAT_VERSION, __version__
from voxsel.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, cli, run
from voxsel.models.audio import AudioBuffer
from voxsel.models.embedding import EmbeddingPool, UtteranceRecord
from voxsel.services.synthetic import (
    generate_synthetic_plda, generate_synthetic_pool, generate_target_records
)
from voxsel.storage import save_plda, save_pool, write_wav


@pytest.fixture(autouse=True)
def drop_cli_log_handlers():
    """Detach the handlers a run installs so they do not outlive captured streams."""
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, "_voxsel_owned", False):
            root.removeHandler(handler)
            handler.close()


@pytest.fixture
def temp_dir():
    """Create a temporary directory for testing."""
    temp_dir = tempfile.mkdtemp()
    yield Path(temp_dir)
    shutil.rmtree(temp_dir)


def _write_corpus(directory, speakers=6, utterances=10, dim=8, seed=0, target_count=5,
                  pool_name="pool.xvb"):
    """Pool, PLDA model and target files of one synthetic corpus."""
    corpus = generate_synthetic_pool(speakers, utterances, dim, seed=seed)
    targets = generate_target_records(corpus.centres[0], target_count, seed=seed + 1)
    paths = {
        "pool": str(directory / pool_name),
        "plda": str(directory / "plda.json"),
        "target": str(directory / "target.jsonl"),
    }
    save_pool(corpus.pool, paths["pool"])
    save_plda(generate_synthetic_plda(dim, seed=seed), paths["plda"])
    save_pool(EmbeddingPool.from_records(targets, dim), paths["target"])
    return corpus, paths


def _select_args(paths, out, *extra):
    return ["select", "--pool", paths["pool"], "--plda", paths["plda"],
            "--target", paths["target"], "--out", str(out), *extra]


def _load(path):
    return json.loads(Path(path).read_text())


class TestHelpAndVersion:
    """Test the command group surface."""

    def test_help_lists_subcommands(self):
        """Test that every subcommand is listed."""
        result = CliRunner().invoke(cli, ["--help"])
        assert result.exit_code == 0
        for name in ("select", "compare", "stats", "hist", "eval", "pqmf", "stftloss",
                     "pool-info", "synth-pool"):
            assert name in result.output

    def test_version(self):
        """Test the version option."""
        result = CliRunner().invoke(cli, ["--version"])
        assert result.exit_code == 0
        assert __version__ in result.output

    def test_help_exit_code_through_run(self, capsys):
        """Test that help exits with success through the exit-code mapping."""
        assert run(["select", "--help"]) == EXIT_OK
        assert "--criterion" in capsys.readouterr().out


class TestExitCodes:
    """Test the mapping of failures onto exit codes."""

    def test_unknown_subcommand(self, capsys):
        """Test that usage errors exit with 1."""
        assert run(["frobnicate"]) == EXIT_USAGE
        assert "No such command" in capsys.readouterr().err

    def test_unknown_flag(self, capsys):
        """Test an unknown option."""
        assert run(["pool-info", "--pool", "x.xvb", "--bogus"]) == EXIT_USAGE

    def test_missing_input_is_data_error(self, temp_dir, capsys):
        """Test that a missing pool exits with 2 and names the module."""
        assert run(["pool-info", "--pool", str(temp_dir / "missing.xvb")]) == EXIT_DATA
        assert "error [storage]: file not found" in capsys.readouterr().err

    def test_malformed_pool_is_data_error(self, temp_dir, capsys):
        """Test that a bad pool file exits with 2."""
        path = temp_dir / "pool.jsonl"
        path.write_text('{"speaker": "a", "utterance": "1", "embedding": [1, 2]}\n'
                        '{"speaker": "a", "utterance": "2", "embedding": [1]}\n')
        assert run(["pool-info", "--pool", str(path)]) == EXIT_DATA
        assert "error [embeddings]:" in capsys.readouterr().err

    def test_invalid_value_is_usage_error(self, temp_dir, capsys):
        """Test that config validation failures exit with 1."""
        _, paths = _write_corpus(temp_dir)
        assert run(_select_args(paths, temp_dir / "r.json", "--k", "0")) == EXIT_USAGE
        assert "error [config]" in capsys.readouterr().err
        assert not (temp_dir / "r.json").exists()

    def test_bad_threads_value(self, capsys):
        """Test the global thread count range."""
        assert run(["--threads", "0", "pool-info", "--pool", "x.xvb"]) == EXIT_USAGE


class TestPoolCommands:
    """Test pool-info and synth-pool."""

    def test_synth_pool_and_info(self, temp_dir, capsys):
        """Test generating a seeded pool and describing it."""
        pool = temp_dir / "pool.jsonl"
        code = run(["--seed", "5", "synth-pool", "--speakers", "4", "--utterances", "6",
                    "--dim", "8", "--out", str(pool), "--plda-out", str(temp_dir / "plda.json"),
                    "--target-out", str(temp_dir / "target.xvb"), "--target-count", "3"])
        assert code == EXIT_OK
        assert (temp_dir / "plda.json").exists()
        capsys.readouterr()

        assert run(["pool-info", "--pool", str(pool)]) == EXIT_OK
        out = capsys.readouterr().out
        assert "dimension: 8" in out
        assert "records: 24" in out
        assert "speakers: 4" in out
        assert "tags: f=12, m=12" in out

        assert run(["pool-info", "--pool", str(temp_dir / "target.xvb")]) == EXIT_OK
        assert "records: 3" in capsys.readouterr().out

    def test_synth_pool_is_seeded(self, temp_dir):
        """Test that the same seed writes the same bytes."""
        for name in ("a.xvb", "b.xvb"):
            assert run(["--seed", "9", "synth-pool", "--out", str(temp_dir / name)]) == EXIT_OK
        assert (temp_dir / "a.xvb").read_bytes() == (temp_dir / "b.xvb").read_bytes()


class TestSelectCommand:
    """Test selection runs, reports and adaptation lists."""

    def test_report_and_list(self, temp_dir, capsys):
        """Test the report layout and the default list path."""
        _, paths = _write_corpus(temp_dir)
        out = temp_dir / "sel.json"
        assert run(_select_args(paths, out, "--k", "12", "--criterion", "dc2",
                                "--threshold-k", "20,5")) == EXIT_OK
        assert "selected 12 of 60 utterances" in capsys.readouterr().out

        report = _load(out)
        assert report["format_version"] == REPORT_FORMAT_VERSION
        assert report["kind"] == "selection"
        assert report["config"]["k"] == 12
        assert report["config"]["criterion"] == "dc2"
        assert report["config"]["threshold_k"] == [5, 20]
        assert "out" not in report["config"] and "list_out" not in report["config"]
        assert report["warnings"] == []
        assert len(report["selected"]) == 12
        assert set(report["thresholds"]) == {"5", "20"}

        entries = (temp_dir / "sel.list").read_text().splitlines()
        assert len(entries) == 17
        assert entries == report["adaptation_list"]

    def test_clamp_warning_is_reported(self, temp_dir):
        """Test that an oversize k is clamped and the warning embedded."""
        _, paths = _write_corpus(temp_dir, speakers=3, utterances=4)
        out = temp_dir / "sel.json"
        assert run(_select_args(paths, out, "--k", "1000")) == EXIT_OK
        report = _load(out)
        assert len(report["selected"]) == 12
        assert any("k=1000 exceeds the 12 available candidates" in w for w in report["warnings"])

    def test_ninety_entry_adaptation_list(self, temp_dir):
        """Test 85 selections from a 10k pool plus five target utterances."""
        _, paths = _write_corpus(temp_dir, speakers=100, utterances=100, dim=16)
        list_out = temp_dir / "adapt.txt"
        assert run(_select_args(paths, temp_dir / "sel.json", "--list-out", str(list_out))) == EXIT_OK
        entries = list_out.read_text().splitlines()
        assert len(entries) == 90
        assert entries[-5:] == [f"target_t{j:02d}" for j in range(5)]

    def test_thread_count_gives_identical_bytes(self, temp_dir):
        """Test byte-identical reports for one and eight threads on 50k records."""
        _, paths = _write_corpus(temp_dir, speakers=500, utterances=100, dim=32)
        one, eight = temp_dir / "one.json", temp_dir / "eight.json"
        assert run(["--threads", "1", *_select_args(paths, one)]) == EXIT_OK
        assert run(["--threads", "8", *_select_args(paths, eight)]) == EXIT_OK
        assert one.read_bytes() == eight.read_bytes()
        assert (temp_dir / "one.list").read_bytes() == (temp_dir / "eight.list").read_bytes()

    def test_target_speakers_are_excluded(self, temp_dir):
        """Test that a target speaker present in the pool is never selected."""
        corpus, paths = _write_corpus(temp_dir)
        speaker = corpus.speaker_ids[0]
        targets = [
            UtteranceRecord(speaker, f"held_out_{j}", corpus.centres[0] + 0.01 * j) for j in range(3)
        ]
        save_pool(EmbeddingPool.from_records(targets), paths["target"])
        out = temp_dir / "sel.json"
        assert run(_select_args(paths, out, "--k", "10")) == EXIT_OK
        report = _load(out)
        assert speaker not in {item["speaker_id"] for item in report["ranked"]}

    def test_exclusion_list_and_tags(self, temp_dir):
        """Test a speaker exclusion file and tag restriction."""
        corpus, paths = _write_corpus(temp_dir)
        exclude = temp_dir / "exclude.txt"
        exclude.write_text(f"{corpus.speaker_ids[2]}\n")
        out = temp_dir / "sel.json"
        code = run(_select_args(paths, out, "--k", "5", "--exclude-speakers", str(exclude),
                                "--tag", "f"))
        assert code == EXIT_OK
        ranked = _load(out)["ranked"]
        assert {item["tag"] for item in ranked} == {"f"}
        assert corpus.speaker_ids[2] not in {item["speaker_id"] for item in ranked}
        assert len(ranked) == 20

    def test_option_precedence(self, temp_dir):
        """Test flag over environment over config file over default."""
        _, paths = _write_corpus(temp_dir)
        config = temp_dir / "voxsel.toml"
        config.write_text("[select]\nk = 7\nsigmoid-c = 0.25\n")
        out = temp_dir / "sel.json"

        assert run(["--config", str(config), *_select_args(paths, out)]) == EXIT_OK
        assert _load(out)["config"]["k"] == 7
        assert _load(out)["config"]["sigmoid_c"] == 0.25

        with patch.dict(os.environ, {"VOXSEL_SELECT_K": "9"}):
            assert run(["--config", str(config), *_select_args(paths, out)]) == EXIT_OK
            assert len(_load(out)["selected"]) == 9
            assert run(["--config", str(config), *_select_args(paths, out, "--k", "11")]) == EXIT_OK
            assert len(_load(out)["selected"]) == 11

    def test_yaml_config_file(self, temp_dir):
        """Test a YAML config with a list-valued option."""
        _, paths = _write_corpus(temp_dir)
        config = temp_dir / "voxsel.yaml"
        config.write_text("select:\n  k: 6\n  threshold-k: [3, 6]\n")
        out = temp_dir / "sel.json"
        assert run(["--config", str(config), *_select_args(paths, out)]) == EXIT_OK
        assert set(_load(out)["thresholds"]) == {"3", "6"}

    def test_bad_config_file(self, temp_dir, capsys):
        """Test that an unusable config file is a usage error."""
        config = temp_dir / "voxsel.ini"
        config.write_text("k = 3\n")
        assert run(["--config", str(config), "pool-info", "--pool", "x.xvb"]) == EXIT_USAGE

    @pytest.mark.parametrize("name,content", [
        ("voxsel.yaml", "select:\n  k: [1, 2\n"),
        ("voxsel.toml", "[select\nk = 3\n"),
    ])
    def test_malformed_config_file(self, temp_dir, capsys, name, content):
        """Test that unparsable config files are usage errors."""
        config = temp_dir / name
        config.write_text(content)
        assert run(["--config", str(config), "pool-info", "--pool", "x.xvb"]) == EXIT_USAGE
        assert name in capsys.readouterr().err


class TestReportCommands:
    """Test stats, hist and compare."""

    @pytest.fixture
    def selection(self, temp_dir):
        _, paths = _write_corpus(temp_dir)
        dc1 = temp_dir / "dc1.json"
        dc3 = temp_dir / "dc3.json"
        assert run(_select_args(paths, dc1, "--k", "10", "--criterion", "dc1")) == EXIT_OK
        assert run(_select_args(paths, dc3, "--k", "10", "--threshold-k", "10,30")) == EXIT_OK
        return paths, dc1, dc3

    def test_stats(self, selection, temp_dir, capsys):
        """Test statistics with a reference selection."""
        _, dc1, dc3 = selection
        capsys.readouterr()
        out = temp_dir / "stats.json"
        assert run(["stats", "--report", str(dc1), "--reference", str(dc1), "--out", str(out)]) == EXIT_OK
        printed = capsys.readouterr().out
        assert "num_speakers:" in printed
        assert "utterance_overlap_pct: 100.00" in printed
        assert _load(out)["stats"]["speaker_overlap_pct"] == 100.0

        assert run(["stats", "--report", str(dc3)]) == EXIT_OK
        assert "overlap" not in capsys.readouterr().out

    def test_stats_rejects_other_reports(self, selection, temp_dir, capsys):
        """Test that stats needs a selection report."""
        _, dc1, _ = selection
        other = temp_dir / "stats.json"
        run(["stats", "--report", str(dc1), "--out", str(other)])
        assert run(["stats", "--report", str(other)]) == EXIT_DATA
        assert "expected a selection report" in capsys.readouterr().err

    def test_hist(self, selection, temp_dir):
        """Test the histogram CSV with threshold rows."""
        _, _, dc3 = selection
        out = temp_dir / "hist.csv"
        assert run(["hist", "--report", str(dc3), "--bins", "8", "--out", str(out)]) == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0] == "kind,group,index,lower,upper,value"
        bins = [line for line in lines if line.startswith("bin,")]
        thresholds = [line for line in lines if line.startswith("threshold,")]
        assert len(bins) == 8
        assert sum(int(line.split(",")[-1]) for line in bins) == 60
        assert [line.split(",")[2] for line in thresholds] == ["10", "30"]

    def test_hist_by_tag(self, selection, temp_dir):
        """Test per-tag histogram rows."""
        _, _, dc3 = selection
        out = temp_dir / "hist.csv"
        assert run(["hist", "--report", str(dc3), "--bins", "4", "--group-by",
                    "speaker_gender_tag", "--out", str(out)]) == EXIT_OK
        groups = {line.split(",")[1] for line in out.read_text().splitlines()[1:]
                  if line.startswith("bin,")}
        assert groups == {"f", "m"}

    def test_compare(self, selection, temp_dir, capsys):
        """Test the criterion comparison table."""
        paths, _, _ = selection
        capsys.readouterr()
        out = temp_dir / "table.json"
        assert run(["compare", "--pool", paths["pool"], "--plda", paths["plda"],
                    "--target", paths["target"], "--k", "10", "--out", str(out)]) == EXIT_OK
        printed = capsys.readouterr().out.splitlines()
        assert printed[0].split() == ["criterion", "speakers", "suspected", "utt", "%", "spk", "%"]
        assert [line.split()[0] for line in printed[1:]] == ["dc1", "dc2", "dc3"]
        table = _load(out)
        assert table["kind"] == "comparison"
        assert table["criteria"]["dc1"]["utterance_overlap_pct"] == 100.0
        assert len(table["selected"]["dc2"]) == 10


class TestSignalCommands:
    """Test pqmf, stftloss and eval."""

    def test_pqmf_default_noise(self, temp_dir, capsys):
        """Test the default 5-band bank on seeded white noise."""
        report = temp_dir / "pqmf.json"
        assert run(["--seed", "1", "pqmf", "--report", str(report)]) == EXIT_OK
        assert "snr_db:" in capsys.readouterr().out
        document = _load(report)
        assert document["kind"] == "pqmf"
        assert document["bands"] == 5 and document["taps"] == 62
        assert document["snr_db"] >= 40.0
        assert document["source"] == {"kind": "white_noise", "seed": 1}
        assert document["config"]["seed"] == 1

    def test_pqmf_roundtrip_file(self, temp_dir):
        """Test a WAV file round trip."""
        t = np.arange(44100) / 44100
        wav = temp_dir / "tones.wav"
        write_wav(AudioBuffer(0.2 * np.sin(2 * np.pi * 1000 * t), 44100), str(wav))
        report = temp_dir / "pqmf.json"
        assert run(["pqmf", "--roundtrip", str(wav), "--report", str(report)]) == EXIT_OK
        assert _load(report)["snr_db"] >= 40.0

    def test_pqmf_odd_taps(self, capsys):
        """Test that odd tap counts are rejected as usage errors."""
        assert run(["pqmf", "--taps", "61"]) == EXIT_USAGE

    @pytest.mark.parametrize("preset", ["fullband", "subband", "combined"])
    def test_stftloss_identical(self, temp_dir, preset):
        """Test zero loss of a file against itself."""
        rng = np.random.default_rng(0)
        wav = temp_dir / "a.wav"
        write_wav(AudioBuffer(rng.uniform(-0.3, 0.3, 44100), 44100), str(wav))
        out = temp_dir / "loss.json"
        assert run(["stftloss", "--a", str(wav), "--b", str(wav), "--preset", preset,
                    "--out", str(out)]) == EXIT_OK
        document = _load(out)
        assert document["loss"] == 0.0
        if preset == "combined":
            assert len(document["subbands"]) == 5

    def test_stftloss_doubled(self, temp_dir):
        """Test the per-resolution anchors for a doubled file."""
        rng = np.random.default_rng(1)
        samples = rng.uniform(-0.3, 0.3, 44100).astype(np.float32)
        a, b = temp_dir / "a.wav", temp_dir / "b.wav"
        write_wav(AudioBuffer(2 * samples, 44100), str(a))
        write_wav(AudioBuffer(samples, 44100), str(b))
        out = temp_dir / "loss.json"
        assert run(["stftloss", "--a", str(a), "--b", str(b), "--out", str(out)]) == EXIT_OK
        for row in _load(out)["resolutions"]:
            assert row["sc"] == pytest.approx(1.0, abs=1e-9)
            assert row["mag"] == pytest.approx(np.log(2.0), abs=1e-6)

    def test_eval(self, temp_dir, capsys):
        """Test evaluation of audio and embedding pairs."""
        t = np.arange(22050) / 22050
        write_wav(AudioBuffer(0.5 * np.sin(2 * np.pi * 200 * t), 22050), str(temp_dir / "ref.wav"))
        write_wav(AudioBuffer(0.5 * np.sin(2 * np.pi * 200 * t), 22050), str(temp_dir / "test.wav"))
        corpus, paths = _write_corpus(temp_dir)
        ids = [record.key_str for record in corpus.pool.records[:2]]
        (temp_dir / "pairs.tsv").write_text(f"ref.wav\ttest.wav\n-\t-\t{ids[0]}\t{ids[1]}\n")

        out = temp_dir / "eval.json"
        assert run(["eval", "--pairs", str(temp_dir / "pairs.tsv"), "--embeddings", paths["pool"],
                    "--plda", paths["plda"], "--out", str(out)]) == EXIT_OK
        printed = capsys.readouterr().out
        assert "lsd_db: 0.0000" in printed
        document = _load(out)
        assert document["kind"] == "evaluation"
        aggregates = document["aggregates"]
        assert aggregates["lsd_db"] == 0.0 and aggregates["mcd_db"] == 0.0
        assert set(aggregates) == {"lsd_db", "mcd_db", "f0_rmse_hz", "uv_error_pct", "cos_sim", "plda"}
        assert len(document["per_pair"]) == 2

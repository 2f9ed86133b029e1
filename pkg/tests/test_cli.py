"""Tests for the rdmnet command line."""

from pathlib import Path

import numpy as np
import pytest
from typer.testing import CliRunner

from rdmnet.cli import app
from rdmnet.config import config_hash, load_run_config
from rdmnet.data import load_image_dir
from rdmnet.model import build_model
from rdmnet.rsa import evaluate, predict_rdm
from rdmnet.storage import format_eval_csv, load_rdm_csv, load_weights, save_weights

runner = CliRunner()


def invoke(*args: str):
    return runner.invoke(app, [str(a) for a in args])


@pytest.fixture
def config_path(fixture_dir: Path) -> Path:
    return fixture_dir / "run.toml"


class TestTrainCommand:
    """Tests for ``rdmnet train``."""

    def test_writes_outputs(self, config_path, tmp_path):
        """Weights and one history row per epoch."""
        out = tmp_path / "run"
        result = invoke("train", "--config", config_path, "--out", out)
        assert result.exit_code == 0, result.output
        assert (out / "weights.bin").is_file()
        lines = (out / "history.csv").read_text().splitlines()
        assert lines[0] == "epoch,stage,lr,mean_loss"
        assert [line.split(",")[1] for line in lines[1:]] == ["frozen", "unfrozen", "unfrozen"]

    def test_header(self, config_path, tmp_path):
        """The reproducibility header names the config hash and the seed."""
        result = invoke("train", "--config", config_path, "--out", tmp_path / "run", "--seed", "4")
        assert result.exit_code == 0, result.output
        expected = config_hash(load_run_config(config_path, seed=4, out_dir=tmp_path / "run"))
        assert f"config_hash={expected} seed=4" in result.output

    def test_byte_identical_reruns(self, config_path, tmp_path):
        """Same config, same seed: identical weight and history bytes."""
        for name in ("a", "b"):
            result = invoke("train", "-c", config_path, "--out", tmp_path / name)
            assert result.exit_code == 0, result.output
        for filename in ("weights.bin", "history.csv"):
            assert (tmp_path / "a" / filename).read_bytes() == (tmp_path / "b" / filename).read_bytes()

    def test_zero_epochs_saves_initialization(self, config_path, tmp_path):
        """0 + 0 epochs: the saved weights are the seeded initialization."""
        out = tmp_path / "init"
        result = invoke(
            "train", "-c", config_path, "--out", out,
            "--set", "train.epochs_frozen=0", "--set", "train.epochs_unfrozen=0",
        )
        assert result.exit_code == 0, result.output
        saved = load_weights(out / "weights.bin")
        expected = build_model(load_run_config(config_path).model, seed=0).state_dict()
        assert sorted(saved) == sorted(expected)
        for name, array in expected.items():
            assert saved[name].tobytes() == array.tobytes()
        assert (out / "history.csv").read_text() == "epoch,stage,lr,mean_loss\n"

    def test_missing_rdm_exits_2(self, config_path, tmp_path):
        """A missing subject RDM is a data error."""
        result = invoke(
            "train", "-c", config_path, "--out", tmp_path / "x",
            "--set", f'paths.subject_rdms=["{(tmp_path / "missing.csv").as_posix()}"]',
        )
        assert result.exit_code == 2
        assert "error=missing_input exit=2" in result.output

    def test_bad_config_exits_1(self, config_path, tmp_path):
        """An invalid value is a config error."""
        result = invoke("train", "-c", config_path, "--out", tmp_path / "x", "--set", "train.lr=-1")
        assert result.exit_code == 1
        assert "error=config exit=1" in result.output

    def test_unknown_override_key_exits_1(self, config_path, tmp_path):
        """A mistyped key is rejected rather than ignored."""
        result = invoke("train", "-c", config_path, "--set", "train.learning_rate=0.1")
        assert result.exit_code == 1

    def test_missing_config_exits_1(self, tmp_path):
        """A config path that does not exist is a config error."""
        result = invoke("train", "-c", tmp_path / "none.toml")
        assert result.exit_code == 1

    def test_divergence_exits_3(self, config_path, tmp_path):
        """An absurd learning rate overflows the loss."""
        result = invoke("train", "-c", config_path, "--out", tmp_path / "x", "--set", "train.lr=1e30")
        assert result.exit_code == 3
        assert "error=numeric_divergence exit=3" in result.output
        assert not (tmp_path / "x" / "weights.bin").exists()


class TestLrFindCommand:
    """Tests for ``rdmnet lr-find``."""

    def test_curve(self, config_path, tmp_path):
        """At most ``steps`` rows, a printed suggestion and identical reruns."""
        outputs = []
        for name in ("a", "b"):
            result = invoke("lr-find", "-c", config_path, "--out", tmp_path / name, "--set", "lr_find.steps=10")
            assert result.exit_code == 0, result.output
            assert "suggested_lr=" in result.output
            outputs.append((tmp_path / name / "lr_curve.csv").read_bytes())
        lines = outputs[0].decode().splitlines()
        assert lines[0] == "lr,smoothed_loss"
        assert 1 <= len(lines) - 1 <= 10
        assert outputs[0] == outputs[1]

    def test_weights_untouched(self, config_path, tmp_path):
        """The sweep writes no model files."""
        out = tmp_path / "sweep"
        invoke("lr-find", "-c", config_path, "--out", out, "--set", "lr_find.steps=5")
        assert not (out / "weights.bin").exists()


class TestPredictCommand:
    """Tests for ``rdmnet predict``."""

    def test_matches_library(self, config_path, fixture_dir, tmp_path):
        """The CSV equals predict_rdm on the same weights and images."""
        run = tmp_path / "run"
        assert invoke("train", "-c", config_path, "--out", run).exit_code == 0
        pred_path = tmp_path / "pred.csv"
        result = invoke("predict", run / "weights.bin", fixture_dir / "heldout", pred_path, "-c", config_path)
        assert result.exit_code == 0, result.output

        config = load_run_config(config_path)
        model = build_model(config.model, seed=0, weights=load_weights(run / "weights.bin"))
        expected = predict_rdm(model, load_image_dir(fixture_dir / "heldout"))
        assert load_rdm_csv(pred_path) == expected

    def test_missing_weights_exits_2(self, config_path, fixture_dir, tmp_path):
        """A missing weights file is a data error."""
        result = invoke("predict", tmp_path / "none.bin", fixture_dir / "heldout", tmp_path / "p.csv", "-c", config_path)
        assert result.exit_code == 2

    def test_partial_weights_exit_2(self, config_path, fixture_dir, tmp_path):
        """A body-only weight file leaves the head untrained, so predict refuses it."""
        run = tmp_path / "run"
        assert invoke("train", "-c", config_path, "--out", run).exit_code == 0
        body = {k: v for k, v in load_weights(run / "weights.bin").items() if k.startswith("body.")}
        save_weights(tmp_path / "body.bin", body)
        pred_path = tmp_path / "p.csv"
        result = invoke("predict", tmp_path / "body.bin", fixture_dir / "heldout", pred_path, "-c", config_path)
        assert result.exit_code == 2
        assert "error=shape exit=2" in result.output
        assert "head.linear.weight" in result.output
        assert not pred_path.exists()

    def test_mismatched_spec_exits_2(self, config_path, fixture_dir, tmp_path):
        """Weights trained for another spec are a shape error."""
        run = tmp_path / "run"
        invoke("train", "-c", config_path, "--out", run, "--set", "train.epochs_unfrozen=0")
        result = invoke("predict", run / "weights.bin", fixture_dir / "heldout", tmp_path / "p.csv")
        assert result.exit_code == 2
        assert "error=shape exit=2" in result.output


class TestEvaluateCommand:
    """Tests for ``rdmnet evaluate``."""

    def test_report_csv(self, fixture_dir):
        """Two subjects: group comparison plus the leave-one-out ceiling."""
        rdms = fixture_dir / "rdms"
        paths = [rdms / "subject_00.csv", rdms / "subject_01.csv"]
        result = invoke("evaluate", paths[0], *paths, "--name", "EVC")
        assert result.exit_code == 0, result.output
        report = evaluate(load_rdm_csv(paths[0]), [load_rdm_csv(p) for p in paths], "EVC")
        assert format_eval_csv([report]) in result.output

    def test_external_ceiling(self, fixture_dir):
        """One target with --ceiling fills the explained variance."""
        rdms = fixture_dir / "rdms"
        result = invoke("evaluate", rdms / "subject_00.csv", rdms / "subject_01.csv", "--ceiling", "0.9")
        assert result.exit_code == 0, result.output
        row = next(line for line in result.output.splitlines() if line.startswith("target,"))
        assert row.split(",")[2] == "0.900000"
        assert row.split(",")[3] != ""

    def test_size_mismatch_exits_2(self, fixture_dir):
        """RDMs of different sizes cannot be compared."""
        result = invoke("evaluate", fixture_dir / "heldout_target.csv", fixture_dir / "rdms" / "subject_00.csv")
        assert result.exit_code == 2

    def test_missing_file_exits_2(self, fixture_dir, tmp_path):
        """A missing RDM is a data error."""
        result = invoke("evaluate", tmp_path / "none.csv", fixture_dir / "rdms" / "subject_00.csv")
        assert result.exit_code == 2
        assert "error=missing_input" in result.output


class TestBaselineCommand:
    """Tests for ``rdmnet baseline``."""

    def test_writes_fitted_rdm(self, fixture_dir, tmp_path):
        """The fitted RDM lands in the output directory."""
        rdms = fixture_dir / "rdms"
        result = invoke("baseline", rdms / "subject_00.csv", rdms / "subject_01.csv", "--out", tmp_path)
        assert result.exit_code == 0, result.output
        fitted = load_rdm_csv(tmp_path / "baseline_rdm.csv")
        assert fitted.n == 6
        assert "spearman_r" in result.output

    def test_fitted_path_option(self, fixture_dir, tmp_path):
        """--fitted picks the output file."""
        rdms = fixture_dir / "rdms"
        target = tmp_path / "fit" / "mine.csv"
        result = invoke("baseline", rdms / "subject_00.csv", rdms / "subject_01.csv", "--fitted", target)
        assert result.exit_code == 0, result.output
        assert np.all(load_rdm_csv(target).matrix >= 0)

    def test_needs_layer_and_target(self, fixture_dir):
        """A single RDM is not enough."""
        result = invoke("baseline", fixture_dir / "rdms" / "subject_00.csv")
        assert result.exit_code == 1


class TestHelp:
    """Tests for the command surface."""

    def test_commands_listed(self):
        """All five commands are registered."""
        result = invoke("--help")
        assert result.exit_code == 0
        for name in ("train", "lr-find", "predict", "evaluate", "baseline"):
            assert name in result.output

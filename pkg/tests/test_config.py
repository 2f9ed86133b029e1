"""Tests for settings, overrides and run-config loading."""

from pathlib import Path

import pytest

from rdmnet.config import Settings, config_hash, dump_run_config, load_run_config, parse_override
from rdmnet.errors import ConfigError
from rdmnet.schemas import CyclicSchedule


def write_config(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


class TestParseOverride:
    """Tests for ``section.key=value`` parsing."""

    @pytest.mark.parametrize(
        "text,expected",
        [
            ("train.lr=0.05", ("train", "lr", 0.05)),
            ("train.epochs_frozen=3", ("train", "epochs_frozen", 3)),
            ("train.auto_lr=false", ("train", "auto_lr", False)),
            ("paths.out_dir=runs/a", ("paths", "out_dir", "runs/a")),
            ('paths.out_dir="runs/b"', ("paths", "out_dir", "runs/b")),
            ("model.input_shape=[3, 8, 8]", ("model", "input_shape", [3, 8, 8])),
            (" train.seed = 4 ", ("train", "seed", 4)),
        ],
    )
    def test_values(self, text, expected):
        """Values are TOML literals, or plain strings when they are not."""
        assert parse_override(text) == expected

    @pytest.mark.parametrize("text", ["train.lr", "train=1", "bogus.x=1", ".lr=1", "train.=1"])
    def test_malformed(self, text):
        """Anything but a known section.key=value is a config error."""
        with pytest.raises(ConfigError):
            parse_override(text)


class TestLoadRunConfig:
    """Tests for precedence, paths and validation errors."""

    def test_defaults(self):
        """No file and no flags gives the defaults."""
        config = load_run_config()
        assert config.train.lr == 0.01
        assert config.paths.out_dir == Path("runs/latest")

    def test_precedence(self, tmp_path):
        """Flags beat overrides, overrides beat the file, the file beats defaults."""
        path = write_config(tmp_path / "run.toml", "[train]\nseed = 5\nlr = 0.2\nbatch_size = 4\n")
        config = load_run_config(path, ["train.seed=7", "train.lr=0.1", "train.lr=0.3"], seed=9)
        assert config.train.seed == 9
        assert config.train.lr == 0.3
        assert config.train.batch_size == 4
        assert config.train.momentum == 0.9

    def test_out_dir_flag(self, tmp_path):
        """--out replaces paths.out_dir."""
        config = load_run_config(out_dir=tmp_path / "out")
        assert config.paths.out_dir == tmp_path / "out"

    def test_relative_paths(self, tmp_path):
        """Relative file paths resolve against the config file's directory."""
        absolute = tmp_path / "elsewhere.csv"
        path = write_config(
            tmp_path / "cfg" / "run.toml",
            f'[paths]\nimages_dir = "images"\nsubject_rdms = ["a.csv", "{absolute.as_posix()}"]\n',
        )
        config = load_run_config(path)
        assert config.paths.images_dir == tmp_path / "cfg" / "images"
        assert config.paths.subject_rdms == [tmp_path / "cfg" / "a.csv", absolute]

    def test_schedule_table(self, tmp_path):
        """[train.schedule] selects a cyclic schedule."""
        path = write_config(
            tmp_path / "run.toml",
            '[train.schedule]\nkind = "triangular"\nbase_lr = 0.001\nmax_lr = 0.01\nstep_size = 40\n',
        )
        schedule = load_run_config(path).train.schedule
        assert isinstance(schedule, CyclicSchedule)
        assert schedule.step_size == 40

    def test_shipped_configs_parse(self):
        """The example configs in configs/ validate."""
        root = Path(__file__).parent.parent / "configs"
        for path in sorted(root.glob("*.toml")):
            load_run_config(path)

    @pytest.mark.parametrize(
        "text",
        [
            "[train\nlr = 1",
            "[optimizer]\nlr = 0.1\n",
            "[train]\nlr = -1.0\n",
            "[train]\nlearning_rate = 0.1\n",
            '[model]\npreset = "tiny"\n',
            '[model]\npreset = "desk"\ninterleave_groups = 3\n',
            "train = 3\n",
        ],
        ids=["bad-toml", "unknown-section", "negative-lr", "unknown-key", "unknown-preset", "shape", "not-a-table"],
    )
    def test_file_errors(self, tmp_path, text):
        """Every bad file surfaces as ConfigError."""
        path = write_config(tmp_path / "run.toml", text)
        with pytest.raises(ConfigError):
            load_run_config(path)

    def test_missing_file(self, tmp_path):
        """A missing config file is a config error."""
        with pytest.raises(ConfigError):
            load_run_config(tmp_path / "none.toml")

    def test_bad_override_value(self):
        """An override that fails validation is a config error."""
        with pytest.raises(ConfigError, match="batch_size"):
            load_run_config(overrides=["train.batch_size=0"])

    def test_shape_error_names_layer(self):
        """Shape failures carry the layer id into the message."""
        head = (
            "model.head={ linear_in = 64, pool = { kernel = 2, stride = 2 }, "
            "group_conv = { in_channels = 512, out_channels = 32, padding = 1, groups = 16 } }"
        )
        with pytest.raises(ConfigError, match="head.linear"):
            load_run_config(overrides=["model.preset=desk", head])


class TestConfigHash:
    """Tests for the reproducibility hash."""

    def test_stable(self, tmp_path):
        """Equal configs hash equally, whatever their source."""
        path = write_config(tmp_path / "run.toml", "[train]\nlr = 0.01\n")
        assert config_hash(load_run_config(path)) == config_hash(load_run_config())

    def test_sensitive(self):
        """Any changed value changes the hash."""
        assert config_hash(load_run_config(seed=1)) != config_hash(load_run_config(seed=2))

    def test_format(self):
        """Hex SHA-256."""
        digest = config_hash(load_run_config())
        assert len(digest) == 64
        int(digest, 16)


class TestDumpRunConfig:
    """Tests for writing TOML configs."""

    def test_roundtrip(self, tmp_path, small_spec):
        """A dumped config loads back to the same values."""
        text = dump_run_config(
            {
                "model": small_spec.model_dump(mode="json", exclude_none=True),
                "train": {"lr": 0.05, "seed": 3, "auto_lr": True, "weights": None},
                "paths": {"subject_rdms": ["a.csv", "b.csv"]},
            }
        )
        config = load_run_config(write_config(tmp_path / "run.toml", text))
        assert config.model == small_spec
        assert config.train.lr == 0.05
        assert config.train.auto_lr is True
        assert config.paths.subject_rdms == [tmp_path / "a.csv", tmp_path / "b.csv"]

    def test_none_left_out(self):
        """None values are not written."""
        assert "weights_in" not in dump_run_config({"paths": {"weights_in": None}})

    def test_unsupported_value(self):
        """Only TOML-representable values can be dumped."""
        with pytest.raises(ConfigError):
            dump_run_config({"train": {"lr": object()}})


class TestSettings:
    """Tests for environment settings."""

    def test_defaults(self, monkeypatch):
        """Quiet logging, progress on, timing off."""
        for name in ("RDMNET_LOG_LEVEL", "RDMNET_SHOW_PROGRESS", "RDMNET_HISTORY_TIMING"):
            monkeypatch.delenv(name, raising=False)
        settings = Settings(_env_file=None)
        assert settings.log_level == "WARNING"
        assert settings.show_progress is True
        assert settings.history_timing is False

    def test_environment(self, monkeypatch):
        """RDMNET_ variables override the defaults."""
        monkeypatch.setenv("RDMNET_LOADER_WORKERS", "2")
        monkeypatch.setenv("RDMNET_HISTORY_TIMING", "true")
        settings = Settings(_env_file=None)
        assert settings.loader_workers == 2
        assert settings.history_timing is True

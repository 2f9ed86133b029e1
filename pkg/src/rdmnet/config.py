"""Configuration management for rdmnet: environment settings and TOML run configs."""

import hashlib
import json
import tomllib
from collections.abc import Mapping, Sequence
from functools import lru_cache
from pathlib import Path
from typing import Any, Literal

from pydantic import ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from rdmnet.errors import ConfigError
from rdmnet.schemas.inputs import RunConfig


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="RDMNET_",
        case_sensitive=False,
    )

    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "WARNING"
    show_progress: bool = True

    # Threads for reading image directories
    loader_workers: int = 4

    # Off by default: wall-clock seconds make history files differ run to run
    history_timing: bool = False


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


settings = get_settings()

SECTIONS = ("model", "train", "lr_find", "paths")
PATH_KEYS = ("images_dir", "subject_rdms", "weights_in", "out_dir")


def parse_override(text: str) -> tuple[str, str, Any]:
    """
    Split ``section.key=value``; the value is read as a TOML literal, or kept
    as a plain string when it is not one (``paths.out_dir=runs/a``).

    Raises:
        ConfigError: If the text is not ``section.key=value`` with a known section.
    """
    target, sep, raw = text.partition("=")
    section, dot, key = target.strip().partition(".")
    if not sep or not dot or not key:
        raise ConfigError(f"override {text!r} is not of the form section.key=value")
    if section not in SECTIONS:
        raise ConfigError(f"override {text!r}: unknown section {section!r}, use one of {SECTIONS}")
    try:
        value = tomllib.loads(f"value = {raw.strip()}")["value"]
    except tomllib.TOMLDecodeError:
        value = raw.strip()
    return section, key.strip(), value


def _resolve_paths(paths: dict[str, Any], base: Path) -> dict[str, Any]:
    """Make relative path entries of a config file relative to the file's directory."""
    resolved = dict(paths)
    for key in PATH_KEYS:
        value = resolved.get(key)
        if isinstance(value, str):
            resolved[key] = str(base / value) if not Path(value).is_absolute() else value
        elif isinstance(value, list):
            resolved[key] = [
                str(base / v) if isinstance(v, str) and not Path(v).is_absolute() else v for v in value
            ]
    return resolved


def load_run_config(
    path: Path | None = None,
    overrides: Sequence[str] = (),
    seed: int | None = None,
    out_dir: Path | None = None,
) -> RunConfig:
    """
    Build a RunConfig with precedence flags > file > defaults.

    Args:
        path: TOML file with ``[model]``, ``[train]``, ``[lr_find]``, ``[paths]`` sections
        overrides: ``section.key=value`` strings, applied in order
        seed: Replaces ``train.seed``
        out_dir: Replaces ``paths.out_dir``

    Raises:
        ConfigError: Unreadable file, bad TOML, unknown sections, or a config
            that fails validation (including model shape checks).
    """
    data: dict[str, Any] = {}
    if path is not None:
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            data = tomllib.loads(path.read_text(encoding="utf-8"))
        except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
        unknown = sorted(set(data) - set(SECTIONS))
        if unknown:
            raise ConfigError(f"{path}: unknown sections {unknown}, use {list(SECTIONS)}")
        if isinstance(data.get("paths"), dict):
            data["paths"] = _resolve_paths(data["paths"], path.parent)

    for text in overrides:
        section, key, value = parse_override(text)
        table = data.setdefault(section, {})
        if not isinstance(table, dict):
            raise ConfigError(f"[{section}] must be a table")
        table[key] = value
    if seed is not None:
        data.setdefault("train", {})["seed"] = seed
    if out_dir is not None:
        data.setdefault("paths", {})["out_dir"] = str(out_dir)

    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_summarize(exc)) from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _summarize(exc: ValidationError) -> str:
    parts = []
    for error in exc.errors():
        location = ".".join(str(p) for p in error["loc"])
        parts.append(f"{location}: {error['msg']}")
    return "; ".join(parts)


def config_hash(config: RunConfig) -> str:
    """SHA-256 of the canonical (sorted-key) JSON dump of ``config``."""
    canonical = json.dumps(config.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _toml_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int | float):
        return repr(value)
    if isinstance(value, str | Path):
        return json.dumps(str(value))
    if isinstance(value, list | tuple):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    if isinstance(value, Mapping):
        items = ", ".join(f"{k} = {_toml_value(v)}" for k, v in value.items() if v is not None)
        return "{ " + items + " }" if items else "{}"
    raise ConfigError(f"cannot write {type(value).__name__} value to a config file")


def dump_run_config(sections: Mapping[str, Mapping[str, Any]]) -> str:
    """
    Render ``[section]`` / ``key = value`` TOML; nested values become inline
    tables and arrays, and None entries are left out.
    """
    lines: list[str] = []
    for section, table in sections.items():
        lines.append(f"[{section}]")
        for key, value in table.items():
            if value is not None:
                lines.append(f"{key} = {_toml_value(value)}")
        lines.append("")
    return "\n".join(lines)

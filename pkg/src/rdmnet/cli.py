"""CLI for rdmnet - Siamese RDM prediction and RSA evaluation."""

import hashlib
import json
import logging
from collections.abc import Iterator, Sequence
from contextlib import contextmanager
from pathlib import Path
from typing import Optional

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler

from rdmnet import __version__
from rdmnet.config import config_hash, load_run_config, settings
from rdmnet.core.runner import (
    BASELINE_FILE,
    run_baseline,
    run_evaluate,
    run_lr_find,
    run_predict,
    run_train,
)
from rdmnet.errors import ConfigError, DataError, NumericDivergenceError, RdmNetError, ShapeError
from rdmnet.schemas import RunConfig
from rdmnet.storage.reports_csv import format_eval_csv
from rdmnet.utils.formatters import format_baseline, format_eval_note, format_lr_find, format_train_summary

app = typer.Typer(
    name="rdmnet",
    help="Train Siamese networks to predict RDMs and evaluate them with RSA",
    no_args_is_help=True,
)
err_console = Console(stderr=True)

EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_DIVERGENCE = 3

ConfigOption = typer.Option(None, "--config", "-c", help="TOML run config")
SeedOption = typer.Option(None, "--seed", help="Override train.seed")
SetOption = typer.Option(
    [], "--set", help="Override a config value: section.key=value (repeatable)"
)


def _error_kind(exc: BaseException) -> str:
    """``MissingInputError`` -> ``missing_input``."""
    if isinstance(exc, OSError):
        return "io"
    name = type(exc).__name__.removesuffix("Error")
    return "".join(f"_{c.lower()}" if c.isupper() else c for c in name).lstrip("_")


def _exit_code(exc: BaseException) -> int | None:
    if isinstance(exc, (ConfigError, ValidationError)):
        return EXIT_CONFIG
    if isinstance(exc, NumericDivergenceError):
        return EXIT_DIVERGENCE
    if isinstance(exc, (DataError, ShapeError, OSError)):
        return EXIT_DATA
    return None


@contextmanager
def _diagnostics() -> Iterator[None]:
    """Turn rdmnet errors into one stderr line and the matching exit code."""
    try:
        yield
    except (RdmNetError, ValidationError, OSError) as exc:
        code = _exit_code(exc)
        if code is None:
            raise
        typer.echo(
            f"error={_error_kind(exc)} exit={code} message={json.dumps(str(exc))}",
            err=True,
        )
        raise typer.Exit(code) from exc


def _header(run_hash: str, seed: int | str) -> None:
    """Reproducibility header on stderr."""
    typer.echo(f"rdmnet version={__version__} config_hash={run_hash} seed={seed}", err=True)


def _files_hash(paths: Sequence[Path]) -> str:
    digest = hashlib.sha256()
    for path in paths:
        digest.update(path.read_bytes() if path.is_file() else b"")
    return digest.hexdigest()


def _load(config: Optional[Path], overrides: list[str], seed: Optional[int], out: Optional[Path]) -> RunConfig:
    run_config = load_run_config(config, overrides, seed=seed, out_dir=out)
    _header(config_hash(run_config), run_config.train.seed)
    return run_config


@app.callback(invoke_without_command=True)
def main(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log progress at INFO level"),
) -> None:
    """Siamese group-convolution RDM predictor."""
    level = "INFO" if verbose else settings.log_level
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


@app.command()
def train(
    config: Optional[Path] = ConfigOption,
    seed: Optional[int] = SeedOption,
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory"),
    overrides: list[str] = SetOption,
) -> None:
    """
    Train a model on the group-averaged, normalized subject RDMs.

    Writes weights.bin and history.csv into the output directory.
    Exit codes: 1 config error, 2 data error, 3 numeric divergence.

    Example:
        rdmnet train --config configs/desk.toml --seed 0 --out runs/evc
        rdmnet train -c fixture/run.toml --set train.epochs_unfrozen=50
    """
    with _diagnostics():
        run_config = _load(config, overrides, seed, out)
        outcome = run_train(run_config)
    format_train_summary(outcome.history, outcome.lr, str(outcome.weights_path))


@app.command("lr-find")
def lr_find(
    config: Optional[Path] = ConfigOption,
    seed: Optional[int] = SeedOption,
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory"),
    overrides: list[str] = SetOption,
) -> None:
    """
    Run the LR range test and write lr_curve.csv; prints suggested_lr.

    Example:
        rdmnet lr-find --config configs/desk.toml --set lr_find.steps=60
    """
    with _diagnostics():
        run_config = _load(config, overrides, seed, out)
        result, curve_path = run_lr_find(run_config)
    typer.echo(f"suggested_lr={result.suggested_lr!r}")
    format_lr_find(result, str(curve_path))


@app.command()
def predict(
    weights: Path = typer.Argument(..., help="Weight container file"),
    images_dir: Path = typer.Argument(..., help="Directory of .tsr images"),
    out_rdm: Path = typer.Argument(..., help="Where to write the predicted RDM CSV"),
    config: Optional[Path] = ConfigOption,
    overrides: list[str] = SetOption,
) -> None:
    """
    Predict the RDM of a set of images with trained weights.

    The model spec comes from --config (desk preset by default).

    Example:
        rdmnet predict runs/evc/weights.bin data/test_images pred.csv -c configs/desk.toml
    """
    with _diagnostics():
        run_config = _load(config, overrides, None, None)
        rdm = run_predict(run_config, weights, images_dir, out_rdm)
    err_console.print(f"[dim]Wrote {rdm.n}x{rdm.n} RDM to {out_rdm}[/dim]")


@app.command()
def evaluate(
    pred_rdm: Path = typer.Argument(..., help="Predicted RDM CSV"),
    target_rdms: list[Path] = typer.Argument(..., help="Target RDM CSVs, one per subject"),
    name: str = typer.Option("target", "--name", "-n", help="Target name in the report"),
    ceiling: Optional[float] = typer.Option(
        None, "--ceiling", help="Noise ceiling to use when only one target is given"
    ),
) -> None:
    """
    Compare a predicted RDM with target RDMs and print the report as CSV.

    With two or more targets the comparison is against their average and
    the noise ceiling is their leave-one-subject-out lower bound.

    Example:
        rdmnet evaluate pred.csv subjects/s01.csv subjects/s02.csv --name EVC
    """
    with _diagnostics():
        _header(_files_hash([pred_rdm, *target_rdms]), "-")
        report = run_evaluate(pred_rdm, target_rdms, name, ceiling=ceiling)
    typer.echo(format_eval_csv([report]), nl=False)
    note = format_eval_note(report)
    if note:
        err_console.print(note)


@app.command()
def baseline(
    rdms: list[Path] = typer.Argument(..., help="Layer RDM CSVs followed by the target RDM CSV"),
    out: Path = typer.Option(Path("runs/latest"), "--out", "-o", help="Output directory"),
    fitted: Optional[Path] = typer.Option(None, "--fitted", help="Path for the fitted RDM CSV"),
) -> None:
    """
    Fit the best linear combination of layer RDMs to a target RDM.

    The last path is the target. Prints the weights and the fit's Spearman
    correlation and writes the fitted RDM.

    Example:
        rdmnet baseline conv1.csv conv5.csv fc7.csv target.csv --out runs/baseline
    """
    if len(rdms) < 2:
        typer.echo(
            f"error=config exit={EXIT_CONFIG} "
            'message="baseline needs at least one layer RDM and a target RDM"',
            err=True,
        )
        raise typer.Exit(EXIT_CONFIG)
    layer_paths, target_path = rdms[:-1], rdms[-1]
    fitted_path = fitted or out / BASELINE_FILE
    with _diagnostics():
        _header(_files_hash(rdms), "-")
        fit = run_baseline(layer_paths, target_path, fitted_path)
    format_baseline(fit, [p.stem for p in layer_paths], str(fitted_path))


if __name__ == "__main__":
    app()

"""Pipelines behind the CLI commands: train, lr-find, predict, evaluate, baseline."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

from rich.console import Console
from rich.progress import BarColumn, MofNCompleteColumn, Progress, SpinnerColumn, TextColumn, TimeElapsedColumn

from rdmnet.config import Settings, get_settings
from rdmnet.data.images import load_image_dir
from rdmnet.data.pairs import PairDataset
from rdmnet.errors import ShapeError
from rdmnet.model.siamese import SiameseModel, build_model
from rdmnet.rsa.baseline import baseline_fit
from rdmnet.rsa.predict import predict_rdm
from rdmnet.rsa.rdm import Rdm, group_average, normalize_rdm
from rdmnet.rsa.stats import evaluate
from rdmnet.schemas.inputs import RunConfig
from rdmnet.schemas.outputs import BaselineFit, EpochRecord, EvalReport, LrFindResult, TrainHistory
from rdmnet.storage.rdm_csv import load_rdm_csv, write_rdm_csv
from rdmnet.storage.reports_csv import format_history_csv, format_lr_curve_csv, write_text
from rdmnet.storage.weights import load_weights, save_weights
from rdmnet.training.lr_finder import lr_find
from rdmnet.training.trainer import train

logger = logging.getLogger(__name__)

WEIGHTS_FILE = "weights.bin"
HISTORY_FILE = "history.csv"
LR_CURVE_FILE = "lr_curve.csv"
BASELINE_FILE = "baseline_rdm.csv"

# Progress and status go to stderr so stdout stays machine-readable
console = Console(stderr=True)


@dataclass
class TrainOutcome:
    history: TrainHistory
    lr: float
    weights_path: Path
    history_path: Path
    lr_find: LrFindResult | None = None


class TrainProgress:
    """Live epoch bar for a training run, one task per stage."""

    def __init__(self, config: RunConfig, enabled: bool = True):
        self.enabled = enabled
        self.progress = Progress(
            SpinnerColumn(),
            TextColumn("[bold]{task.description}"),
            BarColumn(),
            MofNCompleteColumn(),
            TextColumn("[dim]loss {task.fields[loss]}"),
            TimeElapsedColumn(),
            console=console,
            transient=True,
            disable=not enabled,
        )
        train_cfg = config.train
        self.tasks = {
            "frozen": self.progress.add_task(
                "frozen", total=train_cfg.epochs_frozen, loss="-", visible=train_cfg.epochs_frozen > 0
            ),
            "unfrozen": self.progress.add_task(
                "unfrozen", total=train_cfg.epochs_unfrozen, loss="-", visible=train_cfg.epochs_unfrozen > 0
            ),
        }

    def __enter__(self) -> TrainProgress:
        self.progress.start()
        return self

    def __exit__(self, *exc: object) -> None:
        self.progress.stop()

    def update(self, record: EpochRecord) -> None:
        self.progress.update(self.tasks[record.stage.value], advance=1, loss=f"{record.mean_loss:.5f}")


def load_target(paths: Sequence[Path]) -> Rdm:
    """Subject RDMs averaged across subjects, then normalized to [0, 1]."""
    return normalize_rdm(group_average([load_rdm_csv(p) for p in paths]))


def load_dataset(config: RunConfig, settings: Settings | None = None) -> PairDataset:
    settings = settings or get_settings()
    config.check_inputs(need_images=True, need_rdms=True)
    images_dir = config.paths.images_dir or Path(".")
    target = load_target(config.paths.subject_rdms)
    images = load_image_dir(images_dir, workers=settings.loader_workers)
    return PairDataset(images, target, both_orders=config.train.both_orders)


def load_model(config: RunConfig, weights_path: Path | None = None) -> SiameseModel:
    """Seeded model, with ``weights_path`` (or ``paths.weights_in``) imported if set."""
    source = weights_path or config.paths.weights_in
    weights = load_weights(source) if source is not None else None
    return build_model(config.model, seed=config.train.seed, weights=weights)


def run_lr_find(config: RunConfig, settings: Settings | None = None) -> tuple[LrFindResult, Path]:
    """LR range test; writes ``lr_curve.csv`` under ``paths.out_dir``. Model files are not touched."""
    dataset = load_dataset(config, settings)
    model = load_model(config)
    with console.status("Sweeping learning rates...", spinner="dots"):
        result = lr_find(
            model,
            dataset,
            config.lr_find,
            batch_size=config.train.batch_size,
            momentum=config.train.momentum,
            seed=config.train.seed,
            shuffle=config.train.shuffle,
        )
    out_path = config.paths.out_dir / LR_CURVE_FILE
    write_text(out_path, format_lr_curve_csv(result))
    return result, out_path


def run_train(config: RunConfig, settings: Settings | None = None) -> TrainOutcome:
    """
    Subject RDMs -> group average -> normalize -> pairs -> model -> train.

    Writes ``weights.bin`` and ``history.csv`` under ``paths.out_dir``.
    With ``train.auto_lr`` the LR range test runs first and its suggestion
    replaces ``train.lr``.
    """
    settings = settings or get_settings()
    dataset = load_dataset(config, settings)
    model = load_model(config)
    train_cfg = config.train

    sweep = None
    if train_cfg.auto_lr:
        sweep = lr_find(
            model,
            dataset,
            config.lr_find,
            batch_size=train_cfg.batch_size,
            momentum=train_cfg.momentum,
            seed=train_cfg.seed,
            shuffle=train_cfg.shuffle,
        )
        logger.info(f"LR range test suggests lr={sweep.suggested_lr:.4g}")
        train_cfg = train_cfg.model_copy(update={"lr": sweep.suggested_lr})

    with TrainProgress(config, enabled=settings.show_progress) as progress:
        history = train(model, dataset, train_cfg, on_epoch=progress.update)

    out_dir = config.paths.out_dir
    weights_path = out_dir / WEIGHTS_FILE
    history_path = out_dir / HISTORY_FILE
    save_weights(weights_path, model.state_dict())
    write_text(history_path, format_history_csv(history, include_seconds=settings.history_timing))
    return TrainOutcome(
        history=history,
        lr=train_cfg.lr,
        weights_path=weights_path,
        history_path=history_path,
        lr_find=sweep,
    )


def run_predict(
    config: RunConfig,
    weights_path: Path,
    images_dir: Path,
    out_path: Path,
    settings: Settings | None = None,
) -> Rdm:
    """
    Predicted RDM of ``images_dir`` written to ``out_path``.

    Raises:
        ShapeError: If the weights do not cover every parameter of the
            configured model.
    """
    settings = settings or get_settings()
    model = build_model(config.model, seed=config.train.seed)
    report = model.load_state(load_weights(weights_path))
    if report.partial:
        raise ShapeError(
            f"{weights_path} lacks {len(report.kept_initial)} parameters of the configured model: "
            f"{', '.join(report.kept_initial)}"
        )
    images = load_image_dir(images_dir, workers=settings.loader_workers)
    rdm = predict_rdm(model, images)
    write_rdm_csv(out_path, rdm)
    return rdm


def run_evaluate(
    pred_path: Path,
    target_paths: Sequence[Path],
    target_name: str,
    ceiling: float | None = None,
) -> EvalReport:
    pred = load_rdm_csv(pred_path)
    targets = [load_rdm_csv(p) for p in target_paths]
    return evaluate(pred, targets, target_name, ceiling=ceiling)


def run_baseline(layer_paths: Sequence[Path], target_path: Path, out_path: Path) -> BaselineFit:
    layers = [load_rdm_csv(p) for p in layer_paths]
    target = load_rdm_csv(target_path)
    fit, fitted = baseline_fit(layers, target)
    write_rdm_csv(out_path, fitted)
    return fit

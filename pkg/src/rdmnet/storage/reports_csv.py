"""CSV writers for training histories, LR range tests and evaluation reports."""

import csv
import io
from collections.abc import Iterable, Sequence
from pathlib import Path

from rdmnet.schemas.outputs import EvalReport, LrFindResult, TrainHistory

HISTORY_COLUMNS = ["epoch", "stage", "lr", "mean_loss"]
LR_CURVE_COLUMNS = ["lr", "smoothed_loss"]
EVAL_COLUMNS = ["target_name", "spearman_r", "noise_ceiling_lower", "explained_variance_pct"]


def _render(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def format_history_csv(history: TrainHistory, include_seconds: bool = False) -> str:
    """One row per epoch; ``seconds`` only when requested (it varies run to run)."""
    header = HISTORY_COLUMNS + (["seconds"] if include_seconds else [])
    rows = []
    for record in history.records:
        row = [str(record.epoch), record.stage.value, repr(record.lr), repr(record.mean_loss)]
        if include_seconds:
            row.append(f"{record.seconds:.3f}")
        rows.append(row)
    return _render(header, rows)


def format_lr_curve_csv(result: LrFindResult) -> str:
    rows = [[repr(lr), repr(loss)] for lr, loss in zip(result.lrs, result.smoothed_losses, strict=True)]
    return _render(LR_CURVE_COLUMNS, rows)


def _fixed(value: float | None) -> str:
    return "" if value is None else f"{value:.6f}"


def format_eval_csv(reports: Sequence[EvalReport]) -> str:
    """EvalReport rows with 6 decimal places; missing ceilings are empty cells."""
    rows = [
        [
            report.target_name,
            _fixed(report.spearman_r),
            _fixed(report.noise_ceiling_lower),
            _fixed(report.explained_variance_pct),
        ]
        for report in reports
    ]
    return _render(EVAL_COLUMNS, rows)


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")

"""LR range test: sweep exponentially increasing learning rates on a scratch model."""

from __future__ import annotations

import logging
import math
from collections.abc import Iterator

import numpy as np

from rdmnet.autograd.tensor import Array
from rdmnet.data.pairs import Batch, PairDataset, batch_iter
from rdmnet.errors import NumericDivergenceError, ShapeError
from rdmnet.model.siamese import SiameseModel
from rdmnet.schemas.inputs import LrFindConfig
from rdmnet.schemas.outputs import LrFindResult
from rdmnet.training.optim import SGD
from rdmnet.training.trainer import train_step

logger = logging.getLogger(__name__)


def lr_grid(lr_min: float, lr_max: float, steps: int) -> Array:
    """``lr_i = lr_min * (lr_max / lr_min) ** (i / (steps - 1))`` for i in 0..steps-1."""
    exponents = np.arange(steps, dtype=np.float64) / (steps - 1)
    return lr_min * (lr_max / lr_min) ** exponents


def _endless_batches(dataset: PairDataset, batch_size: int, seed: int, shuffle: bool) -> Iterator[Batch]:
    epoch = 0
    while True:
        yield from batch_iter(dataset, batch_size, seed, epoch, shuffle)
        epoch += 1


def suggest_lr(lrs: Array, smoothed: Array, skip_start: int = 0, skip_end: int = 0) -> float:
    """
    Learning rate at the steepest descent of ``smoothed`` against log10(lr).

    Slopes are taken over the whole curve, but the first ``skip_start`` and
    last ``skip_end`` points are not candidates: the head of the curve is
    dominated by the moving average settling in. When fewer than two
    candidates would remain, every point is a candidate.
    """
    if lrs.size < 2:
        return float(lrs[0])
    slopes = np.gradient(smoothed, np.log10(lrs))
    start, stop = skip_start, lrs.size - skip_end
    if stop - start < 2:
        start, stop = 0, lrs.size
    return float(lrs[start + int(np.argmin(slopes[start:stop]))])


def lr_find(
    model: SiameseModel,
    dataset: PairDataset,
    config: LrFindConfig | None = None,
    batch_size: int = 32,
    momentum: float = 0.9,
    seed: int = 0,
    shuffle: bool = True,
) -> LrFindResult:
    """
    Run one optimizer step per learning rate on a copy of ``model``.

    Losses are smoothed by a bias-corrected exponential moving average.
    The sweep stops early once the smoothed loss exceeds
    ``divergence_factor`` times the best smoothed loss so far, or when a
    loss is not finite; the point that triggered the stop is not recorded.

    Raises:
        ShapeError: If the dataset is empty.
        NumericDivergenceError: If the very first loss is not finite.
    """
    config = config or LrFindConfig()
    if len(dataset) == 0:
        raise ShapeError("LR range test needs a non-empty dataset")

    scratch = model.clone()
    optimizer = SGD(scratch, momentum=momentum)
    batches = _endless_batches(dataset, batch_size, seed, shuffle)
    beta = config.smoothing_beta

    lrs: list[float] = []
    smoothed: list[float] = []
    average = 0.0
    best = math.inf
    aborted = False

    for step, lr in enumerate(lr_grid(config.lr_min, config.lr_max, config.steps)):
        loss = train_step(scratch, optimizer, dataset, next(batches), float(lr))
        if not math.isfinite(loss):
            if step == 0:
                raise NumericDivergenceError(f"non-finite loss {loss} at lr={lr:.3g}", epoch=0, batch=0)
            aborted = True
            break
        average = beta * average + (1.0 - beta) * loss
        value = average / (1.0 - beta ** (step + 1))
        if step > 0 and value > config.divergence_factor * best:
            aborted = True
            break
        best = min(best, value)
        lrs.append(float(lr))
        smoothed.append(value)

    if aborted:
        logger.info(f"LR range test stopped after {len(lrs)} of {config.steps} steps")
    suggested = suggest_lr(np.array(lrs), np.array(smoothed), config.skip_start, config.skip_end)
    return LrFindResult(lrs=lrs, smoothed_losses=smoothed, suggested_lr=suggested, aborted_early=aborted)

"""Two-stage training: head only with the body frozen, then everything."""

from __future__ import annotations

import logging
import math
import time
from collections.abc import Callable

from rdmnet.autograd.tensor import Tape, Tensor
from rdmnet.data.pairs import Batch, PairDataset, batch_iter
from rdmnet.errors import NumericDivergenceError, ShapeError
from rdmnet.model.siamese import SiameseModel, forward_indexed, set_frozen
from rdmnet.schemas.inputs import TrainConfig
from rdmnet.schemas.outputs import EpochRecord, Stage, TrainHistory
from rdmnet.training.loss import euclidean_loss
from rdmnet.training.optim import SGD
from rdmnet.training.schedules import cyclic_lr

logger = logging.getLogger(__name__)

EpochCallback = Callable[[EpochRecord], None]


def train_step(model: SiameseModel, optimizer: SGD, dataset: PairDataset, batch: Batch, lr: float) -> float:
    """
    Forward, backward and one optimizer step on ``batch``.

    Returns:
        The batch loss. A non-finite loss is returned without updating anything.
    """
    with Tape() as tape:
        pred = forward_indexed(model, dataset.images, batch.index_a, batch.index_b)
        loss = euclidean_loss(pred, Tensor(batch.targets, dtype=pred.dtype))
    value = loss.item()
    if not math.isfinite(value):
        return value
    grads = tape.backward(loss)
    optimizer.step(grads, lr)
    for _, param in model.named_parameters():
        param.zero_grad()
    return value


def train(
    model: SiameseModel,
    dataset: PairDataset,
    config: TrainConfig,
    on_epoch: EpochCallback | None = None,
) -> TrainHistory:
    """
    Train ``model`` in place.

    Stage 1 runs ``epochs_frozen`` epochs with the body frozen; stage 2
    unfreezes everything and runs ``epochs_unfrozen`` epochs. Epoch ``e``
    (counted across both stages) visits the pairs in the order given by
    ``batch_iter(..., seed=config.seed, epoch=e)``; the schedule's iteration
    counter runs across stages too. Given the seed and initial weights the
    whole run is deterministic.

    Args:
        model: Model to train; left with every layer unfrozen
        dataset: Image pairs and targets
        config: Optimizer, schedule and staging
        on_epoch: Called with each finished epoch's record

    Returns:
        One record per completed epoch.

    Raises:
        ShapeError: If the dataset is empty or its images do not fit the model.
        NumericDivergenceError: On a non-finite batch loss, naming epoch and batch.
    """
    if len(dataset) == 0:
        raise ShapeError("training dataset has no pairs")
    if dataset.images.shape[1:] != model.spec.input_shape:
        raise ShapeError(
            f"images have shape {dataset.images.shape[1:]}, model expects {model.spec.input_shape}",
            layer_id="input",
        )

    history = TrainHistory()
    optimizer = SGD(model, momentum=config.momentum)
    body = model.body_layer_ids
    iteration = 0
    epoch = 0

    for stage, count in ((Stage.FROZEN, config.epochs_frozen), (Stage.UNFROZEN, config.epochs_unfrozen)):
        if count == 0:
            continue
        set_frozen(model, body, frozen=stage is Stage.FROZEN)
        logger.info(f"Stage {stage.value}: {count} epochs, {len(dataset)} pairs per epoch")

        for _ in range(count):
            started = time.perf_counter()
            loss_sum = 0.0
            lr_sum = 0.0
            batches = 0
            for index, batch in enumerate(
                batch_iter(dataset, config.batch_size, config.seed, epoch, config.shuffle)
            ):
                lr = cyclic_lr(config.schedule, config.lr, iteration)
                loss = train_step(model, optimizer, dataset, batch, lr)
                if not math.isfinite(loss):
                    raise NumericDivergenceError(f"non-finite loss {loss}", epoch=epoch, batch=index)
                loss_sum += loss * batch.size
                lr_sum += lr
                batches += 1
                iteration += 1

            record = EpochRecord(
                epoch=epoch,
                stage=stage,
                lr=lr_sum / batches,
                mean_loss=loss_sum / len(dataset),
                seconds=time.perf_counter() - started,
            )
            history.records.append(record)
            logger.debug(f"epoch {epoch} ({stage.value}) loss={record.mean_loss:.6f} lr={record.lr:.3g}")
            if on_epoch is not None:
                on_epoch(record)
            epoch += 1

    set_frozen(model, body, frozen=False)
    return history

"""Pipelines behind the rdmnet commands."""

from rdmnet.core.runner import (
    TrainOutcome,
    load_dataset,
    load_model,
    load_target,
    run_baseline,
    run_evaluate,
    run_lr_find,
    run_predict,
    run_train,
)

__all__ = [
    "TrainOutcome",
    "load_dataset",
    "load_model",
    "load_target",
    "run_baseline",
    "run_evaluate",
    "run_lr_find",
    "run_predict",
    "run_train",
]

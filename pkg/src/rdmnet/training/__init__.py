"""Loss, optimizer, learning-rate schedules, LR range test and the staged training loop."""

from rdmnet.training.loss import euclidean_loss
from rdmnet.training.lr_finder import lr_find, lr_grid, suggest_lr
from rdmnet.training.optim import SGD, sgd_step
from rdmnet.training.schedules import cyclic_lr, triangular_lr
from rdmnet.training.trainer import train, train_step

__all__ = [
    "SGD",
    "cyclic_lr",
    "euclidean_loss",
    "lr_find",
    "lr_grid",
    "sgd_step",
    "suggest_lr",
    "train",
    "train_step",
    "triangular_lr",
]

"""Training loss."""

from rdmnet.autograd import ops
from rdmnet.autograd.tensor import Tensor
from rdmnet.errors import ShapeError


def euclidean_loss(pred: Tensor, target: Tensor) -> Tensor:
    """
    Batch mean of squared differences, as a shape-(1,) tensor.

    Raises:
        ShapeError: If the shapes differ or the batch is empty.
    """
    if pred.shape != target.shape:
        raise ShapeError(f"loss needs equal shapes, got {pred.shape} and {target.shape}")
    if pred.size == 0:
        raise ShapeError("loss of an empty batch")
    return ops.mean(ops.square(ops.sub(pred, target)))

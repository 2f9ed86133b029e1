"""SGD with momentum."""

from __future__ import annotations

from collections.abc import Collection, Mapping

from rdmnet.autograd.tensor import Array, Tensor
from rdmnet.errors import ShapeError
from rdmnet.model.siamese import SiameseModel


def sgd_step(
    params: Mapping[str, Tensor],
    grads: Mapping[str, Array],
    lr: float,
    momentum: float,
    velocity: dict[str, Array],
    frozen: Collection[str] = (),
) -> None:
    """
    One in-place update ``v <- momentum * v + g; w <- w - lr * v``.

    Frozen parameters and parameters without a gradient are skipped, and
    their velocity is left as it was. ``velocity`` starts empty (v = 0).

    Raises:
        ShapeError: If a gradient's shape differs from its parameter's.
    """
    for name, param in params.items():
        if name in frozen:
            continue
        grad = grads.get(name)
        if grad is None:
            continue
        if grad.shape != param.shape:
            raise ShapeError(f"gradient shape {grad.shape} != parameter shape {param.shape}", layer_id=name)
        previous = velocity.get(name)
        step = grad.astype(param.dtype) if previous is None else momentum * previous + grad
        velocity[name] = step
        param.data -= lr * step


class SGD:
    """Momentum SGD over a model's parameters, honoring its frozen layers."""

    def __init__(self, model: SiameseModel, momentum: float = 0.9):
        self.model = model
        self.momentum = momentum
        self.velocity: dict[str, Array] = {}

    def step(self, grads: Mapping[Tensor, Array], lr: float) -> None:
        """Apply ``grads`` (as returned by ``Tape.backward``) at learning rate ``lr``."""
        params = dict(self.model.named_parameters())
        by_name = {name: grads[tensor] for name, tensor in params.items() if tensor in grads}
        sgd_step(
            params,
            by_name,
            lr,
            self.momentum,
            self.velocity,
            frozen=self.model.frozen_parameter_names(),
        )

"""Tensor value type and the tape that records operations for reverse-mode autodiff."""

from __future__ import annotations

import contextvars
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from types import TracebackType
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from rdmnet.errors import ShapeError


DEFAULT_DTYPE = np.float32
FLOAT_DTYPES = (np.dtype(np.float32), np.dtype(np.float64))

Array = NDArray[Any]
BackwardFn = Callable[[Array], Sequence[Array | None]]

_active_tape: contextvars.ContextVar[Tape | None] = contextvars.ContextVar(
    "rdmnet_active_tape", default=None
)


def _resolve_dtype(data: ArrayLike, dtype: Any) -> np.dtype[Any]:
    if dtype is not None:
        resolved = np.dtype(dtype)
    elif isinstance(data, np.ndarray) and data.dtype in FLOAT_DTYPES:
        resolved = data.dtype
    else:
        resolved = np.dtype(DEFAULT_DTYPE)
    if resolved not in FLOAT_DTYPES:
        raise TypeError(f"Tensor dtype must be float32 or float64, got {resolved}")
    return resolved


class Tensor:
    """
    Dense n-dimensional float array with an optional gradient buffer.

    Shapes are never empty and every dimension is at least 1; a Python
    scalar becomes a tensor of shape ``(1,)``.
    """

    __slots__ = ("data", "grad", "requires_grad", "name")

    def __init__(
        self,
        data: ArrayLike,
        requires_grad: bool = False,
        name: str | None = None,
        dtype: Any = None,
    ):
        array = np.ascontiguousarray(data, dtype=_resolve_dtype(data, dtype))
        if array.ndim == 0:
            array = array.reshape(1)
        if any(dim < 1 for dim in array.shape):
            raise ShapeError(f"Tensor dimensions must be >= 1, got shape {array.shape}")
        self.data: Array = array
        self.grad: Array | None = None
        self.requires_grad = requires_grad
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def ndim(self) -> int:
        return int(self.data.ndim)

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def dtype(self) -> np.dtype[Any]:
        return self.data.dtype

    def numpy(self) -> Array:
        return self.data

    def item(self) -> float:
        if self.size != 1:
            raise ShapeError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> Tensor:
        """Copy of the values with no gradient tracking."""
        return Tensor(self.data.copy(), name=self.name)

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{label}, requires_grad={self.requires_grad})"


@dataclass(frozen=True, slots=True)
class TapeEntry:
    """One recorded operation: inputs, output and the rule mapping output grad to input grads."""

    node_id: int
    op: str
    inputs: tuple[Tensor, ...]
    output: Tensor
    backward: BackwardFn


class Tape:
    """
    Ordered record of differentiable operations.

    Used as a context manager; operations executed inside the block on
    tensors that require gradients are appended in execution order, so the
    list is topological by construction. ``backward`` replays it in exact
    reverse order.

    Usage:
        with Tape() as tape:
            loss = f(x)
        grads = tape.backward(loss)
    """

    def __init__(self) -> None:
        self.entries: list[TapeEntry] = []
        self._token: contextvars.Token[Tape | None] | None = None

    def __enter__(self) -> Tape:
        self._token = _active_tape.set(self)
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc_val: BaseException | None,
        exc_tb: TracebackType | None,
    ) -> None:
        if self._token is not None:
            _active_tape.reset(self._token)
            self._token = None

    def __len__(self) -> int:
        return len(self.entries)

    def record(
        self,
        op: str,
        inputs: tuple[Tensor, ...],
        output: Tensor,
        backward: BackwardFn,
    ) -> int:
        node_id = len(self.entries)
        self.entries.append(TapeEntry(node_id, op, inputs, output, backward))
        return node_id

    def backward(self, loss: Tensor) -> dict[Tensor, Array]:
        """
        Propagate d(loss)/d(node) through the tape.

        Gradients reaching the same tensor along several paths (for example
        a parameter read by both Siamese branches) are summed. Leaf tensors
        with ``requires_grad`` get the result accumulated into ``.grad``.

        Returns:
            Mapping from every leaf tensor that received a gradient to that gradient.

        Raises:
            ShapeError: If ``loss`` is not a single-element tensor.
        """
        if loss.size != 1:
            raise ShapeError(f"backward needs a scalar loss, got shape {loss.shape}")

        grads: dict[int, Array] = {id(loss): np.ones_like(loss.data)}
        tensors: dict[int, Tensor] = {id(loss): loss}

        for entry in reversed(self.entries):
            upstream = grads.pop(id(entry.output), None)
            if upstream is None:
                continue
            input_grads = entry.backward(upstream)
            for tensor, grad in zip(entry.inputs, input_grads, strict=True):
                if grad is None or not tensor.requires_grad:
                    continue
                key = id(tensor)
                if grad.shape != tensor.shape:
                    raise ShapeError(
                        f"backward of {entry.op} produced grad {grad.shape} for input {tensor.shape}"
                    )
                if key in grads:
                    grads[key] = grads[key] + grad
                else:
                    grads[key] = grad
                    tensors[key] = tensor

        leaves: dict[Tensor, Array] = {}
        for key, grad in grads.items():
            tensor = tensors[key]
            if not tensor.requires_grad:
                continue
            grad = grad.astype(tensor.dtype, copy=False)
            tensor.grad = grad.copy() if tensor.grad is None else tensor.grad + grad
            leaves[tensor] = grad
        return leaves


def current_tape() -> Tape | None:
    """Return the tape of the innermost active ``with Tape()`` block, if any."""
    return _active_tape.get()


def record(
    op: str,
    inputs: tuple[Tensor, ...],
    output_data: Array,
    backward: BackwardFn,
) -> Tensor:
    """Wrap an op result and, when a tape is active and any input needs grads, record it."""
    tape = current_tape()
    tracked = tape is not None and any(t.requires_grad for t in inputs)
    out = Tensor(output_data, requires_grad=tracked)
    if tracked and tape is not None:
        tape.record(op, inputs, out, backward)
    return out

"""Finite-difference gradient checking."""

from collections.abc import Callable

import numpy as np

from rdmnet.autograd.tensor import Tape, Tensor


def grad_check(f: Callable[[Tensor], Tensor], input: Tensor, epsilon: float = 1e-3) -> float:
    """
    Compare the tape gradient of a scalar function with central differences.

    ``f`` is called with ``input`` itself, and perturbations are written into
    ``input.data`` in place and restored afterwards. That makes it possible to
    check a model parameter through a closure that ignores its argument.
    Run checks on float64 tensors; float32 roundoff swamps small gradients.

    Returns:
        max over coordinates of |analytic - numeric| / max(1e-8, |analytic| + |numeric|)
    """
    was_tracked = input.requires_grad
    saved_grad = input.grad
    input.requires_grad = True
    input.grad = None
    try:
        with Tape() as tape:
            out = f(input)
        grads = tape.backward(out)
        analytic = grads.get(input, np.zeros_like(input.data)).astype(np.float64).reshape(-1)

        numeric = np.zeros(input.size, dtype=np.float64)
        flat = input.data.reshape(-1)
        for i in range(input.size):
            original = flat[i]
            flat[i] = original + epsilon
            plus = f(input).item()
            flat[i] = original - epsilon
            minus = f(input).item()
            flat[i] = original
            numeric[i] = (plus - minus) / (2.0 * epsilon)
    finally:
        input.requires_grad = was_tracked
        input.grad = saved_grad

    denom = np.maximum(1e-8, np.abs(analytic) + np.abs(numeric))
    return float(np.max(np.abs(analytic - numeric) / denom))

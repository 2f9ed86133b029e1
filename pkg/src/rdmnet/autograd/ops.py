"""
Differentiable primitives.

Each op computes its forward result with numpy, then hands a backward
rule to ``record``; the rule maps the output gradient to one gradient per
input (``None`` for inputs that do not need one). Accumulation order inside
every rule is fixed, so repeated backward passes are bitwise identical.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from rdmnet.autograd.tensor import Array, Tensor, record
from rdmnet.errors import ShapeError
from rdmnet.schemas.inputs import ConvSpec


def _windows(padded: Array, kernel_h: int, kernel_w: int, stride: int, out_h: int, out_w: int) -> Array:
    """View of every sliding window: [N, C, out_h, out_w, kernel_h, kernel_w]."""
    view = sliding_window_view(padded, (kernel_h, kernel_w), axis=(2, 3))
    return view[:, :, : (out_h - 1) * stride + 1 : stride, : (out_w - 1) * stride + 1 : stride]


def conv2d(input: Tensor, weight: Tensor, bias: Tensor | None, spec: ConvSpec) -> Tensor:
    """
    Grouped 2-D cross-correlation.

    Group ``g`` maps input channels ``[g*C_in/G, (g+1)*C_in/G)`` to output
    channels ``[g*C_out/G, (g+1)*C_out/G)``. With ``groups == 1`` this is the
    ordinary dense convolution.

    Args:
        input: [N, C_in, H, W]
        weight: [C_out, C_in/G, kH, kW]
        bias: [C_out] or None
        spec: Convolution geometry

    Returns:
        [N, C_out, H_out, W_out]

    Raises:
        ShapeError: On any shape mismatch or an output dimension below 1.
    """
    if input.ndim != 4:
        raise ShapeError(f"conv2d expects [N, C, H, W] input, got {input.shape}")
    n, channels, height, width = input.shape
    if channels != spec.in_channels:
        raise ShapeError(f"conv2d expects {spec.in_channels} input channels, got {channels}")
    if weight.shape != spec.weight_shape:
        raise ShapeError(f"conv2d weight shape {weight.shape} != {spec.weight_shape}")
    if bias is not None and bias.shape != (spec.out_channels,):
        raise ShapeError(f"conv2d bias shape {bias.shape} != ({spec.out_channels},)")
    out_h, out_w = spec.output_size(height, width)

    groups = spec.groups
    cin_g = channels // groups
    cout_g = spec.out_channels // groups
    kh, kw, stride, pad = spec.kernel_h, spec.kernel_w, spec.stride, spec.padding
    k = cin_g * kh * kw
    rows = n * out_h * out_w

    padded = np.pad(input.data, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    cols = (
        _windows(padded, kh, kw, stride, out_h, out_w)
        .reshape(n, groups, cin_g, out_h, out_w, kh, kw)
        .transpose(1, 0, 3, 4, 2, 5, 6)
        .reshape(groups, rows, k)
    )
    wmat = weight.data.reshape(groups, cout_g, k).transpose(0, 2, 1)
    out = np.matmul(cols, wmat)
    out = out.reshape(groups, n, out_h, out_w, cout_g).transpose(1, 0, 4, 2, 3)
    out = out.reshape(n, spec.out_channels, out_h, out_w)
    if bias is not None:
        out = out + bias.data[None, :, None, None]

    def backward(grad: Array) -> Sequence[Array | None]:
        grad_rows = (
            grad.reshape(n, groups, cout_g, out_h, out_w)
            .transpose(1, 0, 3, 4, 2)
            .reshape(groups, rows, cout_g)
        )
        grad_input = None
        if input.requires_grad:
            grad_cols = np.matmul(grad_rows, wmat.transpose(0, 2, 1))
            grad_cols = (
                grad_cols.reshape(groups, n, out_h, out_w, cin_g, kh, kw)
                .transpose(1, 0, 4, 2, 3, 5, 6)
                .reshape(n, channels, out_h, out_w, kh, kw)
            )
            grad_padded = np.zeros_like(padded)
            span_h = (out_h - 1) * stride + 1
            span_w = (out_w - 1) * stride + 1
            for i in range(kh):
                for j in range(kw):
                    grad_padded[:, :, i : i + span_h : stride, j : j + span_w : stride] += grad_cols[
                        ..., i, j
                    ]
            grad_input = grad_padded[:, :, pad : pad + height, pad : pad + width]
        grad_weight = None
        if weight.requires_grad:
            grad_weight = (
                np.matmul(cols.transpose(0, 2, 1), grad_rows)
                .transpose(0, 2, 1)
                .reshape(spec.weight_shape)
            )
        grad_bias = None
        if bias is not None and bias.requires_grad:
            grad_bias = grad.sum(axis=(0, 2, 3))
        return grad_input, grad_weight, grad_bias

    inputs = (input, weight) if bias is None else (input, weight, bias)
    if bias is None:
        return record("conv2d", inputs, out, lambda g: backward(g)[:2])
    return record("conv2d", inputs, out, backward)


def relu(input: Tensor) -> Tensor:
    """Elementwise max(x, 0); the derivative at exactly 0 is 0."""
    mask = input.data > 0
    out = np.where(mask, input.data, 0).astype(input.dtype, copy=False)
    return record("relu", (input,), out, lambda grad: (grad * mask,))


def avg_pool2d(input: Tensor, kernel: int, stride: int) -> Tensor:
    """
    Mean over ``kernel`` x ``kernel`` windows, no padding, partial windows dropped.

    Raises:
        ShapeError: If kernel or stride is below 1 or the input is smaller than the kernel.
    """
    if kernel < 1 or stride < 1:
        raise ShapeError(f"avg_pool2d kernel and stride must be >= 1, got {kernel}, {stride}")
    if input.ndim != 4:
        raise ShapeError(f"avg_pool2d expects [N, C, H, W] input, got {input.shape}")
    n, channels, height, width = input.shape
    if height < kernel or width < kernel:
        raise ShapeError(f"avg_pool2d kernel {kernel} larger than input {height}x{width}")
    out_h = (height - kernel) // stride + 1
    out_w = (width - kernel) // stride + 1
    out = _windows(input.data, kernel, kernel, stride, out_h, out_w).mean(axis=(-2, -1))
    out = out.astype(input.dtype, copy=False)
    scale = 1.0 / (kernel * kernel)

    def backward(grad: Array) -> Sequence[Array | None]:
        grad_input = np.zeros_like(input.data)
        share = grad * scale
        span_h = (out_h - 1) * stride + 1
        span_w = (out_w - 1) * stride + 1
        for i in range(kernel):
            for j in range(kernel):
                grad_input[:, :, i : i + span_h : stride, j : j + span_w : stride] += share
        return (grad_input,)

    return record("avg_pool2d", (input,), out, backward)


def linear(input: Tensor, weight: Tensor, bias: Tensor | None) -> Tensor:
    """
    ``input @ weight.T + bias``.

    Args:
        input: [N, F]
        weight: [F_out, F]
        bias: [F_out] or None
    """
    if input.ndim != 2 or weight.ndim != 2:
        raise ShapeError(f"linear expects 2-D input and weight, got {input.shape}, {weight.shape}")
    if input.shape[1] != weight.shape[1]:
        raise ShapeError(f"linear input has {input.shape[1]} features, weight expects {weight.shape[1]}")
    if bias is not None and bias.shape != (weight.shape[0],):
        raise ShapeError(f"linear bias shape {bias.shape} != ({weight.shape[0]},)")
    out = input.data @ weight.data.T
    if bias is not None:
        out = out + bias.data

    def backward(grad: Array) -> Sequence[Array | None]:
        grad_input = grad @ weight.data if input.requires_grad else None
        grad_weight = grad.T @ input.data if weight.requires_grad else None
        grad_bias = grad.sum(axis=0) if bias is not None and bias.requires_grad else None
        return grad_input, grad_weight, grad_bias

    if bias is None:
        return record("linear", (input, weight), out, lambda g: backward(g)[:2])
    return record("linear", (input, weight, bias), out, backward)


def interleave(feat_a: Tensor, feat_b: Tensor, groups: int) -> Tensor:
    """
    Merge two branch feature maps so every one of ``groups`` channel groups
    holds ``C/groups`` channels from each branch.

    With ``k = C/groups`` the output channel order is
    ``A[0:k], B[0:k], A[k:2k], B[k:2k], ...``.

    Raises:
        ShapeError: On differing shapes or when C is not divisible by groups.
    """
    if feat_a.shape != feat_b.shape:
        raise ShapeError(f"interleave needs equal shapes, got {feat_a.shape} and {feat_b.shape}")
    if feat_a.ndim != 4:
        raise ShapeError(f"interleave expects [N, C, H, W] inputs, got {feat_a.shape}")
    if groups < 1 or feat_a.shape[1] % groups:
        raise ShapeError(f"interleave: {feat_a.shape[1]} channels not divisible by {groups} groups")
    n, channels, height, width = feat_a.shape
    per_group = channels // groups
    stacked = np.stack(
        [
            feat_a.data.reshape(n, groups, per_group, height, width),
            feat_b.data.reshape(n, groups, per_group, height, width),
        ],
        axis=2,
    )
    out = stacked.reshape(n, 2 * channels, height, width)

    def backward(grad: Array) -> Sequence[Array | None]:
        split = grad.reshape(n, groups, 2, per_group, height, width)
        return (
            split[:, :, 0].reshape(feat_a.shape),
            split[:, :, 1].reshape(feat_b.shape),
        )

    return record("interleave", (feat_a, feat_b), out, backward)


def concat_channels(feat_a: Tensor, feat_b: Tensor) -> Tensor:
    """Blocked channel concatenation ``[A, B]`` of two equal-shape [N, C, H, W] maps."""
    if feat_a.shape != feat_b.shape or feat_a.ndim != 4:
        raise ShapeError(f"concat_channels needs equal 4-D shapes, got {feat_a.shape}, {feat_b.shape}")
    channels = feat_a.shape[1]
    out = np.concatenate([feat_a.data, feat_b.data], axis=1)
    return record(
        "concat_channels",
        (feat_a, feat_b),
        out,
        lambda grad: (grad[:, :channels], grad[:, channels:]),
    )


def reshape(input: Tensor, shape: tuple[int, ...]) -> Tensor:
    out = input.data.reshape(shape)
    return record("reshape", (input,), out, lambda grad: (grad.reshape(input.shape),))


def flatten(input: Tensor) -> Tensor:
    """[N, ...] -> [N, prod(...)]."""
    return reshape(input, (input.shape[0], -1))


def gather(input: Tensor, indices: Sequence[int] | Array) -> Tensor:
    """Rows ``input[indices]``; the backward pass scatter-adds into repeated rows."""
    index = np.asarray(indices, dtype=np.intp)
    if index.ndim != 1 or index.size == 0:
        raise ShapeError("gather expects a non-empty 1-D index list")
    if index.min() < 0 or index.max() >= input.shape[0]:
        raise ShapeError(f"gather index out of range for {input.shape[0]} rows")
    out = input.data[index]

    def backward(grad: Array) -> Sequence[Array | None]:
        grad_input = np.zeros_like(input.data)
        np.add.at(grad_input, index, grad)
        return (grad_input,)

    return record("gather", (input,), out, backward)


def _same_shape(op: str, a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{op} needs equal shapes, got {a.shape} and {b.shape}")


def add(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("add", a, b)
    return record("add", (a, b), a.data + b.data, lambda grad: (grad, grad))


def sub(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("sub", a, b)
    return record("sub", (a, b), a.data - b.data, lambda grad: (grad, -grad))


def mul(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("mul", a, b)
    return record("mul", (a, b), a.data * b.data, lambda grad: (grad * b.data, grad * a.data))


def sum(input: Tensor, axis: int | None = None) -> Tensor:
    """Sum over all elements (shape ``(1,)``) or over one axis."""
    if axis is None:
        out = input.data.sum().reshape(1)
        return record("sum", (input,), out, lambda grad: (np.broadcast_to(grad.reshape(()), input.shape).copy(),))
    out = input.data.sum(axis=axis)
    return record(
        "sum",
        (input,),
        out,
        lambda grad: (np.broadcast_to(np.expand_dims(grad, axis), input.shape).copy(),),
    )


def mean(input: Tensor, axis: int | None = None) -> Tensor:
    """Mean over all elements (shape ``(1,)``) or over one axis."""
    count = input.size if axis is None else input.shape[axis]
    if axis is None:
        out = input.data.mean().reshape(1).astype(input.dtype, copy=False)
        return record(
            "mean",
            (input,),
            out,
            lambda grad: (np.broadcast_to(grad.reshape(()) / count, input.shape).copy(),),
        )
    out = input.data.mean(axis=axis).astype(input.dtype, copy=False)
    return record(
        "mean",
        (input,),
        out,
        lambda grad: (np.broadcast_to(np.expand_dims(grad, axis) / count, input.shape).copy(),),
    )


def square(input: Tensor) -> Tensor:
    return mul(input, input)


def mean_squared_diff_rows(a: Tensor, b: Tensor) -> Tensor:
    """Per-row mean of ``(a - b)^2`` for [N, F] inputs, returned as [N, 1]."""
    diff = sub(a, b)
    per_row = mean(square(diff), axis=1)
    return reshape(per_row, (a.shape[0], 1))

"""Tensors, differentiable primitives and the recording tape."""

from rdmnet.autograd import ops
from rdmnet.autograd.gradcheck import grad_check
from rdmnet.autograd.ops import avg_pool2d, concat_channels, conv2d, interleave, linear, relu
from rdmnet.autograd.tensor import DEFAULT_DTYPE, Tape, TapeEntry, Tensor, current_tape

__all__ = [
    "DEFAULT_DTYPE",
    "Tape",
    "TapeEntry",
    "Tensor",
    "avg_pool2d",
    "concat_channels",
    "conv2d",
    "current_tape",
    "grad_check",
    "interleave",
    "linear",
    "ops",
    "relu",
]

"""Siamese model: spec instantiation, forward passes and layer freezing."""

from rdmnet.model.siamese import (
    LayerParams,
    SiameseModel,
    body_forward,
    build_model,
    forward_indexed,
    forward_pair,
    head_forward,
    set_frozen,
)

__all__ = [
    "LayerParams",
    "SiameseModel",
    "body_forward",
    "build_model",
    "forward_indexed",
    "forward_pair",
    "head_forward",
    "set_frozen",
]

"""
Siamese RDM predictor.

Both images of a pair run through one shared body; the two feature maps
are merged channel-wise (interleaved per group by default), passed through
a grouped convolution, ReLU and average pool, flattened, and reduced to a
single predicted dissimilarity by a linear layer.
"""

from __future__ import annotations

import copy
import logging
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np

from rdmnet.autograd import ops
from rdmnet.autograd.tensor import DEFAULT_DTYPE, Array, Tensor
from rdmnet.errors import ConfigError, ShapeError
from rdmnet.schemas.inputs import AvgPoolLayer, ConvLayer, ModelSpec
from rdmnet.schemas.outputs import WeightImportReport

logger = logging.getLogger(__name__)

GROUP_CONV_ID = "head.group_conv"
LINEAR_ID = "head.linear"
INTERLEAVE_ID = "head.interleave"


@dataclass
class LayerParams:
    weight: Tensor
    bias: Tensor


class SiameseModel:
    """
    Instantiated parameters for a ``ModelSpec``.

    ``params`` maps a layer id (``body.conv0``, ``head.group_conv``,
    ``head.linear``) to its weight and bias. There is one body parameter
    set; both branches read it.
    """

    def __init__(self, spec: ModelSpec, params: dict[str, LayerParams]):
        self.spec = spec
        self.params = params
        self.frozen: set[str] = set()

    @property
    def dtype(self) -> np.dtype[Any]:
        return next(iter(self.params.values())).weight.dtype

    @property
    def body_layer_ids(self) -> list[str]:
        return [layer_id for layer_id in self.params if layer_id.startswith("body.")]

    def named_parameters(self) -> list[tuple[str, Tensor]]:
        """``(name, tensor)`` for every parameter, sorted by name."""
        named = []
        for layer_id, layer in self.params.items():
            named.append((f"{layer_id}.weight", layer.weight))
            named.append((f"{layer_id}.bias", layer.bias))
        return sorted(named, key=lambda item: item[0])

    def frozen_parameter_names(self) -> set[str]:
        return {f"{layer_id}.{part}" for layer_id in self.frozen for part in ("weight", "bias")}

    def state_dict(self) -> dict[str, Array]:
        return {name: tensor.data.copy() for name, tensor in self.named_parameters()}

    def load_state(self, named: Mapping[str, Array]) -> WeightImportReport:
        """
        Copy matching tensors into the model.

        Names the model does not have, or shapes that differ, are errors.
        Parameters absent from ``named`` keep their current values and are
        listed in the report.

        Raises:
            ShapeError: On an unknown name or a shape mismatch.
        """
        params = dict(self.named_parameters())
        for name, array in named.items():
            if name not in params:
                raise ShapeError(f"weight {name!r} does not exist in this model", layer_id=name)
            if tuple(array.shape) != params[name].shape:
                raise ShapeError(
                    f"weight shape {tuple(array.shape)} != model shape {params[name].shape}",
                    layer_id=name,
                )
        for name, array in named.items():
            target = params[name]
            target.data = np.array(array, dtype=target.dtype)
        return WeightImportReport(
            loaded=sorted(named),
            kept_initial=sorted(set(params) - set(named)),
        )

    def clone(self) -> SiameseModel:
        """Independent copy of parameters and frozen set."""
        return copy.deepcopy(self)


def _init_layer(
    weight_shape: tuple[int, ...], fan_in: int, bias_size: int, seed: int, index: int, dtype: Any
) -> LayerParams:
    rng = np.random.default_rng([seed, index])
    bound = np.sqrt(6.0 / fan_in)
    weight = rng.uniform(-bound, bound, size=weight_shape).astype(dtype)
    return LayerParams(
        weight=Tensor(weight, requires_grad=True),
        bias=Tensor(np.zeros(bias_size, dtype=dtype), requires_grad=True),
    )


def build_model(
    spec: ModelSpec,
    seed: int = 0,
    weights: Mapping[str, Array] | None = None,
    dtype: Any = DEFAULT_DTYPE,
) -> SiameseModel:
    """
    Instantiate a model from its spec.

    Every parameterized layer ``k`` (body convolutions first, then the head)
    draws its weight from uniform(-b, b) with b = sqrt(6 / fan_in) using the
    generator ``default_rng([seed, k])``; biases start at 0. ``weights``, if
    given, then overwrites the named parameters it contains, so importing a
    body leaves the head at its random init.

    Raises:
        ShapeError: If the ModelSpec shape chain is inconsistent or an imported
            tensor does not fit.
    """
    spec.shape_chain()
    params: dict[str, LayerParams] = {}
    index = 0
    for layer_id, layer in zip(spec.layer_ids, spec.body, strict=True):
        if isinstance(layer, ConvLayer):
            params[layer_id] = _init_layer(
                layer.weight_shape, layer.fan_in, layer.out_channels, seed, index, dtype
            )
            index += 1
    head = spec.head
    if spec.head_kind == "group_conv" and head.group_conv is not None:
        conv = head.group_conv
        params[GROUP_CONV_ID] = _init_layer(
            conv.weight_shape, conv.fan_in, conv.out_channels, seed, index, dtype
        )
        index += 1
    params[LINEAR_ID] = _init_layer(
        (head.linear_out, head.linear_in), head.linear_in, head.linear_out, seed, index, dtype
    )

    model = SiameseModel(spec, params)
    if weights is not None:
        report = model.load_state(weights)
        if report.partial:
            logger.info(
                f"imported {len(report.loaded)} tensors, "
                f"{len(report.kept_initial)} left at random init: {', '.join(report.kept_initial)}"
            )
        else:
            logger.info(f"imported all {len(report.loaded)} tensors")
    return model


def set_frozen(model: SiameseModel, layer_ids: Iterable[str], frozen: bool) -> None:
    """
    Freeze or unfreeze parameterized layers.

    Frozen layers still run forward and pass gradients through to earlier
    trainable layers; their own parameters stop requiring gradients and the
    optimizer skips them.

    Raises:
        ConfigError: For an id that names no parameterized layer.
    """
    ids = list(layer_ids)
    unknown = [layer_id for layer_id in ids if layer_id not in model.params]
    if unknown:
        raise ConfigError(
            f"unknown layer ids {unknown}; parameterized layers are {sorted(model.params)}"
        )
    for layer_id in ids:
        layer = model.params[layer_id]
        layer.weight.requires_grad = not frozen
        layer.bias.requires_grad = not frozen
        if frozen:
            model.frozen.add(layer_id)
        else:
            model.frozen.discard(layer_id)


def _as_batch(model: SiameseModel, images: Tensor) -> Tensor:
    expected = model.spec.input_shape
    if images.shape == expected:
        images = Tensor(images.data.reshape(1, *expected))
    if images.ndim != 4 or images.shape[1:] != expected:
        raise ShapeError(
            f"images of shape {images.shape} do not match input shape {expected}", layer_id="input"
        )
    return images


def body_forward(model: SiameseModel, images: Tensor) -> Tensor:
    """Run the shared body on [N, C, H, W] images."""
    x = _as_batch(model, images)
    for layer_id, layer in zip(model.spec.layer_ids, model.spec.body, strict=True):
        try:
            if isinstance(layer, ConvLayer):
                params = model.params[layer_id]
                x = ops.conv2d(x, params.weight, params.bias, layer)
            elif isinstance(layer, AvgPoolLayer):
                x = ops.avg_pool2d(x, layer.kernel, layer.stride)
            else:
                x = ops.relu(x)
        except ShapeError as exc:
            if exc.layer_id is not None:
                raise
            raise ShapeError(str(exc), layer_id=layer_id) from exc
    return x


def head_forward(model: SiameseModel, feat_a: Tensor, feat_b: Tensor) -> Tensor:
    """Merge two branch feature maps and reduce them to predictions of shape [N]."""
    spec = model.spec
    head = spec.head
    linear = model.params[LINEAR_ID]
    n = feat_a.shape[0]

    if spec.head_kind == "distance":
        distance = ops.mean_squared_diff_rows(ops.flatten(feat_a), ops.flatten(feat_b))
        out = ops.linear(distance, linear.weight, linear.bias)
        return ops.reshape(out, (n,))

    try:
        if spec.channel_layout == "interleaved":
            merged = ops.interleave(feat_a, feat_b, spec.interleave_groups)
        else:
            merged = ops.concat_channels(feat_a, feat_b)
    except ShapeError as exc:
        raise ShapeError(str(exc), layer_id=INTERLEAVE_ID) from exc
    if head.group_conv is None or head.pool is None:
        raise ShapeError("group_conv head needs group_conv and pool sections", layer_id="head")
    conv = model.params[GROUP_CONV_ID]
    try:
        x = ops.conv2d(merged, conv.weight, conv.bias, head.group_conv)
    except ShapeError as exc:
        raise ShapeError(str(exc), layer_id=GROUP_CONV_ID) from exc
    x = ops.relu(x)
    x = ops.avg_pool2d(x, head.pool.kernel, head.pool.stride)
    x = ops.flatten(x)
    try:
        out = ops.linear(x, linear.weight, linear.bias)
    except ShapeError as exc:
        raise ShapeError(str(exc), layer_id=LINEAR_ID) from exc
    return ops.reshape(out, (n,))


def forward_pair(model: SiameseModel, img_a: Tensor, img_b: Tensor) -> Tensor:
    """
    Predicted dissimilarity for each row of an image-pair batch.

    Args:
        model: The Siamese model
        img_a: [N, C, H, W] or a single [C, H, W] image
        img_b: Same shape as ``img_a``

    Returns:
        Tensor of shape [N]
    """
    batch_a = _as_batch(model, img_a)
    batch_b = _as_batch(model, img_b)
    if batch_a.shape != batch_b.shape:
        raise ShapeError(f"pair batches differ: {batch_a.shape} vs {batch_b.shape}", layer_id="input")
    return head_forward(model, body_forward(model, batch_a), body_forward(model, batch_b))


def forward_indexed(
    model: SiameseModel,
    images: Tensor,
    index_a: Sequence[int] | Array,
    index_b: Sequence[int] | Array,
) -> Tensor:
    """
    Predictions for pairs ``(images[index_a[r]], images[index_b[r]])``.

    Each distinct image runs through the body once; its features are then
    gathered for whichever branches use it, so a shared parameter's gradient
    still sums the contributions of both branches.
    """
    a = np.asarray(index_a, dtype=np.intp)
    b = np.asarray(index_b, dtype=np.intp)
    if a.shape != b.shape or a.ndim != 1 or a.size == 0:
        raise ShapeError("index_a and index_b must be equal-length non-empty 1-D sequences")
    unique = np.unique(np.concatenate([a, b]))
    if unique[0] < 0 or unique[-1] >= images.shape[0]:
        raise ShapeError(f"pair index out of range for {images.shape[0]} images")
    features = body_forward(model, Tensor(images.data[unique]))
    feat_a = ops.gather(features, np.searchsorted(unique, a))
    feat_b = ops.gather(features, np.searchsorted(unique, b))
    return head_forward(model, feat_a, feat_b)

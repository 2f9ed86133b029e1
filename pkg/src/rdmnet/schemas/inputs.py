"""Input schemas: model specifications, training and run configuration."""

from __future__ import annotations

from pathlib import Path
from typing import Annotated, Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from rdmnet.errors import MissingInputError, ShapeError


class ConvSpec(BaseModel):
    """Geometry of a (possibly grouped) 2-D convolution."""

    model_config = ConfigDict(frozen=True)

    in_channels: int = Field(..., ge=1)
    out_channels: int = Field(..., ge=1)
    kernel_h: int = Field(default=3, ge=1)
    kernel_w: int = Field(default=3, ge=1)
    stride: int = Field(default=1, ge=1)
    padding: int = Field(default=0, ge=0)
    groups: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def check_groups(self) -> ConvSpec:
        """Channel counts must split evenly into groups."""
        if self.in_channels % self.groups or self.out_channels % self.groups:
            raise ValueError(
                f"in_channels ({self.in_channels}) and out_channels ({self.out_channels}) "
                f"must both be divisible by groups ({self.groups})"
            )
        return self

    @property
    def weight_shape(self) -> tuple[int, int, int, int]:
        return (self.out_channels, self.in_channels // self.groups, self.kernel_h, self.kernel_w)

    @property
    def fan_in(self) -> int:
        return (self.in_channels // self.groups) * self.kernel_h * self.kernel_w

    def output_size(self, height: int, width: int) -> tuple[int, int]:
        """Spatial output size for an input of ``height`` x ``width``."""
        out_h = (height + 2 * self.padding - self.kernel_h) // self.stride + 1
        out_w = (width + 2 * self.padding - self.kernel_w) // self.stride + 1
        if out_h < 1 or out_w < 1:
            raise ShapeError(
                f"convolution output would be {out_h}x{out_w} for input {height}x{width}"
            )
        return out_h, out_w


class PoolSpec(BaseModel):
    """Average-pool window (no padding, partial windows dropped)."""

    model_config = ConfigDict(frozen=True)

    kernel: int = Field(..., ge=1)
    stride: int = Field(..., ge=1)

    def output_size(self, height: int, width: int) -> tuple[int, int]:
        if height < self.kernel or width < self.kernel:
            raise ShapeError(f"pool kernel {self.kernel} larger than input {height}x{width}")
        return (height - self.kernel) // self.stride + 1, (width - self.kernel) // self.stride + 1


class ConvLayer(ConvSpec):
    kind: Literal["conv"] = "conv"


class ReluLayer(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["relu"] = "relu"


class AvgPoolLayer(PoolSpec):
    kind: Literal["avg_pool"] = "avg_pool"


BodyLayer = Annotated[ConvLayer | ReluLayer | AvgPoolLayer, Field(discriminator="kind")]


class HeadSpec(BaseModel):
    """Head that turns the two branch feature maps into one scalar."""

    model_config = ConfigDict(frozen=True)

    group_conv: ConvSpec | None = None
    pool: PoolSpec | None = None
    linear_in: int = Field(..., ge=1)
    linear_out: int = Field(default=1, ge=1)


def body_layer_ids(body: list[ConvLayer | ReluLayer | AvgPoolLayer]) -> list[str]:
    """Stable ids ``body.conv0``, ``body.relu0``, ``body.avg_pool0``... in layer order."""
    counts: dict[str, int] = {}
    ids = []
    for layer in body:
        index = counts.get(layer.kind, 0)
        counts[layer.kind] = index + 1
        ids.append(f"body.{layer.kind}{index}")
    return ids


class ModelSpec(BaseModel):
    """
    Declarative Siamese model: shared body, channel merge, head.

    Local field constraints are checked on construction; the cross-layer
    shape chain is checked by ``shape_chain()`` (called by ``build_model``
    and by ``RunConfig`` validation).
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    input_shape: tuple[int, int, int] = (3, 32, 32)
    body: list[BodyLayer]
    head: HeadSpec
    interleave_groups: int = Field(default=16, ge=1)
    head_kind: Literal["group_conv", "distance"] = "group_conv"
    channel_layout: Literal["interleaved", "blocked"] = "interleaved"

    @field_validator("input_shape")
    @classmethod
    def positive_input(cls, v: tuple[int, int, int]) -> tuple[int, int, int]:
        if min(v) < 1:
            raise ValueError(f"input_shape dimensions must be >= 1, got {v}")
        return v

    @property
    def layer_ids(self) -> list[str]:
        return body_layer_ids(self.body)

    def body_chain(self) -> list[tuple[str, tuple[int, int, int]]]:
        """Per-branch ``(layer_id, (C, H, W))`` after every body layer."""
        chain: list[tuple[str, tuple[int, int, int]]] = []
        channels, height, width = self.input_shape
        for layer_id, layer in zip(self.layer_ids, self.body, strict=True):
            try:
                if isinstance(layer, ConvLayer):
                    if layer.in_channels != channels:
                        raise ShapeError(
                            f"expects {layer.in_channels} input channels, previous layer gives {channels}"
                        )
                    height, width = layer.output_size(height, width)
                    channels = layer.out_channels
                elif isinstance(layer, AvgPoolLayer):
                    height, width = layer.output_size(height, width)
            except ShapeError as exc:
                raise ShapeError(str(exc), layer_id=layer_id) from exc
            chain.append((layer_id, (channels, height, width)))
        return chain

    def body_output_shape(self) -> tuple[int, int, int]:
        """Per-branch feature map shape (C, H, W) after the body."""
        chain = self.body_chain()
        return chain[-1][1] if chain else self.input_shape

    def shape_chain(self) -> list[tuple[str, tuple[int, ...]]]:
        """
        Walk the full per-sample shape chain and check every cross-layer invariant.

        Returns:
            ``(layer_id, output_shape)`` pairs, body first, then head.

        Raises:
            ShapeError: Naming the first layer whose input does not fit.
        """
        chain: list[tuple[str, tuple[int, ...]]] = [("input", self.input_shape)]
        chain.extend(self.body_chain())
        channels, height, width = self.body_output_shape()

        head = self.head
        if head.linear_out != 1:
            raise ShapeError(f"linear_out must be 1, got {head.linear_out}", layer_id="head.linear")

        if self.head_kind == "distance":
            if head.linear_in != 1:
                raise ShapeError(
                    f"distance head feeds one feature, linear_in is {head.linear_in}",
                    layer_id="head.linear",
                )
            chain.append(("head.distance", (1,)))
            chain.append(("head.linear", (1,)))
            return chain

        if head.group_conv is None or head.pool is None:
            raise ShapeError("group_conv head needs group_conv and pool sections", layer_id="head")

        merged = 2 * channels
        if self.channel_layout == "interleaved":
            if channels % self.interleave_groups:
                raise ShapeError(
                    f"branch channels ({channels}) not divisible by interleave_groups "
                    f"({self.interleave_groups})",
                    layer_id="head.interleave",
                )
            chain.append(("head.interleave", (merged, height, width)))
        else:
            chain.append(("head.concat", (merged, height, width)))

        conv = head.group_conv
        if conv.in_channels != merged:
            raise ShapeError(
                f"expects {conv.in_channels} input channels, body gives 2 x {channels} = {merged}",
                layer_id="head.group_conv",
            )
        try:
            height, width = conv.output_size(height, width)
        except ShapeError as exc:
            raise ShapeError(str(exc), layer_id="head.group_conv") from exc
        chain.append(("head.group_conv", (conv.out_channels, height, width)))
        chain.append(("head.relu", (conv.out_channels, height, width)))
        try:
            height, width = head.pool.output_size(height, width)
        except ShapeError as exc:
            raise ShapeError(str(exc), layer_id="head.pool") from exc
        chain.append(("head.pool", (conv.out_channels, height, width)))

        flat = conv.out_channels * height * width
        chain.append(("head.flatten", (flat,)))
        if head.linear_in != flat:
            raise ShapeError(
                f"linear_in is {head.linear_in} but the pooled head gives "
                f"{conv.out_channels} x {height} x {width} = {flat}",
                layer_id="head.linear",
            )
        chain.append(("head.linear", (head.linear_out,)))
        return chain

    @classmethod
    def desk(cls) -> ModelSpec:
        """3x32x32 input, 3-conv body to 256x4x4, 16-group head, 128-input linear layer."""
        return cls(
            input_shape=(3, 32, 32),
            body=[
                ConvLayer(in_channels=3, out_channels=32, stride=2, padding=1),
                ReluLayer(),
                ConvLayer(in_channels=32, out_channels=64, stride=2, padding=1),
                ReluLayer(),
                ConvLayer(in_channels=64, out_channels=256, stride=2, padding=1),
            ],
            head=HeadSpec(
                group_conv=ConvSpec(in_channels=512, out_channels=32, padding=1, groups=16),
                pool=PoolSpec(kernel=2, stride=2),
                linear_in=128,
            ),
            interleave_groups=16,
        )

    @classmethod
    def full_scale(cls) -> ModelSpec:
        """AlexNet-shaped body at 3x224x224 (average pools in place of max pools)."""
        return cls(
            input_shape=(3, 224, 224),
            body=[
                ConvLayer(in_channels=3, out_channels=64, kernel_h=11, kernel_w=11, stride=4, padding=2),
                ReluLayer(),
                AvgPoolLayer(kernel=3, stride=2),
                ConvLayer(in_channels=64, out_channels=192, kernel_h=5, kernel_w=5, padding=2),
                ReluLayer(),
                AvgPoolLayer(kernel=3, stride=2),
                ConvLayer(in_channels=192, out_channels=384, padding=1),
                ReluLayer(),
                ConvLayer(in_channels=384, out_channels=256, padding=1),
                ReluLayer(),
                ConvLayer(in_channels=256, out_channels=256, padding=1),
                ReluLayer(),
                AvgPoolLayer(kernel=3, stride=2),
            ],
            head=HeadSpec(
                group_conv=ConvSpec(in_channels=512, out_channels=32, padding=1, groups=16),
                pool=PoolSpec(kernel=3, stride=3),
                linear_in=128,
            ),
            interleave_groups=16,
        )


MODEL_PRESETS = {
    "desk": ModelSpec.desk,
    "full": ModelSpec.full_scale,
}


class ConstantSchedule(BaseModel):
    """Use ``TrainConfig.lr`` for every iteration."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["constant"] = "constant"


class CyclicSchedule(BaseModel):
    """Cyclical learning rate between ``base_lr`` and ``max_lr``."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["triangular", "triangular2", "exp_range"] = "triangular"
    base_lr: float = Field(..., gt=0)
    max_lr: float = Field(..., gt=0)
    step_size: int = Field(..., ge=1)
    gamma: float = Field(default=1.0, gt=0, le=1)

    @model_validator(mode="after")
    def check_bounds(self) -> CyclicSchedule:
        if self.base_lr > self.max_lr:
            raise ValueError(f"base_lr ({self.base_lr}) must not exceed max_lr ({self.max_lr})")
        return self


Schedule = Annotated[ConstantSchedule | CyclicSchedule, Field(discriminator="kind")]


class TrainConfig(BaseModel):
    """Optimizer, schedule and staging for one training run."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    lr: float = Field(default=0.01, gt=0)
    momentum: float = Field(default=0.9, ge=0, lt=1)
    batch_size: int = Field(default=32, ge=1)
    epochs_frozen: int = Field(default=15, ge=0)
    epochs_unfrozen: int = Field(default=200, ge=0)
    schedule: Schedule = Field(default_factory=ConstantSchedule)
    seed: int = Field(default=0, ge=0, lt=2**64)
    shuffle: bool = True
    both_orders: bool = True
    auto_lr: bool = Field(
        default=False,
        description="Run the LR range test first and train at its suggested rate",
    )


class LrFindConfig(BaseModel):
    """LR range test sweep."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    lr_min: float = Field(default=1e-6, gt=0)
    lr_max: float = Field(default=1.0, gt=0)
    steps: int = Field(default=100, ge=2)
    smoothing_beta: float = Field(default=0.98, ge=0, lt=1)
    divergence_factor: float = Field(default=4.0, gt=1)
    skip_start: int = Field(default=10, ge=0, description="Leading points never suggested")
    skip_end: int = Field(default=5, ge=0, description="Trailing points never suggested")

    @model_validator(mode="after")
    def check_range(self) -> LrFindConfig:
        if self.lr_min >= self.lr_max:
            raise ValueError(f"lr_min ({self.lr_min}) must be below lr_max ({self.lr_max})")
        return self


class PathsConfig(BaseModel):
    """Input and output locations of a run."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    images_dir: Path | None = None
    subject_rdms: list[Path] = Field(default_factory=list)
    weights_in: Path | None = None
    out_dir: Path = Path("runs/latest")


class RunConfig(BaseModel):
    """Full run configuration as read from a TOML file plus overrides."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    model: ModelSpec = Field(default_factory=ModelSpec.desk)
    train: TrainConfig = Field(default_factory=TrainConfig)
    lr_find: LrFindConfig = Field(default_factory=LrFindConfig)
    paths: PathsConfig = Field(default_factory=PathsConfig)

    @field_validator("model", mode="before")
    @classmethod
    def expand_preset(cls, v: Any) -> Any:
        """``preset = "desk"`` expands to the preset; other keys in the section override it."""
        if isinstance(v, dict) and "preset" in v:
            fields = dict(v)
            name = fields.pop("preset")
            if name not in MODEL_PRESETS:
                raise ValueError(f"unknown model preset {name!r}, use one of {sorted(MODEL_PRESETS)}")
            base = MODEL_PRESETS[name]().model_dump()
            base.update(fields)
            return base
        return v

    @model_validator(mode="after")
    def check_model_shapes(self) -> RunConfig:
        """Spec invariants are checked before any compute."""
        self.model.shape_chain()
        return self

    def check_inputs(self, need_images: bool = True, need_rdms: bool = True) -> None:
        """
        Verify that the configured input paths exist.

        Raises:
            MissingInputError: For the first missing path.
        """
        paths = self.paths
        if need_images:
            if paths.images_dir is None:
                raise MissingInputError("paths.images_dir is not set")
            if not paths.images_dir.is_dir():
                raise MissingInputError(f"images directory not found: {paths.images_dir}")
        if need_rdms:
            if not paths.subject_rdms:
                raise MissingInputError("paths.subject_rdms is empty")
            for rdm_path in paths.subject_rdms:
                if not rdm_path.is_file():
                    raise MissingInputError(f"RDM file not found: {rdm_path}")
        if paths.weights_in is not None and not paths.weights_in.is_file():
            raise MissingInputError(f"weights file not found: {paths.weights_in}")

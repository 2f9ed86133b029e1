"""Pydantic schemas for rdmnet."""

from rdmnet.schemas.inputs import (
    MODEL_PRESETS,
    AvgPoolLayer,
    ConstantSchedule,
    ConvLayer,
    ConvSpec,
    CyclicSchedule,
    HeadSpec,
    LrFindConfig,
    ModelSpec,
    PathsConfig,
    PoolSpec,
    ReluLayer,
    RunConfig,
    TrainConfig,
)
from rdmnet.schemas.outputs import (
    BaselineFit,
    EpochRecord,
    EvalReport,
    LrFindResult,
    NoiseCeiling,
    Stage,
    TrainHistory,
    WeightImportReport,
)

__all__ = [
    # Inputs
    "MODEL_PRESETS",
    "AvgPoolLayer",
    "ConstantSchedule",
    "ConvLayer",
    "ConvSpec",
    "CyclicSchedule",
    "HeadSpec",
    "LrFindConfig",
    "ModelSpec",
    "PathsConfig",
    "PoolSpec",
    "ReluLayer",
    "RunConfig",
    "TrainConfig",
    # Outputs
    "BaselineFit",
    "EpochRecord",
    "EvalReport",
    "LrFindResult",
    "NoiseCeiling",
    "Stage",
    "TrainHistory",
    "WeightImportReport",
]

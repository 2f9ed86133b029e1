"""Output schemas: LR sweeps, training histories and evaluation reports."""

from __future__ import annotations

import math
from enum import Enum

from pydantic import BaseModel, Field, model_validator


class Stage(str, Enum):
    """Training stage of an epoch."""

    FROZEN = "frozen"
    UNFROZEN = "unfrozen"


class LrFindResult(BaseModel):
    """Recorded part of an LR range test."""

    lrs: list[float] = Field(..., min_length=1)
    smoothed_losses: list[float] = Field(..., min_length=1)
    suggested_lr: float
    aborted_early: bool = Field(default=False, description="Sweep stopped on divergence")

    @model_validator(mode="after")
    def check_curve(self) -> LrFindResult:
        if len(self.lrs) != len(self.smoothed_losses):
            raise ValueError("lrs and smoothed_losses must have equal lengths")
        if any(b <= a for a, b in zip(self.lrs, self.lrs[1:], strict=False)):
            raise ValueError("lrs must be strictly increasing")
        if not min(self.lrs) <= self.suggested_lr <= max(self.lrs):
            raise ValueError(f"suggested_lr {self.suggested_lr} outside the swept range")
        return self


class EpochRecord(BaseModel):
    """One completed epoch."""

    epoch: int = Field(..., ge=0)
    stage: Stage
    lr: float = Field(..., description="Mean learning rate applied during the epoch")
    mean_loss: float
    seconds: float = Field(..., ge=0)


class TrainHistory(BaseModel):
    """Per-epoch records of a run, in order."""

    records: list[EpochRecord] = Field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def losses(self) -> list[float]:
        return [r.mean_loss for r in self.records]

    def stage_records(self, stage: Stage) -> list[EpochRecord]:
        return [r for r in self.records if r.stage == stage]


class NoiseCeiling(BaseModel):
    """Lower (leave-one-out) and upper (including self) noise-ceiling bounds."""

    lower: float = Field(..., ge=-1.0, le=1.0)
    upper: float = Field(..., ge=-1.0, le=1.0)


class BaselineFit(BaseModel):
    """Least-squares combination of layer RDMs fitted to a target."""

    weights: list[float] = Field(..., min_length=1)
    intercept: float
    spearman_r: float = Field(..., ge=-1.0, le=1.0)


class EvalReport(BaseModel):
    """Model-vs-target comparison for one target RDM."""

    target_name: str
    spearman_r: float = Field(..., ge=-1.0, le=1.0)
    noise_ceiling_lower: float | None = None
    noise_ceiling_upper: float | None = None
    explained_variance_pct: float | None = None

    @property
    def sign_collapsed(self) -> bool:
        """True when a negative correlation was squared into a positive percentage."""
        return self.explained_variance_pct is not None and self.spearman_r < 0

    @model_validator(mode="after")
    def check_explained_variance(self) -> EvalReport:
        ceiling = self.noise_ceiling_lower
        if ceiling is not None and ceiling > 0:
            expected = 100.0 * (self.spearman_r / ceiling) ** 2
            if self.explained_variance_pct is None or not math.isclose(
                self.explained_variance_pct, expected, rel_tol=1e-9, abs_tol=1e-12
            ):
                raise ValueError(
                    f"explained_variance_pct must be 100 * (r / ceiling)^2 = {expected}"
                )
        return self


class WeightImportReport(BaseModel):
    """What a weight import filled in and what it left at initialization."""

    loaded: list[str] = Field(default_factory=list)
    kept_initial: list[str] = Field(default_factory=list)

    @property
    def partial(self) -> bool:
        return bool(self.kept_initial)

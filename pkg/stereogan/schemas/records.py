"""Pydantic records emitted by training and evaluation."""
import math
import statistics
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field, field_validator


class StepRecord(BaseModel):
    """One optimization step, serialized as a line of the metrics log."""

    step: int = Field(..., ge=0)
    phase: int = Field(..., ge=1, le=2)
    kind: Literal["mono", "stereo"]
    losses: Dict[str, float]
    seconds: float = Field(..., ge=0)
    samples: List[str] = Field(default_factory=list)

    @field_validator("losses")
    @classmethod
    def _finite(cls, value: Dict[str, float]) -> Dict[str, float]:
        bad = {k: v for k, v in value.items() if not math.isfinite(v)}
        if bad:
            raise ValueError(f"non-finite loss terms: {bad}")
        return value


class FrameConsistency(BaseModel):
    """Warp error of one translated stereo frame."""

    frame: str
    error: Optional[float] = Field(default=None, ge=0)
    valid_fraction: float = Field(..., ge=0, le=1)
    reliable: bool
    source: Literal["ground_truth", "block_matching"]


class ConsistencyReport(BaseModel):
    """Per-frame warp errors and their aggregate over reliable frames."""

    frames: List[FrameConsistency]
    mean: Optional[float] = None
    median: Optional[float] = None
    std: Optional[float] = None
    valid_fraction: float = Field(default=0.0, ge=0, le=1)
    unreliable: int = Field(default=0, ge=0)

    @classmethod
    def from_frames(cls, frames: List[FrameConsistency]) -> "ConsistencyReport":
        errors = [f.error for f in frames if f.reliable and f.error is not None]
        fractions = [f.valid_fraction for f in frames]
        return cls(
            frames=frames,
            mean=statistics.fmean(errors) if errors else None,
            median=statistics.median(errors) if errors else None,
            std=statistics.pstdev(errors) if errors else None,
            valid_fraction=statistics.fmean(fractions) if fractions else 0.0,
            unreliable=sum(1 for f in frames if not f.reliable),
        )


class ComparisonRow(BaseModel):
    """Errors of two models on one frame under one condition seed."""

    seed: int
    frame: str
    error_a: Optional[float] = None
    error_b: Optional[float] = None
    outcome: Literal["win", "tie", "loss", "unreliable"]
    reliable: bool


class ComparisonSummary(BaseModel):
    """Aggregate of a two-model comparison; outcomes are from model A's side."""

    model_a: str
    model_b: str
    seeds: List[int]
    frames: int
    rows: int
    per_seed_mean_a: Dict[int, Optional[float]]
    per_seed_mean_b: Dict[int, Optional[float]]
    median_a: Optional[float] = None
    median_b: Optional[float] = None
    wins: int = 0
    ties: int = 0
    losses: int = 0
    unreliable: int = 0
    tie_tolerance: float


class ComparisonTable(BaseModel):
    """Row-level table plus its summary."""

    rows: List[ComparisonRow]
    summary: ComparisonSummary

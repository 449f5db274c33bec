"""Pydantic schemas for run configuration.

Defaults are the full-scale training recipe; an empty config file runs it.
"""
from enum import Enum
from pathlib import Path
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class TrainingMode(str, Enum):
    """Training / inference mode."""

    MONO = "mono"
    STEREO = "stereo"
    BASELINE = "baseline"


class UpsampleMode(str, Enum):
    """Generator upsampling stage."""

    TRANSPOSE = "transpose"
    RESIZE = "resize"


class AdversarialForm(str, Enum):
    """Adversarial loss form."""

    LSGAN = "lsgan"
    BCE = "bce"


class ReconstructionCondition(str, Enum):
    """Condition used for the right-eye reconstruction x''_r."""

    CHAINED = "chained"
    RANDOM = "random"


class _Section(BaseModel):
    """Base for config sections: unknown keys are errors."""

    model_config = ConfigDict(extra="forbid", frozen=True)


class GeneratorSpec(_Section):
    """Two-input conditional ResNet generator."""

    input_channels: int = Field(default=6, ge=1)
    output_channels: int = Field(default=3, ge=1)
    residual_blocks: int = Field(default=7, ge=1)
    base_filters: int = Field(default=64, ge=1)
    conditional: bool = True
    upsample: UpsampleMode = UpsampleMode.TRANSPOSE

    @model_validator(mode="after")
    def _check_channels(self) -> "GeneratorSpec":
        factor = 2 if self.conditional else 1
        if self.input_channels != factor * self.output_channels:
            raise ValueError(
                f"input_channels must be {factor} x output_channels "
                f"(got {self.input_channels} and {self.output_channels})"
            )
        return self

    @property
    def condition_channels(self) -> int:
        return self.input_channels - self.output_channels

    def unconditional(self) -> "GeneratorSpec":
        """Same architecture taking a single content image (CycleGAN baseline)."""
        return self.model_copy(
            update={"input_channels": self.output_channels, "conditional": False}
        )


class DiscriminatorSpec(_Section):
    """Full-image discriminator."""

    input_channels: int = Field(default=3, ge=1)
    base_filters: int = Field(default=64, ge=1)
    reduce_to_scalar: bool = True


class LossWeights(_Section):
    """Loss weighting."""

    lambda_cycle: float = Field(default=20.0, gt=0)
    d_slowdown: float = Field(default=0.5, gt=0, le=1)
    adversarial: AdversarialForm = AdversarialForm.LSGAN
    lambda_identity: float = Field(default=0.0, ge=0)


class AugmentConfig(_Section):
    """Random crop, rescale, flip and intensity re-scaling."""

    crop_height: int = Field(default=256, gt=0)
    crop_width: int = Field(default=512, gt=0)
    flip_probability: float = Field(default=0.5, ge=0, le=1)
    intensity_jitter: Tuple[float, float] = (0.8, 1.2)

    @field_validator("crop_height", "crop_width")
    @classmethod
    def _divisible_by_four(cls, value: int) -> int:
        if value % 4:
            raise ValueError(f"crop dimension {value} is not divisible by 4")
        return value

    @field_validator("intensity_jitter")
    @classmethod
    def _positive_range(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        low, high = value
        if low <= 0 or high < low:
            raise ValueError(f"intensity_jitter must satisfy 0 < low <= high, got {value}")
        return value


class TrainingConfig(_Section):
    """Optimization recipe."""

    lambda_cycle: float = Field(default=20.0, gt=0)
    lr: float = Field(default=0.0001, gt=0)
    lr_schedule: Literal["constant"] = "constant"
    batch_size: int = Field(default=1, ge=1, le=1)
    epochs_mono: int = Field(default=40, ge=0)
    epochs_stereo: int = Field(default=40, ge=0)
    buffer_capacity: int = Field(default=50, ge=1)
    mode: TrainingMode = TrainingMode.STEREO
    seed: int = 0
    adam_beta1: float = Field(default=0.5, ge=0, lt=1)
    adam_beta2: float = Field(default=0.999, ge=0, lt=1)
    reconstruction_condition: ReconstructionCondition = ReconstructionCondition.CHAINED
    checkpoint_every: int = Field(default=0, ge=0)
    log_every: int = Field(default=50, ge=1)


class SynthConfig(_Section):
    """Synthetic two-domain stereo benchmark."""

    count: int = Field(default=20, ge=1)
    height: int = Field(default=64, gt=0)
    width: int = Field(default=128, gt=0)
    max_disparity: int = Field(default=6, ge=0)
    max_objects: int = Field(default=4, ge=0)
    mono_count: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _check_geometry(self) -> "SynthConfig":
        if self.height % 4 or self.width % 4:
            raise ValueError(f"size {self.height}x{self.width} is not divisible by 4")
        if self.max_disparity >= self.width / 8:
            raise ValueError(
                f"max_disparity {self.max_disparity} must be < width/8 "
                f"({self.width / 8:g})"
            )
        return self


class EvalConfig(_Section):
    """Disparity estimation and comparison settings."""

    block: int = Field(default=9, ge=3)
    max_disparity: int = Field(default=12, ge=0)
    min_variance: float = Field(default=1e-4, ge=0)
    max_sad: float = Field(default=0.25, gt=0)
    min_valid_fraction: float = Field(default=0.05, ge=0, le=1)
    tie_tolerance: float = Field(default=0.02, ge=0)
    seeds: List[int] = Field(default_factory=lambda: [0, 1, 2], min_length=1)
    write_grids: bool = False

    @field_validator("block")
    @classmethod
    def _odd_block(cls, value: int) -> int:
        if value % 2 == 0:
            raise ValueError(f"block size {value} must be odd")
        return value


class DataPaths(_Section):
    """Dataset locations."""

    root: Path = Path("data")
    mono_root: Optional[Path] = None


class RunConfig(_Section):
    """Complete, validated configuration of one invocation."""

    training: TrainingConfig = Field(default_factory=TrainingConfig)
    augment: AugmentConfig = Field(default_factory=AugmentConfig)
    losses: LossWeights = Field(default_factory=LossWeights)
    generator: GeneratorSpec = Field(default_factory=GeneratorSpec)
    discriminator: DiscriminatorSpec = Field(default_factory=DiscriminatorSpec)
    synth: SynthConfig = Field(default_factory=SynthConfig)
    eval: EvalConfig = Field(default_factory=EvalConfig)
    data: DataPaths = Field(default_factory=DataPaths)
    output_dir: Path = Path("runs/default")

    @model_validator(mode="after")
    def _check_consistency(self) -> "RunConfig":
        if self.training.lambda_cycle != self.losses.lambda_cycle:
            raise ValueError(
                "training.lambda_cycle and losses.lambda_cycle disagree "
                f"({self.training.lambda_cycle} vs {self.losses.lambda_cycle})"
            )
        if self.eval.max_disparity >= self.augment.crop_width / 4:
            raise ValueError(
                f"eval.max_disparity {self.eval.max_disparity} must be < crop_width/4"
            )
        return self

    def generator_spec(self) -> GeneratorSpec:
        """Generator spec for the configured training mode."""
        if self.training.mode == TrainingMode.BASELINE:
            return self.generator.unconditional()
        return self.generator

"""
State and trace types for the adaptive differential detector.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np

from .demod_models import DemodConfig
from .errors import ConfigurationError


# Detector defaults; `psfft-bench calibrate` re-tunes them for a channel.
DEFAULT_STEP_SIZE = 0.05
DEFAULT_ERROR_THRESHOLD = 1.0
DEFAULT_GRADIENT_THRESHOLD = 100.0


class DetectorMode(Enum):
    """Where the decision symbol comes from."""
    TRAINING = "training"
    DECISION_DIRECTED = "decision-directed"


class GradientDenominator(Enum):
    """How the gradient divides by x_{k-1}."""
    COMPLEX = "complex"      # (x_{k-1})^2
    MAGNITUDE = "magnitude"  # |x_{k-1}|^2


@dataclass(frozen=True, eq=False)
class CombinerState:
    """Weights and settings carried from block to block within a frame."""
    w_temp: np.ndarray
    step_size: float = DEFAULT_STEP_SIZE
    error_threshold: float = DEFAULT_ERROR_THRESHOLD
    gradient_threshold: float = DEFAULT_GRADIENT_THRESHOLD
    flag: int = 1
    pilots_remaining: int = 0
    denominator: GradientDenominator = GradientDenominator.COMPLEX
    blocks_done: int = 0

    def __post_init__(self) -> None:
        if self.flag not in (1, -1):
            raise ValueError(f"traversal flag must be +1 or -1, got {self.flag}")
        weights = np.array(self.w_temp, dtype=np.complex128)
        weights.setflags(write=False)
        object.__setattr__(self, "w_temp", weights)

    @property
    def mode(self) -> DetectorMode:
        if self.pilots_remaining > 0:
            return DetectorMode.TRAINING
        return DetectorMode.DECISION_DIRECTED

    @property
    def branch_count(self) -> int:
        return int(self.w_temp.size)

    @classmethod
    def initial(
        cls,
        demod: DemodConfig,
        step_size: float = DEFAULT_STEP_SIZE,
        error_threshold: float = DEFAULT_ERROR_THRESHOLD,
        gradient_threshold: float = DEFAULT_GRADIENT_THRESHOLD,
        pilot_count: int = 0,
        denominator: GradientDenominator = GradientDenominator.COMPLEX,
    ) -> "CombinerState":
        """Start from the single-FFT equivalent: 1 on every (a, l=0) slot."""
        weights = np.zeros(demod.branch_count, dtype=np.complex128)
        weights[demod.reference_slots()] = 1.0
        return cls(
            w_temp=weights,
            step_size=step_size,
            error_threshold=error_threshold,
            gradient_threshold=gradient_threshold,
            pilots_remaining=pilot_count,
            denominator=denominator,
        )


@dataclass
class DetectionRecord:
    """One detection event: carrier k detected against its predecessor."""
    block: int
    k: int
    x: complex
    b_hat: complex
    b_tilde: complex
    error_sq: float
    updated: bool
    training: bool
    degenerate: bool = False
    weights: Optional[np.ndarray] = None


@dataclass
class DetectionTrace:
    """Detection events of one or more blocks, in traversal order."""
    records: List[DetectionRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def extend(self, other: "DetectionTrace") -> None:
        self.records.extend(other.records)

    def blocks(self) -> List[int]:
        return sorted({record.block for record in self.records})

    def for_block(self, block: int) -> "DetectionTrace":
        return DetectionTrace([r for r in self.records if r.block == block])

    def decision_directed(self) -> List[DetectionRecord]:
        return [record for record in self.records if not record.training]

    @property
    def update_count(self) -> int:
        return sum(1 for record in self.records if record.updated)


# Pilots per frame in the benchmark setup.
DEFAULT_PILOT_COUNT = 250


@dataclass(frozen=True)
class DetectorSettings:
    """Detector hyperparameters as they appear in the config file."""
    step_size: float = DEFAULT_STEP_SIZE
    error_threshold: float = DEFAULT_ERROR_THRESHOLD
    gradient_threshold: float = DEFAULT_GRADIENT_THRESHOLD
    pilot_count: int = DEFAULT_PILOT_COUNT
    denominator: GradientDenominator = GradientDenominator.COMPLEX

    def __post_init__(self) -> None:
        if self.step_size < 0:
            raise ConfigurationError(f"step size must be non-negative, got {self.step_size}")
        if self.error_threshold <= 0 or self.gradient_threshold <= 0:
            raise ConfigurationError("detector thresholds must be positive")
        if self.pilot_count < 0:
            raise ConfigurationError(f"pilot count must be non-negative, got {self.pilot_count}")

    def initial_state(self, demod: DemodConfig, adapt: bool = True) -> CombinerState:
        """Fresh state for one frame; adapt=False freezes the weights (mu = 0)."""
        return CombinerState.initial(
            demod,
            step_size=self.step_size if adapt else 0.0,
            error_threshold=self.error_threshold,
            gradient_threshold=self.gradient_threshold,
            pilot_count=self.pilot_count,
            denominator=self.denominator,
        )

"""
Demodulator bank configuration and output tensor.
"""

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import ConfigurationError

# (intervals A, half_grid L) for each benchmark method.
METHOD_LAYOUTS: Dict[str, Tuple[int, int]] = {
    "single": (1, 0),
    "pfft": (3, 0),
    "ffft": (1, 1),
    "psfft": (3, 1),
}


@dataclass(frozen=True)
class DemodConfig:
    """A intervals times 2L+1 frequencies; L=0 is P-FFT, A=1 is F-FFT."""
    intervals: int = 1
    half_grid: int = 0
    fe_hz: float = 0.0

    def __post_init__(self) -> None:
        if self.intervals < 1:
            raise ConfigurationError(f"intervals must be >= 1, got {self.intervals}")
        if self.half_grid < 0:
            raise ConfigurationError(f"half_grid must be >= 0, got {self.half_grid}")
        if self.half_grid > 0 and self.fe_hz <= 0:
            raise ConfigurationError("a frequency grid (L > 0) needs f_e > 0")

    @property
    def grid_size(self) -> int:
        return 2 * self.half_grid + 1

    @property
    def branch_count(self) -> int:
        """Length of the stacked vector z_k."""
        return self.intervals * self.grid_size

    @property
    def grid_offsets(self) -> np.ndarray:
        """l/(L+1)*f_e for l = -L..L."""
        l = np.arange(-self.half_grid, self.half_grid + 1)
        return l / (self.half_grid + 1) * self.fe_hz

    def reference_slots(self) -> np.ndarray:
        """Stacked positions of the (a, l=0) outputs."""
        return np.arange(self.intervals) * self.grid_size + self.half_grid

    @classmethod
    def for_method(
        cls,
        method: str,
        fe_hz: float,
        intervals: Optional[int] = None,
        half_grid: Optional[int] = None,
    ) -> "DemodConfig":
        """Layout of a named method.

        `intervals` only resizes methods that split the block and `half_grid`
        only methods that use a frequency grid; single stays single.
        """
        if method not in METHOD_LAYOUTS:
            raise ConfigurationError(f"unknown method {method!r}")
        base_intervals, base_half_grid = METHOD_LAYOUTS[method]
        if intervals is not None and base_intervals > 1:
            base_intervals = intervals
        if half_grid is not None and base_half_grid > 0:
            base_half_grid = half_grid
        return cls(intervals=base_intervals, half_grid=base_half_grid,
                   fe_hz=fe_hz if base_half_grid else 0.0)


@dataclass(frozen=True, eq=False)
class DemodBankOutput:
    """z[k][a][l] with l stored at index l + L."""
    tensor: np.ndarray
    config: DemodConfig

    def __post_init__(self) -> None:
        expected = (self.config.intervals, self.config.grid_size)
        if self.tensor.ndim != 3 or self.tensor.shape[1:] != expected:
            raise ConfigurationError(
                f"tensor shape {self.tensor.shape} does not match (K, A, 2L+1) = "
                f"(K, {expected[0]}, {expected[1]})"
            )

    @property
    def carriers(self) -> int:
        return int(self.tensor.shape[0])

    def output(self, k: int, a: int, l: int) -> complex:
        return complex(self.tensor[k, a, l + self.config.half_grid])

    @property
    def stacked(self) -> np.ndarray:
        """K x A(2L+1): interval-major, l running -L..L inside each interval."""
        return self.tensor.reshape(self.carriers, self.config.branch_count)

    def vector(self, k: int) -> np.ndarray:
        return self.stacked[k]

    def scaled(self, factor: complex) -> "DemodBankOutput":
        return DemodBankOutput(tensor=self.tensor * factor, config=self.config)

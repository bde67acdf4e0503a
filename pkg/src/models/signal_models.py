"""
Shared signal types for the simulation library.
This module contains the PSK alphabet, the OFDM geometry and the sampled
signal container every other module consumes.
"""

import cmath
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import ConfigurationError, DomainError

# Two candidate distances closer than this are treated as a tie.
TIE_TOLERANCE = 1e-12


def constellation_symbol(q: int, order: int) -> complex:
    """Return the PSK symbol exp(i*2*pi*q/Q)."""
    if order < 2:
        raise DomainError(f"PSK order must be at least 2, got {order}")
    if not 0 <= q < order:
        raise DomainError(f"Symbol index {q} out of range for order {order}")
    return cmath.exp(2j * math.pi * q / order)


@dataclass(frozen=True, eq=False)
class PskConstellation:
    """Unit-amplitude Q-ary PSK alphabet ordered by increasing phase."""
    order: int = 4
    symbols: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.order < 2:
            raise DomainError(f"PSK order must be at least 2, got {self.order}")
        points = np.array(
            [constellation_symbol(q, self.order) for q in range(self.order)],
            dtype=np.complex128,
        )
        points.setflags(write=False)
        object.__setattr__(self, "symbols", points)

    @property
    def bits_per_symbol(self) -> int:
        return int(math.log2(self.order))

    def symbol(self, q: int) -> complex:
        return constellation_symbol(q, self.order)

    def nearest_index(self, v: complex) -> int:
        """Index of the closest constellation point, smaller index on ties."""
        if not cmath.isfinite(v):
            raise DomainError(f"Cannot decide on non-finite value {v}")
        distances = np.abs(self.symbols - v)
        candidates = np.flatnonzero(distances <= distances.min() + TIE_TOLERANCE)
        return int(candidates[0])

    def gray_bits(self, q: int) -> int:
        """Gray label of symbol index q."""
        return q ^ (q >> 1)

    def bit_errors(self, q_sent: int, q_decided: int) -> int:
        return bin(self.gray_bits(q_sent) ^ self.gray_bits(q_decided)).count("1")


def nearest_symbol(v: complex, constellation: PskConstellation) -> complex:
    """Map v to the nearest constellation point (the dec(.) operator)."""
    return complex(constellation.symbols[constellation.nearest_index(v)])


@dataclass(frozen=True)
class OfdmConfig:
    """OFDM geometry; all derived quantities follow from B, K and f_s."""
    carriers: int = 1024
    bandwidth_hz: float = 12_000.0
    center_freq_hz: float = 32_000.0
    sampling_rate_hz: float = 192_000.0
    guard_s: float = 0.016
    blocks_per_frame: int = 8
    lowest_freq_hz: Optional[float] = None
    grid_aligned: bool = False

    def __post_init__(self) -> None:
        if self.carriers < 1:
            raise ConfigurationError(f"carriers must be positive, got {self.carriers}")
        if self.bandwidth_hz <= 0 or self.sampling_rate_hz <= 0:
            raise ConfigurationError("bandwidth and sampling rate must be positive")
        ratio = self.sampling_rate_hz / self.bandwidth_hz
        if ratio < 1 or abs(ratio - round(ratio)) > 1e-9:
            raise ConfigurationError(
                f"sampling rate {self.sampling_rate_hz} Hz is not an integer "
                f"multiple of the bandwidth {self.bandwidth_hz} Hz"
            )
        if self.guard_s < 0:
            raise ConfigurationError(f"guard must be non-negative, got {self.guard_s}")
        if self.blocks_per_frame < 1:
            raise ConfigurationError("blocks_per_frame must be at least 1")

    @property
    def carrier_spacing_hz(self) -> float:
        return self.bandwidth_hz / self.carriers

    @property
    def block_duration_s(self) -> float:
        return self.carriers / self.bandwidth_hz

    @property
    def sample_interval_s(self) -> float:
        return 1.0 / self.sampling_rate_hz

    @property
    def oversampling(self) -> int:
        return int(round(self.sampling_rate_hz / self.bandwidth_hz))

    @property
    def samples_per_block(self) -> int:
        return self.carriers * self.oversampling

    @property
    def guard_samples(self) -> int:
        return int(round(self.guard_s * self.sampling_rate_hz))

    @property
    def block_stride(self) -> int:
        """Samples from one block start to the next."""
        return self.samples_per_block + self.guard_samples

    @property
    def frame_samples(self) -> int:
        return self.blocks_per_frame * self.block_stride

    @property
    def first_carrier_hz(self) -> float:
        """f_0 = f_c - B/2 + df/2, the band centred on f_c.

        With `grid_aligned` it moves to the nearest multiple of df: every
        carrier then completes whole cycles within T and the mixing image of a
        real passband block is orthogonal to the carriers even unfiltered.
        """
        if self.lowest_freq_hz is not None:
            return self.lowest_freq_hz
        spacing = self.carrier_spacing_hz
        centred = self.center_freq_hz - self.bandwidth_hz / 2 + spacing / 2
        if not self.grid_aligned:
            return centred
        return math.floor(centred / spacing + 0.5) * spacing

    def carrier_frequency(self, k: int) -> float:
        return self.first_carrier_hz + k * self.carrier_spacing_hz

    def with_carriers(self, carriers: int, frame_symbols: Optional[int] = None) -> "OfdmConfig":
        """Copy with a new K; N follows K*N = frame_symbols when given."""
        blocks = self.blocks_per_frame
        if frame_symbols is not None:
            if frame_symbols % carriers:
                raise ConfigurationError(
                    f"{carriers} carriers do not divide {frame_symbols} frame symbols"
                )
            blocks = frame_symbols // carriers
        return replace(self, carriers=carriers, blocks_per_frame=blocks)


@dataclass(frozen=True, eq=False)
class ComplexBlock:
    """A run of samples at a fixed rate starting at `epoch` seconds."""
    samples: np.ndarray
    rate: float
    epoch: float = 0.0

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples)
        if samples.ndim != 1 or samples.size == 0:
            raise DomainError("a block needs a non-empty one-dimensional sample array")
        if self.rate <= 0:
            raise DomainError(f"sampling rate must be positive, got {self.rate}")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def duration(self) -> float:
        return len(self) / self.rate

    @property
    def is_complex(self) -> bool:
        return bool(np.iscomplexobj(self.samples))

    def with_samples(self, samples: np.ndarray) -> "ComplexBlock":
        return ComplexBlock(samples=samples, rate=self.rate, epoch=self.epoch)

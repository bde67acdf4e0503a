"""
Channel description types: multipath taps and one channel realization.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .errors import ConfigurationError

# Far above the largest residual Doppler the benchmarks use (3e-4).
MAX_DOPPLER_FACTOR = 1e-2

# (delay_ms, gain): direct path and five echoes decaying over 10 ms. The echo
# magnitudes sum to 0.59, so |H(f)| stays above 0.41 across the band.
DEFAULT_TAP_PROFILE: Tuple[Tuple[float, float], ...] = (
    (0.0, 1.0),
    (1.0, -0.3),
    (2.5, 0.15),
    (4.5, -0.08),
    (7.0, 0.04),
    (10.0, -0.02),
)


@dataclass(frozen=True)
class PathTap:
    """One propagation path: gain h_p and delay tau_p in seconds."""
    gain: complex
    delay_s: float

    @property
    def delay_ms(self) -> float:
        return self.delay_s * 1e3


def taps_from_pairs(pairs: Sequence[Sequence[float]]) -> List[PathTap]:
    """Build taps from profile entries: (delay_ms, gain) or (delay_ms, re, im)."""
    taps = []
    for entry in pairs:
        if isinstance(entry, (str, bytes)) or len(entry) not in (2, 3):
            raise ConfigurationError(
                f"tap entry {entry!r} is not (delay_ms, gain) or (delay_ms, re, im)"
            )
        try:
            delay_ms = float(entry[0])
            gain: complex = float(entry[1])
            if len(entry) == 3:
                gain = complex(float(entry[1]), float(entry[2]))
        except (TypeError, ValueError) as e:
            raise ConfigurationError(f"tap entry {entry!r} is not numeric") from e
        taps.append(PathTap(gain=gain, delay_s=delay_ms * 1e-3))
    validate_taps(taps)
    return taps


def validate_taps(taps: Sequence[PathTap]) -> None:
    if not taps:
        raise ConfigurationError("a channel profile needs at least one tap")
    previous = -math.inf
    for tap in taps:
        if tap.delay_s < 0:
            raise ConfigurationError(f"negative tap delay {tap.delay_s} s")
        if tap.delay_s <= previous:
            raise ConfigurationError("tap delays must be strictly increasing")
        previous = tap.delay_s


def default_taps() -> List[PathTap]:
    return taps_from_pairs(DEFAULT_TAP_PROFILE)


@dataclass(frozen=True)
class ChannelRealization:
    """Everything the channel applies to one frame."""
    taps: List[PathTap] = field(default_factory=default_taps)
    doppler_factor: float = 0.0
    snr_db: float = math.inf
    noise_seed: Optional[int] = None

    def __post_init__(self) -> None:
        validate_taps(self.taps)
        if not math.isfinite(self.doppler_factor):
            raise ConfigurationError("Doppler factor must be finite")
        if abs(self.doppler_factor) > MAX_DOPPLER_FACTOR:
            raise ConfigurationError(
                f"|alpha| = {abs(self.doppler_factor)} exceeds {MAX_DOPPLER_FACTOR}"
            )

    @property
    def max_delay_s(self) -> float:
        return self.taps[-1].delay_s

    @property
    def noise_enabled(self) -> bool:
        return not math.isinf(self.snr_db)

    def tap_pairs(self) -> List[Tuple[float, ...]]:
        """Taps as profile entries; complex gains are written as (delay_ms, re, im)."""
        entries: List[Tuple[float, ...]] = []
        for tap in self.taps:
            gain = complex(tap.gain)
            if gain.imag == 0:
                entries.append((tap.delay_ms, gain.real))
            else:
                entries.append((tap.delay_ms, gain.real, gain.imag))
        return entries

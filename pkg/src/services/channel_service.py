"""
Channel simulation: multipath, Doppler time scaling, AWGN and the receiver's
conversion of the passband frame to per-block baseband segments.
"""

import logging
import math
from functools import lru_cache
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy import signal

from ..models.channel_models import (
    MAX_DOPPLER_FACTOR,
    ChannelRealization,
    PathTap,
    validate_taps,
)
from ..models.errors import ConfigurationError, DomainError, FramingError
from ..models.signal_models import ComplexBlock, OfdmConfig

LOGGER = logging.getLogger(__name__)

# Windowed-sinc resampler: taps on each side of the interpolation point.
SINC_HALF_WIDTH = 32
SINC_KAISER_BETA = 8.6
RESAMPLE_CHUNK = 8192

# Receiver low-pass: transition width relative to B and stopband depth.
LOWPASS_TRANSITION = 0.1
LOWPASS_STOPBAND_DB = 80.0
DEFAULT_CUTOFF_FACTOR = 3.5


def apply_multipath(
    x: ComplexBlock, taps: Sequence[PathTap], guard_s: Optional[float] = None
) -> ComplexBlock:
    """Sum of delayed, scaled copies; the output grows by the largest delay."""
    validate_taps(taps)
    max_delay = taps[-1].delay_s
    # echoes must die out inside the guard; a lone direct path needs none
    if guard_s is not None and max_delay > 0 and max_delay >= guard_s:
        raise ConfigurationError(
            f"largest path delay {max_delay * 1e3:.3f} ms does not fit inside the "
            f"{guard_s * 1e3:.3f} ms guard"
        )
    shifts = [int(round(tap.delay_s * x.rate)) for tap in taps]
    gains = [complex(tap.gain) for tap in taps]
    real_gains = all(g.imag == 0 for g in gains)

    source = x.samples
    if not real_gains and not x.is_complex:
        # phase-rotating a real passband signal goes through its analytic form
        source = signal.hilbert(source)
    dtype = np.float64 if real_gains and not x.is_complex else np.complex128
    out = np.zeros(len(x) + max(shifts), dtype=dtype)
    for shift, gain in zip(shifts, gains):
        out[shift:shift + len(x)] += (gain.real if real_gains else gain) * source
    if dtype is np.complex128 and not x.is_complex:
        out = np.real(out)
    return x.with_samples(out)


def _kaiser(u: np.ndarray, beta: float) -> np.ndarray:
    inside = np.clip(1.0 - u * u, 0.0, None)
    return np.i0(beta * np.sqrt(inside)) / np.i0(beta) * (np.abs(u) <= 1.0)


def resample_at(
    samples: np.ndarray,
    positions: np.ndarray,
    half_width: int = SINC_HALF_WIDTH,
    beta: float = SINC_KAISER_BETA,
) -> np.ndarray:
    """Band-limited (Kaiser-windowed sinc) interpolation at fractional indices."""
    padded = np.concatenate([
        np.zeros(half_width, dtype=samples.dtype),
        samples,
        np.zeros(half_width + 1, dtype=samples.dtype),
    ])
    offsets = np.arange(-half_width + 1, half_width + 1)
    out = np.empty(positions.size, dtype=np.result_type(samples.dtype, np.float64))
    for start in range(0, positions.size, RESAMPLE_CHUNK):
        t = positions[start:start + RESAMPLE_CHUNK]
        base = np.floor(t).astype(int)
        frac = t - base
        distance = frac[:, None] - offsets[None, :]
        kernel = np.sinc(distance) * _kaiser(distance / half_width, beta)
        idx = base[:, None] + offsets[None, :] + half_width
        np.clip(idx, 0, padded.size - 1, out=idx)
        out[start:start + t.size] = np.sum(padded[idx] * kernel, axis=1)
    return out


def apply_doppler(x: ComplexBlock, alpha: float) -> ComplexBlock:
    """Uniform time scaling y(n) = x((1 + alpha) n); a tone at f moves to (1 + alpha) f."""
    if abs(alpha) > MAX_DOPPLER_FACTOR:
        raise ConfigurationError(f"Doppler factor {alpha} outside the supported range")
    if alpha == 0:
        return x
    length = int(math.floor(len(x) / (1.0 + alpha)))
    positions = np.arange(length) * (1.0 + alpha)
    return x.with_samples(resample_at(x.samples, positions))


def signal_power(samples: np.ndarray) -> float:
    """Mean power over the samples that carry signal."""
    active = samples != 0
    if not np.any(active):
        raise DomainError("signal has zero power; SNR is undefined")
    return float(np.mean(np.abs(samples[active]) ** 2))


def add_awgn(
    x: ComplexBlock,
    snr_db: float,
    seed: Union[int, np.random.SeedSequence, None] = None,
    bandwidth_hz: Optional[float] = None,
) -> ComplexBlock:
    """Add white Gaussian noise so the in-band SNR over `bandwidth_hz` is `snr_db`.

    Without a bandwidth the whole Nyquist band counts. snr_db = +inf disables
    the noise.
    """
    if math.isinf(snr_db) and snr_db > 0:
        return x
    power = signal_power(x.samples)
    if bandwidth_hz is not None:
        band = bandwidth_hz
    else:
        band = x.rate if x.is_complex else x.rate / 2
    snr = 10.0 ** (snr_db / 10.0)
    rng = np.random.default_rng(seed)
    if x.is_complex:
        variance = power / snr * x.rate / band
        noise = np.sqrt(variance / 2) * (
            rng.standard_normal(len(x)) + 1j * rng.standard_normal(len(x))
        )
    else:
        variance = power / snr * (x.rate / 2) / band
        noise = np.sqrt(variance) * rng.standard_normal(len(x))
    LOGGER.debug("AWGN: signal power %.4g, noise variance %.4g", power, variance)
    return x.with_samples(x.samples + noise)


@lru_cache(maxsize=16)
def lowpass_taps(rate: float, bandwidth_hz: float, cutoff_factor: float) -> np.ndarray:
    """Odd-length Kaiser FIR: transition 0.1 B wide, 80 dB stopband."""
    nyquist = rate / 2
    numtaps, beta = signal.kaiserord(LOWPASS_STOPBAND_DB,
                                     LOWPASS_TRANSITION * bandwidth_hz / nyquist)
    numtaps |= 1
    taps = signal.firwin(numtaps, cutoff_factor * bandwidth_hz,
                         window=("kaiser", beta), fs=rate)
    taps.setflags(write=False)
    return taps


def to_baseband(
    r: ComplexBlock,
    cfg: OfdmConfig,
    cutoff_factor: float = DEFAULT_CUTOFF_FACTOR,
) -> List[ComplexBlock]:
    """Downshift by f_0, low-pass, drop guards and cut the frame into blocks.

    Frame synchronisation is ideal: block n starts at n*(T + T_g). Each
    segment's phase is referenced to its own block start, and real passband
    input is scaled by 2 so a clean block demodulates to d_k.
    """
    spb, stride = cfg.samples_per_block, cfg.block_stride
    needed = (cfg.blocks_per_frame - 1) * stride + spb
    if len(r) < needed:
        raise FramingError(
            f"{len(r)} samples cannot hold {cfg.blocks_per_frame} blocks ({needed} needed)"
        )
    f0 = cfg.first_carrier_hz
    edge = cutoff_factor * cfg.bandwidth_hz + LOWPASS_TRANSITION * cfg.bandwidth_hz / 2
    if edge >= r.rate / 2 or edge >= 2 * f0:
        raise ConfigurationError(
            f"low-pass edge {edge:.0f} Hz does not separate the band from its image"
        )

    n = np.arange(len(r))
    mixed = r.samples * np.exp(-2j * np.pi * f0 * (r.epoch + n / r.rate))
    taps = lowpass_taps(r.rate, cfg.bandwidth_hz, cutoff_factor)
    delay = (taps.size - 1) // 2
    filtered = signal.oaconvolve(mixed, taps)[delay:delay + len(r)]
    if not r.is_complex:
        filtered *= 2.0

    blocks = []
    for block in range(cfg.blocks_per_frame):
        start = block * stride
        rotation = np.exp(2j * np.pi * f0 * (r.epoch + start / r.rate))
        blocks.append(ComplexBlock(
            samples=filtered[start:start + spb] * rotation,
            rate=r.rate,
            epoch=r.epoch + start / r.rate,
        ))
    return blocks


def _thorp_db_per_km(frequency_hz: float) -> float:
    f = frequency_hz / 1e3
    f2 = f * f
    return 0.11 * f2 / (1 + f2) + 44 * f2 / (4100 + f2) + 2.75e-4 * f2 + 0.003


def _bottom_reflection(grazing: float, speed_ratio: float, density_ratio: float) -> float:
    """Rayleigh coefficient of a fluid half-space; speed_ratio = c_water / c_bottom."""
    sin_g, cos_g = math.sin(grazing), math.cos(grazing)
    root = math.sqrt(max(speed_ratio ** 2 - cos_g ** 2, 0.0))
    return (density_ratio * sin_g - root) / (density_ratio * sin_g + root)


def image_method_profile(
    depth_m: float = 15.0,
    range_m: float = 2000.0,
    source_height_m: float = 7.5,
    receiver_height_m: float = 7.5,
    sound_speed: float = 1500.0,
    bottom_sound_speed: float = 1400.0,
    density_ratio: float = 1.5,
    spreading_factor: float = 1.5,
    frequency_hz: float = 32_000.0,
    max_delay_s: float = 0.010,
    max_taps: int = 6,
    max_order: int = 40,
) -> List[PathTap]:
    """Deterministic isovelocity waveguide arrivals from mirror-image sources.

    Images sit at 2mD + z_s (|m| surface and |m| bottom bounces) and at
    2mD - z_s (one extra surface bounce for m <= 0, one fewer for m >= 1).
    Gains combine l^(-k/2) spreading, Thorp absorption, -1 per surface bounce
    and a Rayleigh bottom coefficient; they are normalised to the strongest
    arrival and delays are relative to the first arrival.
    """
    z_s = depth_m - source_height_m
    z_r = depth_m - receiver_height_m
    absorption = _thorp_db_per_km(frequency_hz)
    arrivals = {}
    for m in range(-max_order, max_order + 1):
        images = [(2 * m * depth_m + z_s, abs(m), abs(m))]
        if m >= 1:
            images.append((2 * m * depth_m - z_s, m - 1, m))
        else:
            images.append((2 * m * depth_m - z_s, abs(m) + 1, abs(m)))
        for z_img, surface, bottom in images:
            vertical = abs(z_r - z_img)
            length = math.hypot(range_m, vertical)
            grazing = math.atan2(vertical, range_m)
            gain = length ** (-spreading_factor / 2)
            gain *= 10 ** (-absorption * length / 1e3 / 20)
            gain *= (-1.0) ** surface
            gain *= _bottom_reflection(
                grazing, sound_speed / bottom_sound_speed, density_ratio
            ) ** bottom
            key = round(length / sound_speed, 7)
            arrivals[key] = arrivals.get(key, 0.0) + gain

    first = min(arrivals)
    usable = [(t - first, g) for t, g in arrivals.items()
              if t - first <= max_delay_s and g != 0.0]
    strongest = sorted(usable, key=lambda item: abs(item[1]), reverse=True)[:max_taps]
    peak = max(abs(g) for _, g in strongest)
    taps = [PathTap(gain=g / peak, delay_s=t) for t, g in sorted(strongest)]
    LOGGER.debug("image-method profile: %s", [(t.delay_ms, t.gain) for t in taps])
    return taps


class ChannelService:
    """Applies one channel realization to passband frames of one geometry."""

    def __init__(self, cfg: OfdmConfig, cutoff_factor: float = DEFAULT_CUTOFF_FACTOR):
        self.cfg = cfg
        self.cutoff_factor = cutoff_factor

    def propagate(self, frame: ComplexBlock, realization: ChannelRealization) -> ComplexBlock:
        """Multipath, then Doppler, then noise."""
        received = apply_multipath(frame, realization.taps, guard_s=self.cfg.guard_s)
        received = apply_doppler(received, realization.doppler_factor)
        return add_awgn(received, realization.snr_db, realization.noise_seed,
                        bandwidth_hz=self.cfg.bandwidth_hz)

    def receive(self, frame: ComplexBlock, realization: ChannelRealization) -> List[ComplexBlock]:
        """Baseband blocks as seen by the demodulator."""
        return to_baseband(self.propagate(frame, realization), self.cfg, self.cutoff_factor)

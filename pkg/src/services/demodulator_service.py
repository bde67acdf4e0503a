"""
Demodulation front-ends: the single FFT and the partial-interval /
fractional-frequency bank (PS-FFT) with P-FFT and F-FFT as special cases.
"""

import logging
from typing import List, Sequence, Tuple

import numpy as np

from ..models.demod_models import DemodBankOutput, DemodConfig
from ..models.errors import ConfigurationError, DomainError, FramingError
from ..models.signal_models import ComplexBlock, OfdmConfig

LOGGER = logging.getLogger(__name__)


def _check_block(v: ComplexBlock, cfg: OfdmConfig) -> None:
    if len(v) != cfg.samples_per_block:
        raise FramingError(
            f"block holds {len(v)} samples, expected {cfg.samples_per_block}"
        )


def window_bounds(n_samples: int, intervals: int) -> List[Tuple[int, int]]:
    """[start, stop) of A contiguous windows; the remainder goes to the earliest."""
    if intervals < 1:
        raise ConfigurationError(f"intervals must be >= 1, got {intervals}")
    if intervals > n_samples:
        raise ConfigurationError(
            f"{intervals} intervals do not fit in {n_samples} samples"
        )
    base, remainder = divmod(n_samples, intervals)
    bounds, start = [], 0
    for a in range(intervals):
        stop = start + base + (1 if a < remainder else 0)
        bounds.append((start, stop))
        start = stop
    return bounds


def partition_windows(v: ComplexBlock, intervals: int) -> List[ComplexBlock]:
    """Split a block into A rectangular, non-overlapping windows."""
    return [
        ComplexBlock(samples=v.samples[start:stop], rate=v.rate,
                     epoch=v.epoch + start / v.rate)
        for start, stop in window_bounds(len(v), intervals)
    ]


def frequency_grid(k: int, spacing_hz: float, half_grid: int, fe_hz: float) -> np.ndarray:
    """f_l = k*df + l/(L+1)*f_e for l = -L..L, ascending."""
    l = np.arange(-half_grid, half_grid + 1)
    return k * spacing_hz + l / (half_grid + 1) * fe_hz


def single_fft_demod(v: ComplexBlock, cfg: OfdmConfig) -> np.ndarray:
    """x_k = (1/T) * sum_n v(n) exp(-i 2 pi k df n T_s) T_s, k = 0..K-1."""
    _check_block(v, cfg)
    return np.fft.fft(v.samples)[: cfg.carriers] / cfg.samples_per_block


def psfft_demod(v: ComplexBlock, cfg: OfdmConfig, demod: DemodConfig) -> DemodBankOutput:
    """Demodulator outputs z[k][a][l] of every window at every grid frequency.

    Each window is zero-padded to the full block and rotated by
    exp(-i 2 pi l/(L+1) f_e t) in block time; bin k of the block-length DFT is
    then the exact Fourier sum at k*df + l/(L+1)*f_e.
    """
    _check_block(v, cfg)
    spb = cfg.samples_per_block
    offsets = demod.grid_offsets
    t = np.arange(spb) / v.rate
    rotations = np.exp(-2j * np.pi * offsets[:, None] * t[None, :])

    branches = np.zeros((demod.intervals, demod.grid_size, spb), dtype=np.complex128)
    for a, (start, stop) in enumerate(window_bounds(spb, demod.intervals)):
        branches[a, :, start:stop] = v.samples[start:stop] * rotations[:, start:stop]
    spectra = np.fft.fft(branches, axis=-1)[..., : cfg.carriers] / spb
    tensor = np.ascontiguousarray(np.transpose(spectra, (2, 0, 1)))
    return DemodBankOutput(tensor=tensor, config=demod)


def combine(z_k: Sequence[complex], w_k: Sequence[complex]) -> complex:
    """x_k = w_k^H z_k."""
    z = np.asarray(z_k, dtype=np.complex128).reshape(-1)
    w = np.asarray(w_k, dtype=np.complex128).reshape(-1)
    if z.size != w.size:
        raise DomainError(f"weight length {w.size} does not match output length {z.size}")
    return complex(np.vdot(w, z))


class DemodulatorService:
    """Runs one demodulator layout over the blocks of a frame."""

    def __init__(self, cfg: OfdmConfig, demod: DemodConfig):
        self.cfg = cfg
        self.demod = demod

    def demodulate(self, blocks: Sequence[ComplexBlock]) -> List[DemodBankOutput]:
        LOGGER.debug("demodulating %d blocks with A=%d, L=%d",
                     len(blocks), self.demod.intervals, self.demod.half_grid)
        return [psfft_demod(block, self.cfg, self.demod) for block in blocks]

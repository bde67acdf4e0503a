"""
Transmitter: differential encoding across carriers, OFDM modulation and
frame assembly with zero guards.
"""

import logging
from typing import Optional, Sequence, Union

import numpy as np

from ..models.errors import DomainError, FramingError
from ..models.frame_models import FramePlan, traversal_events
from ..models.signal_models import ComplexBlock, OfdmConfig, PskConstellation

LOGGER = logging.getLogger(__name__)

UNIT_TOLERANCE = 1e-9


def differential_encode(b: Sequence[complex], a0: complex = 1.0) -> np.ndarray:
    """d_0 = a0, d_k = b_k * d_{k-1}."""
    symbols = np.asarray(b, dtype=np.complex128).reshape(-1)
    if abs(abs(a0) - 1.0) > UNIT_TOLERANCE:
        raise DomainError(f"anchor symbol {a0} is not unit-magnitude")
    if symbols.size and np.max(np.abs(np.abs(symbols) - 1.0)) > UNIT_TOLERANCE:
        raise DomainError("differential encoding needs unit-magnitude PSK symbols")
    encoded = np.empty(symbols.size + 1, dtype=np.complex128)
    encoded[0] = a0
    encoded[1:] = a0 * np.cumprod(symbols)
    return encoded


def differential_encode_indices(indices: np.ndarray, order: int) -> np.ndarray:
    """Index form of differential_encode with a0 = a_0; exact for PSK."""
    indices = np.asarray(indices, dtype=int)
    encoded = np.zeros(indices.shape[:-1] + (indices.shape[-1] + 1,), dtype=int)
    encoded[..., 1:] = np.mod(np.cumsum(indices, axis=-1), order)
    return encoded


def modulate_block(d: Sequence[complex], cfg: OfdmConfig) -> ComplexBlock:
    """Passband samples Re{sum_k d_k exp(i 2 pi f_k n T_s)} over one block."""
    symbols = np.asarray(d, dtype=np.complex128)
    if symbols.size != cfg.carriers:
        raise FramingError(f"expected {cfg.carriers} symbols, got {symbols.size}")
    n_samples = cfg.samples_per_block
    spectrum = np.zeros(n_samples, dtype=np.complex128)
    spectrum[: cfg.carriers] = symbols
    # sum_k d_k exp(i 2 pi k n / n_samples), exact for k < K
    baseband = np.fft.ifft(spectrum) * n_samples
    n = np.arange(n_samples)
    carrier = np.exp(2j * np.pi * cfg.first_carrier_hz * n * cfg.sample_interval_s)
    return ComplexBlock(samples=np.real(carrier * baseband), rate=cfg.sampling_rate_hz)


def build_frame_plan(
    cfg: OfdmConfig,
    constellation: PskConstellation,
    pilot_count: int,
    rng: Union[np.random.Generator, int, None] = None,
) -> FramePlan:
    """Draw uniform data symbols for every block and mark the pilot events."""
    rng = np.random.default_rng(rng)
    shape = (cfg.blocks_per_frame, cfg.carriers - 1)
    data = rng.integers(0, constellation.order, size=shape)
    encoded_idx = differential_encode_indices(data, constellation.order)
    events = traversal_events(cfg.blocks_per_frame, cfg.carriers)
    if pilot_count > len(events):
        LOGGER.warning(
            "pilot budget %d exceeds the %d detection events of a frame",
            pilot_count, len(events),
        )
    positions = tuple(events[:pilot_count])
    return FramePlan(
        data_indices=data,
        symbols=constellation.symbols[data],
        encoded=constellation.symbols[encoded_idx],
        pilot_count=len(positions),
        pilot_positions=positions,
    )


def assemble_frame(plan: FramePlan, cfg: OfdmConfig) -> ComplexBlock:
    """N modulated blocks, each followed by T_g of silence."""
    if plan.carriers != cfg.carriers or plan.blocks_per_frame != cfg.blocks_per_frame:
        raise FramingError(
            f"plan is {plan.blocks_per_frame}x{plan.carriers}, config expects "
            f"{cfg.blocks_per_frame}x{cfg.carriers}"
        )
    frame = np.zeros(cfg.frame_samples, dtype=np.float64)
    for block in range(cfg.blocks_per_frame):
        start = block * cfg.block_stride
        samples = modulate_block(plan.encoded[block], cfg).samples
        frame[start:start + cfg.samples_per_block] = samples
    return ComplexBlock(samples=frame, rate=cfg.sampling_rate_hz)


class TransmitterService:
    """Builds transmit frames for one OFDM geometry."""

    def __init__(self, cfg: OfdmConfig, constellation: Optional[PskConstellation] = None):
        self.cfg = cfg
        self.constellation = constellation or PskConstellation(4)

    def new_frame(self, pilot_count: int, rng: Union[np.random.Generator, int, None] = None):
        """Return (plan, passband frame)."""
        plan = build_frame_plan(self.cfg, self.constellation, pilot_count, rng)
        return plan, assemble_frame(plan, self.cfg)

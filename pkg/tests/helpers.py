"""Small builders shared by several test modules."""

import numpy as np

from src.models.signal_models import ComplexBlock, OfdmConfig
from src.services.transmitter_service import modulate_block


def random_qpsk(rng, size):
    return np.exp(1j * np.pi / 2 * rng.integers(0, 4, size=size))


def passband_frame(cfg: OfdmConfig, d: np.ndarray) -> ComplexBlock:
    """Frame carrying d[n] in block n, silent guards, no differential encoding."""
    frame = np.zeros(cfg.frame_samples)
    for block in range(cfg.blocks_per_frame):
        start = block * cfg.block_stride
        frame[start:start + cfg.samples_per_block] = modulate_block(d[block], cfg).samples
    return ComplexBlock(samples=frame, rate=cfg.sampling_rate_hz)

"""Shared fixtures for the test suite."""

import numpy as np
import pytest

from src.models.channel_models import ChannelRealization, PathTap
from src.models.signal_models import OfdmConfig, PskConstellation


@pytest.fixture
def qpsk():
    return PskConstellation(4)


@pytest.fixture
def small_cfg():
    """K=64 with the benchmark rates: 1024 samples per block, 3072 guard."""
    return OfdmConfig(carriers=64, blocks_per_frame=4)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def ideal_channel():
    """Single unit tap, no Doppler, no noise."""
    return ChannelRealization(taps=[PathTap(gain=1.0, delay_s=0.0)])

"""Tests for constellations, OFDM geometry and sample blocks."""

import cmath
import math

import numpy as np
import pytest

from src.models.errors import ConfigurationError, DomainError
from src.models.signal_models import (
    ComplexBlock,
    OfdmConfig,
    PskConstellation,
    constellation_symbol,
    nearest_symbol,
)


class TestConstellationSymbol:
    def test_examples(self):
        assert constellation_symbol(0, 4) == 1 + 0j
        assert constellation_symbol(1, 4) == pytest.approx(1j, abs=1e-15)
        assert constellation_symbol(2, 8) == pytest.approx(1j, abs=1e-15)

    @pytest.mark.parametrize("q, order", [(-1, 4), (4, 4), (0, 1)])
    def test_out_of_range(self, q, order):
        with pytest.raises(DomainError):
            constellation_symbol(q, order)


class TestPskConstellation:
    @pytest.mark.parametrize("order", [2, 4, 8, 16])
    def test_unit_magnitude_and_phase_order(self, order):
        points = PskConstellation(order).symbols
        np.testing.assert_allclose(np.abs(points), 1.0, atol=1e-12)
        phases = np.mod(np.angle(points), 2 * np.pi)
        assert np.all(np.diff(phases) > 0)
        assert len(set(np.round(points, 9))) == order

    def test_symbols_are_read_only(self, qpsk):
        with pytest.raises(ValueError):
            qpsk.symbols[0] = 2.0

    def test_nearest_symbol(self, qpsk):
        assert nearest_symbol(0.9 + 0.1j, qpsk) == 1 + 0j
        assert nearest_symbol(-0.2 + 1.3j, qpsk) == pytest.approx(1j)
        assert nearest_symbol(cmath.exp(1j * math.pi * 0.99), qpsk) == pytest.approx(-1)

    @pytest.mark.parametrize("order", [2, 4, 8])
    def test_radial_perturbation_keeps_the_decision(self, order, rng):
        constellation = PskConstellation(order)
        bound = math.sin(math.pi / order)
        for q, point in enumerate(constellation.symbols):
            radius = bound * 0.999 * np.sqrt(rng.uniform(size=20))
            angle = rng.uniform(0, 2 * np.pi, size=20)
            for eps in radius * np.exp(1j * angle):
                assert constellation.nearest_index(point * (1 + eps)) == q
                assert nearest_symbol(point * (1 + eps), constellation) == point

    def test_ties_resolve_to_smaller_index(self, qpsk):
        assert qpsk.nearest_index(0.5 + 0.5j) == 0
        assert qpsk.nearest_index(-0.5 + 0.5j) == 1
        assert qpsk.nearest_index(0j) == 0

    def test_non_finite_input_rejected(self, qpsk):
        with pytest.raises(DomainError):
            qpsk.nearest_index(complex(math.nan, 0.0))

    def test_gray_bit_errors(self, qpsk):
        assert qpsk.bits_per_symbol == 2
        assert qpsk.bit_errors(0, 0) == 0
        assert qpsk.bit_errors(0, 1) == 1
        assert qpsk.bit_errors(0, 2) == 2
        assert qpsk.bit_errors(1, 2) == 1


class TestOfdmConfig:
    def test_benchmark_geometry(self):
        cfg = OfdmConfig()
        assert cfg.carrier_spacing_hz == pytest.approx(11.71875)
        assert cfg.carrier_spacing_hz * cfg.block_duration_s == pytest.approx(1.0, abs=1e-12)
        assert cfg.oversampling == 16
        assert cfg.samples_per_block == 16384
        assert cfg.guard_samples == 3072
        assert cfg.frame_samples == 8 * (16384 + 3072)

    def test_first_carrier_centres_the_band(self):
        cfg = OfdmConfig()
        assert cfg.first_carrier_hz == pytest.approx(32_000.0 - 6_000.0 + 11.71875 / 2)
        assert OfdmConfig(carriers=64).first_carrier_hz == pytest.approx(26_093.75)

    def test_grid_aligned_first_carrier(self):
        cfg = OfdmConfig(grid_aligned=True)
        ratio = cfg.first_carrier_hz / cfg.carrier_spacing_hz
        assert ratio == pytest.approx(round(ratio), abs=1e-9)
        assert cfg.first_carrier_hz == pytest.approx(26_003.90625)
        centre = cfg.first_carrier_hz + (cfg.carriers - 1) / 2 * cfg.carrier_spacing_hz
        assert abs(centre - cfg.center_freq_hz) <= cfg.carrier_spacing_hz / 2

    def test_explicit_lowest_frequency(self):
        cfg = OfdmConfig(lowest_freq_hz=26_000.0)
        assert cfg.first_carrier_hz == 26_000.0
        assert cfg.carrier_frequency(2) == pytest.approx(26_000.0 + 2 * 11.71875)

    def test_non_integer_oversampling_rejected(self):
        with pytest.raises(ConfigurationError):
            OfdmConfig(sampling_rate_hz=100_000.0)

    def test_with_carriers_keeps_frame_symbols(self):
        cfg = OfdmConfig().with_carriers(2048, 8192)
        assert (cfg.carriers, cfg.blocks_per_frame) == (2048, 4)
        with pytest.raises(ConfigurationError):
            OfdmConfig().with_carriers(3000, 8192)


class TestComplexBlock:
    def test_rejects_empty_and_bad_rate(self):
        with pytest.raises(DomainError):
            ComplexBlock(samples=np.array([]), rate=1.0)
        with pytest.raises(DomainError):
            ComplexBlock(samples=np.ones(4), rate=0.0)

    def test_duration_and_kind(self):
        block = ComplexBlock(samples=np.ones(48, dtype=complex), rate=48.0, epoch=0.5)
        assert len(block) == 48
        assert block.duration == 1.0
        assert block.is_complex
        assert block.with_samples(np.zeros(3)).epoch == 0.5

"""Tests for the single-FFT and partial-interval / fractional-frequency demodulators."""

import numpy as np
import pytest

from src.models.demod_models import DemodConfig
from src.models.errors import ConfigurationError, DomainError, FramingError
from src.models.signal_models import ComplexBlock
from src.services.demodulator_service import (
    DemodulatorService,
    combine,
    frequency_grid,
    partition_windows,
    psfft_demod,
    single_fft_demod,
    window_bounds,
)


def random_block(rng, cfg):
    n = cfg.samples_per_block
    samples = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return ComplexBlock(samples=samples, rate=cfg.sampling_rate_hz)


def direct_output(v, cfg, demod, k, a, l):
    start, stop = window_bounds(len(v), demod.intervals)[a]
    n = np.arange(start, stop)
    freq = k * cfg.carrier_spacing_hz + l / (demod.half_grid + 1) * demod.fe_hz
    kernel = np.exp(-2j * np.pi * freq * n / v.rate)
    return np.sum(v.samples[start:stop] * kernel) / len(v)


class TestWindows:
    def test_remainder_goes_to_the_earliest(self):
        bounds = window_bounds(16384, 3)
        assert [stop - start for start, stop in bounds] == [5462, 5461, 5461]
        assert bounds[0][0] == 0 and bounds[-1][1] == 16384
        assert all(a[1] == b[0] for a, b in zip(bounds, bounds[1:]))

    def test_even_split(self):
        assert window_bounds(12, 4) == [(0, 3), (3, 6), (6, 9), (9, 12)]

    def test_invalid_counts(self):
        with pytest.raises(ConfigurationError):
            window_bounds(10, 0)
        with pytest.raises(ConfigurationError):
            window_bounds(3, 4)

    def test_windows_cover_the_block(self, rng, small_cfg):
        v = random_block(rng, small_cfg)
        windows = partition_windows(v, 3)
        np.testing.assert_array_equal(np.concatenate([w.samples for w in windows]), v.samples)
        assert windows[1].epoch == pytest.approx(len(windows[0]) / v.rate)


class TestFrequencyGrid:
    def test_three_point_grid(self):
        np.testing.assert_allclose(
            frequency_grid(2, 11.71875, 1, 19.2), [23.4375 - 9.6, 23.4375, 23.4375 + 9.6]
        )

    def test_l_zero_is_the_carrier(self):
        np.testing.assert_allclose(frequency_grid(5, 187.5, 0, 19.2), [937.5])

    def test_offsets_are_symmetric(self):
        offsets = DemodConfig(intervals=1, half_grid=2, fe_hz=30.0).grid_offsets
        np.testing.assert_allclose(offsets, [-20.0, -10.0, 0.0, 10.0, 20.0])


class TestSingleFft:
    def test_pure_carrier(self, small_cfg):
        n = np.arange(small_cfg.samples_per_block)
        k = 17
        v = ComplexBlock(samples=np.exp(2j * np.pi * k * n / small_cfg.samples_per_block),
                         rate=small_cfg.sampling_rate_hz)
        x = single_fft_demod(v, small_cfg)
        assert x[k] == pytest.approx(1.0)
        assert np.max(np.abs(np.delete(x, k))) < 1e-12

    def test_wrong_length(self, small_cfg):
        with pytest.raises(FramingError):
            single_fft_demod(ComplexBlock(samples=np.ones(100), rate=192_000.0), small_cfg)


class TestPsfft:
    def test_single_layout_equals_single_fft(self, rng, small_cfg):
        demod = DemodConfig(intervals=1, half_grid=0)
        for _ in range(100):
            v = random_block(rng, small_cfg)
            bank = psfft_demod(v, small_cfg, demod)
            np.testing.assert_allclose(bank.tensor[:, 0, 0], single_fft_demod(v, small_cfg),
                                       rtol=0, atol=1e-12)

    def test_interval_outputs_add_up(self, rng, small_cfg):
        v = random_block(rng, small_cfg)
        bank = psfft_demod(v, small_cfg, DemodConfig(intervals=3, half_grid=1, fe_hz=19.2))
        full = psfft_demod(v, small_cfg, DemodConfig(intervals=1, half_grid=1, fe_hz=19.2))
        np.testing.assert_allclose(bank.tensor.sum(axis=1), full.tensor[:, 0, :], atol=1e-12)

    def test_matches_direct_sums(self, rng, small_cfg):
        demod = DemodConfig(intervals=3, half_grid=2, fe_hz=40.0)
        v = random_block(rng, small_cfg)
        bank = psfft_demod(v, small_cfg, demod)
        for k in (0, 1, 31, 63):
            for a in range(3):
                for l in range(-2, 3):
                    assert bank.output(k, a, l) == pytest.approx(
                        direct_output(v, small_cfg, demod, k, a, l), abs=1e-10
                    )

    def test_stacking_is_interval_major(self, rng, small_cfg):
        demod = DemodConfig(intervals=3, half_grid=1, fe_hz=19.2)
        bank = psfft_demod(random_block(rng, small_cfg), small_cfg, demod)
        assert bank.stacked.shape == (64, 9)
        for a in range(3):
            for l in range(-1, 2):
                assert bank.vector(5)[a * 3 + l + 1] == bank.output(5, a, l)
        np.testing.assert_array_equal(demod.reference_slots(), [1, 4, 7])

    def test_linear_in_the_input(self, rng, small_cfg):
        demod = DemodConfig(intervals=3, half_grid=1, fe_hz=19.2)
        v1, v2 = random_block(rng, small_cfg), random_block(rng, small_cfg)
        combined = v1.with_samples(v1.samples + 2j * v2.samples)
        np.testing.assert_allclose(
            psfft_demod(combined, small_cfg, demod).tensor,
            psfft_demod(v1, small_cfg, demod).tensor
            + 2j * psfft_demod(v2, small_cfg, demod).tensor,
            atol=1e-12,
        )

    def test_tone_lands_on_its_grid_point(self, small_cfg):
        demod = DemodConfig(intervals=1, half_grid=1, fe_hz=40.0)
        freq = 10 * small_cfg.carrier_spacing_hz + 20.0
        t = np.arange(small_cfg.samples_per_block) / small_cfg.sampling_rate_hz
        v = ComplexBlock(samples=np.exp(2j * np.pi * freq * t), rate=small_cfg.sampling_rate_hz)
        bank = psfft_demod(v, small_cfg, demod)
        magnitudes = np.abs(bank.tensor[10, 0, :])
        assert np.argmax(magnitudes) == 2
        assert magnitudes[2] == pytest.approx(1.0)

    def test_service_runs_every_block(self, rng, small_cfg):
        demod = DemodConfig.for_method("psfft", 19.2)
        blocks = [random_block(rng, small_cfg) for _ in range(3)]
        outputs = DemodulatorService(small_cfg, demod).demodulate(blocks)
        assert len(outputs) == 3
        assert all(o.tensor.shape == (64, 3, 3) for o in outputs)


class TestMethodLayouts:
    @pytest.mark.parametrize("method, layout", [
        ("single", (1, 0)), ("pfft", (3, 0)), ("ffft", (1, 1)), ("psfft", (3, 1)),
    ])
    def test_named_layouts(self, method, layout):
        demod = DemodConfig.for_method(method, 19.2)
        assert (demod.intervals, demod.half_grid) == layout

    def test_overrides_respect_the_method(self):
        assert DemodConfig.for_method("single", 19.2, intervals=5, half_grid=2).branch_count == 1
        assert DemodConfig.for_method("pfft", 19.2, intervals=5, half_grid=2).branch_count == 5
        assert DemodConfig.for_method("psfft", 19.2, intervals=2, half_grid=2).branch_count == 10

    def test_bad_layouts(self):
        with pytest.raises(ConfigurationError):
            DemodConfig.for_method("ofdm", 19.2)
        with pytest.raises(ConfigurationError):
            DemodConfig(intervals=1, half_grid=1, fe_hz=0.0)


class TestCombine:
    def test_conjugates_the_weights(self):
        assert combine([1.0, 1j], [1j, 1.0]) == pytest.approx(-1j + 1j)
        assert combine([2.0, 0.0], [1j, 5.0]) == pytest.approx(-2j)

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            combine([1.0, 2.0], [1.0])

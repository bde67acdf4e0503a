"""Tests for the detector step-size calibration."""

from dataclasses import replace

import pytest

from src.models.detector_models import DetectionRecord, DetectionTrace, DetectorSettings
from src.models.errors import UsageError
from src.models.signal_models import OfdmConfig
from src.models.sweep_models import BenchSettings
from src.viewmodels.calibration_viewmodel import CalibrationViewModel, steady_state_mse


@pytest.fixture
def settings():
    return BenchSettings(
        ofdm=OfdmConfig(carriers=64, blocks_per_frame=4),
        detector=DetectorSettings(pilot_count=40),
    )


def event(block, error_sq, training=False):
    return DetectionRecord(block=block, k=1, x=1.0, b_hat=1.0, b_tilde=1.0,
                           error_sq=error_sq, updated=True, training=training)


class TestSteadyState:
    def test_uses_the_second_half(self):
        trace = DetectionTrace([event(0, 1.0), event(1, 1.0), event(2, 0.1), event(3, 0.3)])
        assert steady_state_mse(trace) == pytest.approx(0.2)

    def test_falls_back_to_every_decision(self):
        trace = DetectionTrace([event(0, 0.4), event(1, 0.2, training=True)])
        assert steady_state_mse(trace) == pytest.approx(0.4)

    def test_pilot_only_trace(self):
        with pytest.raises(UsageError):
            steady_state_mse(DetectionTrace([event(0, 0.1, training=True)]))


class TestCalibration:
    def test_candidate_grid(self, settings):
        grid = CalibrationViewModel(settings).candidates((0.01, 0.1), (0.5, 1.0))
        assert [(c.step_size, c.error_threshold) for c in grid] == [
            (0.01, 0.5), (0.01, 1.0), (0.1, 0.5), (0.1, 1.0),
        ]
        assert all(c.gradient_threshold == 100.0 and c.pilot_count == 40 for c in grid)

    def test_best_candidate_comes_first(self, settings):
        viewmodel = CalibrationViewModel(settings)
        seen = []
        viewmodel.on_candidate_complete = seen.append
        points = viewmodel.calibrate(step_sizes=(0.003, 0.03), trials=1)
        assert len(points) == len(seen) == 2
        assert points[0].steady_mse_db <= points[1].steady_mse_db
        assert {p.detector.step_size for p in points} == {0.003, 0.03}
        assert viewmodel.sweeps.settings == settings

        best = viewmodel.apply_best(points)
        assert best.detector == points[0].detector
        assert best.ofdm == settings.ofdm

    def test_same_seed_same_ranking(self, settings):
        first = CalibrationViewModel(settings).calibrate(step_sizes=(0.01,), trials=1, seed=3)
        second = CalibrationViewModel(settings).calibrate(step_sizes=(0.01,), trials=1, seed=3)
        assert first == second

    def test_errors_reach_the_callback(self, settings):
        viewmodel = CalibrationViewModel(settings)
        messages = []
        viewmodel.on_error = messages.append
        with pytest.raises(UsageError):
            viewmodel.calibrate(step_sizes=(0.01,), method="fft", trials=1)
        assert messages and "fft" in messages[0]

    def test_nothing_to_calibrate(self, settings):
        viewmodel = CalibrationViewModel(settings)
        with pytest.raises(UsageError):
            viewmodel.calibrate(step_sizes=())
        with pytest.raises(UsageError):
            viewmodel.apply_best([])

    def test_layout_overrides_are_honoured(self, settings):
        viewmodel = CalibrationViewModel(replace(settings, intervals=2))
        point = viewmodel.evaluate(DetectorSettings(pilot_count=40), "psfft", 1, 5)
        assert point.steady_mse_db < 0

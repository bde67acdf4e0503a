"""
ViewModel for tuning the detector step size and thresholds.
The search runs the adaptive receiver on a noise-free channel with a small
residual Doppler and keeps the setting with the lowest steady-state MSE.
"""

import itertools
import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence

import numpy as np

from ..models.demod_models import METHOD_LAYOUTS, DemodConfig
from ..models.detector_models import DetectionTrace, DetectorSettings
from ..models.errors import UsageError
from ..models.sweep_models import BenchSettings, default_fe_hz, linear_to_db
from .sweep_viewmodel import SweepViewModel

LOGGER = logging.getLogger(__name__)

CALIBRATION_DOPPLER = 1e-4
DEFAULT_STEP_SIZES = (0.001, 0.003, 0.01, 0.03, 0.05, 0.1)


@dataclass(frozen=True)
class CalibrationPoint:
    detector: DetectorSettings
    steady_mse_db: float


def steady_state_mse(trace: DetectionTrace) -> float:
    """Linear MSE over the decision-directed events of the second half of the frame."""
    blocks = trace.blocks()
    tail = set(blocks[len(blocks) // 2:])
    errors = [r.error_sq for r in trace.decision_directed() if r.block in tail]
    if not errors:
        errors = [r.error_sq for r in trace.decision_directed()]
    if not errors:
        raise UsageError("calibration frame has no decision-directed carriers")
    return float(np.mean(errors))


class CalibrationViewModel:
    """Grid search over mu (and optionally e_th, g_th) for one method."""

    def __init__(self, settings: Optional[BenchSettings] = None, workers: Optional[int] = None):
        self.settings = settings or BenchSettings()
        self.sweeps = SweepViewModel(self.settings, workers)

        self.on_candidate_complete: Optional[Callable[[CalibrationPoint], None]] = None
        self.on_error: Optional[Callable[[str], None]] = None

    def candidates(
        self,
        step_sizes: Sequence[float] = DEFAULT_STEP_SIZES,
        error_thresholds: Optional[Sequence[float]] = None,
        gradient_thresholds: Optional[Sequence[float]] = None,
    ) -> List[DetectorSettings]:
        base = self.settings.detector
        grid = itertools.product(
            step_sizes,
            error_thresholds or (base.error_threshold,),
            gradient_thresholds or (base.gradient_threshold,),
        )
        return [
            replace(base, step_size=mu, error_threshold=e_th, gradient_threshold=g_th)
            for mu, e_th, g_th in grid
        ]

    def evaluate(
        self, detector: DetectorSettings, method: str, trials: int, seed: int
    ) -> CalibrationPoint:
        if method not in METHOD_LAYOUTS:
            raise UsageError(f"unknown method {method!r}; choose from {sorted(METHOD_LAYOUTS)}")
        cfg = self.settings.ofdm
        fe_hz = self.settings.fe_hz or default_fe_hz(CALIBRATION_DOPPLER, cfg.center_freq_hz)
        demod = DemodConfig.for_method(
            method, fe_hz, self.settings.intervals, self.settings.half_grid
        )
        self.sweeps.settings = replace(self.settings, detector=detector)
        tasks = self.sweeps.point_tasks(
            [method], cfg.carriers, cfg.blocks_per_frame, CALIBRATION_DOPPLER,
            math.inf, demod, trials, seed,
        )
        tasks = [replace(task, keep_traces=True) for task in tasks]
        outcomes = self.sweeps.execute(tasks)
        mse = float(np.mean([steady_state_mse(o.traces[method]) for o in outcomes]))
        point = CalibrationPoint(detector=detector, steady_mse_db=linear_to_db(mse))
        LOGGER.info("mu=%g e_th=%g g_th=%g: steady-state MSE %.2f dB",
                    detector.step_size, detector.error_threshold,
                    detector.gradient_threshold, point.steady_mse_db)
        return point

    def calibrate(
        self,
        step_sizes: Sequence[float] = DEFAULT_STEP_SIZES,
        error_thresholds: Optional[Sequence[float]] = None,
        gradient_thresholds: Optional[Sequence[float]] = None,
        method: str = "psfft",
        trials: int = 2,
        seed: Optional[int] = None,
    ) -> List[CalibrationPoint]:
        """Evaluate every candidate; the best (lowest MSE, first on ties) comes first."""
        if not step_sizes:
            raise UsageError("calibration needs at least one step size")
        seed = self.settings.seed if seed is None else seed
        points = []
        try:
            for detector in self.candidates(step_sizes, error_thresholds, gradient_thresholds):
                point = self.evaluate(detector, method, trials, seed)
                points.append(point)
                if self.on_candidate_complete:
                    self.on_candidate_complete(point)
        except Exception as e:
            if self.on_error:
                self.on_error(str(e))
            raise
        finally:
            self.sweeps.settings = self.settings
        order = sorted(range(len(points)), key=lambda i: (points[i].steady_mse_db, i))
        return [points[i] for i in order]

    def apply_best(self, points: Sequence[CalibrationPoint]) -> BenchSettings:
        """Settings with the winning detector parameters."""
        if not points:
            raise UsageError("no calibration results to apply")
        self.settings = replace(self.settings, detector=points[0].detector)
        return self.settings

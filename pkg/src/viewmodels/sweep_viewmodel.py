"""
ViewModel for the Monte-Carlo benchmark sweeps.
This layer turns sweep requests into per-trial tasks, runs them (in a worker
pool when asked) and reports progress through callbacks.
"""

import logging
import multiprocessing
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..models.channel_models import ChannelRealization
from ..models.demod_models import METHOD_LAYOUTS, DemodConfig
from ..models.detector_models import DetectionTrace, DetectorSettings
from ..models.errors import UsageError
from ..models.signal_models import OfdmConfig
from ..models.sweep_models import (
    BASELINE_METHOD,
    DEFAULT_AXIS_VALUES,
    BenchSettings,
    PointSummary,
    SweepAxis,
    SweepRecord,
    SweepResult,
    SweepSpec,
    bandwidth_efficiency,
    default_fe_hz,
    linear_to_db,
)
from ..services.channel_service import ChannelService
from ..services.demodulator_service import DemodulatorService
from ..services.detector_service import DetectorService, bit_error_rate, mse_linear
from ..services.transmitter_service import TransmitterService

LOGGER = logging.getLogger(__name__)

__all__ = [
    "SweepViewModel",
    "TrialTask",
    "TrialOutcome",
    "bandwidth_efficiency",
    "run_trial",
    "trial_seeds",
]


@dataclass(frozen=True)
class TrialTask:
    """One frame through the whole chain, demodulated by every listed layout.

    All layouts of a task share the transmitted frame and the received
    signal, so methods are compared on identical realizations.
    """
    axis_value: float
    trial: int
    master_seed: int
    cfg: OfdmConfig
    channel: ChannelRealization
    layouts: Tuple[Tuple[str, DemodConfig], ...]
    detector: DetectorSettings = field(default_factory=DetectorSettings)
    cutoff_factor: float = 3.5
    keep_traces: bool = False


@dataclass
class TrialOutcome:
    records: List[SweepRecord]
    traces: Dict[str, DetectionTrace] = field(default_factory=dict)


def trial_seeds(master_seed: int, trial: int) -> Tuple[np.random.SeedSequence, int]:
    """(data seed, noise seed) of one trial; independent of everything else."""
    data, noise = np.random.SeedSequence(master_seed, spawn_key=(trial,)).spawn(2)
    return data, int(noise.generate_state(1)[0])


def run_trial(task: TrialTask) -> TrialOutcome:
    """Transmit one frame, pass it through the channel and detect it per layout."""
    data_seed, noise_seed = trial_seeds(task.master_seed, task.trial)
    plan, frame = TransmitterService(task.cfg).new_frame(
        task.detector.pilot_count, np.random.default_rng(data_seed)
    )
    channel = ChannelService(task.cfg, task.cutoff_factor)
    received: Dict[float, list] = {}

    def blocks_at(alpha: float) -> list:
        if alpha not in received:
            realization = replace(
                task.channel, doppler_factor=alpha, noise_seed=noise_seed
            )
            received[alpha] = channel.receive(frame, realization)
        return received[alpha]

    detector = DetectorService()
    outcome = TrialOutcome(records=[])
    for method, demod in task.layouts:
        alpha = 0.0 if method == BASELINE_METHOD else task.channel.doppler_factor
        outputs = DemodulatorService(task.cfg, demod).demodulate(blocks_at(alpha))
        # the conventional receiver only differentiates; it never adapts
        adapt = method not in ("single", BASELINE_METHOD)
        trace, _ = detector.detect_frame(
            outputs, task.detector.initial_state(demod, adapt=adapt), plan
        )
        outcome.records.append(SweepRecord(
            method=method,
            axis_value=task.axis_value,
            trial=task.trial,
            mse_linear=mse_linear(trace),
            ber=bit_error_rate(trace, plan),
            detections=len(trace.decision_directed()),
        ))
        if task.keep_traces:
            outcome.traces[method] = trace
    return outcome


def _check_methods(methods: Sequence[str]) -> None:
    unknown = [m for m in methods if m not in METHOD_LAYOUTS]
    if unknown or not methods:
        raise UsageError(
            f"unknown method(s) {unknown}; choose from {sorted(METHOD_LAYOUTS)}"
        )


class SweepViewModel:
    """ViewModel for running benchmark points and sweeps."""

    def __init__(
        self, settings: Optional[BenchSettings] = None, workers: Optional[int] = None
    ):
        self.settings = settings or BenchSettings()
        self.workers = max(1, workers if workers is not None else self.settings.workers)

        # Event callbacks for the view
        self.on_sweep_started: Optional[Callable[[int], None]] = None
        self.on_trial_complete: Optional[Callable[[int, int], None]] = None
        self.on_point_complete: Optional[Callable[[float, List[SweepRecord]], None]] = None
        self.on_error: Optional[Callable[[str], None]] = None

    def spec_for(self, axis: SweepAxis, values: Optional[Sequence[float]] = None,
                 **overrides) -> SweepSpec:
        """A sweep spec seeded from the settings; keyword overrides win."""
        channel = self.settings.channel
        base = dict(
            axis=axis,
            values=tuple(values) if values is not None else DEFAULT_AXIS_VALUES[axis],
            carriers=self.settings.ofdm.carriers,
            snr_db=channel.snr_db,
            doppler_factor=channel.doppler_factor,
            methods=tuple(self.settings.methods),
            intervals=self.settings.intervals,
            half_grid=self.settings.half_grid,
            fe_hz=self.settings.fe_hz,
            trials=self.settings.trials,
            seed=self.settings.seed,
        )
        base.update({k: v for k, v in overrides.items() if v is not None})
        return SweepSpec(**base)

    def _layouts(self, methods: Sequence[str], fe_hz: float,
                 intervals: Optional[int], half_grid: Optional[int],
                 baseline: bool = False) -> Tuple[Tuple[str, DemodConfig], ...]:
        layouts = [
            (method, DemodConfig.for_method(method, fe_hz, intervals, half_grid))
            for method in methods
        ]
        if baseline:
            layouts.append((BASELINE_METHOD, DemodConfig()))
        return tuple(layouts)

    def tasks_for(self, spec: SweepSpec) -> List[TrialTask]:
        """Every (axis value, trial) task of a sweep."""
        center = self.settings.ofdm.center_freq_hz
        fe_hz = spec.fe_hz or default_fe_hz(spec.max_doppler, center)
        layouts = self._layouts(spec.methods, fe_hz, spec.intervals, spec.half_grid,
                                baseline=spec.with_baseline)
        tasks = []
        for value in spec.values:
            carriers, alpha, snr_db = spec.point_parameters(value)
            cfg = self.settings.ofdm.with_carriers(carriers, spec.frame_symbols)
            channel = replace(self.settings.channel, doppler_factor=alpha, snr_db=snr_db)
            for trial in range(spec.trials):
                tasks.append(TrialTask(
                    axis_value=float(value),
                    trial=trial,
                    master_seed=spec.seed,
                    cfg=cfg,
                    channel=channel,
                    layouts=layouts,
                    detector=self.settings.detector,
                    cutoff_factor=self.settings.cutoff_factor,
                ))
        return tasks

    def _outcomes(self, tasks: List[TrialTask]) -> Iterator[TrialOutcome]:
        if self.workers == 1 or len(tasks) == 1:
            for task in tasks:
                yield run_trial(task)
            return
        LOGGER.info("running %d trials on %d workers", len(tasks), self.workers)
        with multiprocessing.Pool(processes=min(self.workers, len(tasks))) as pool:
            yield from pool.imap_unordered(run_trial, tasks)

    def execute(self, tasks: List[TrialTask]) -> List[TrialOutcome]:
        """Run tasks; completion order is arbitrary, the returned list is not."""
        if self.on_sweep_started:
            self.on_sweep_started(len(tasks))
        trials_per_point: Dict[float, int] = {}
        for task in tasks:
            trials_per_point[task.axis_value] = trials_per_point.get(task.axis_value, 0) + 1

        outcomes: List[TrialOutcome] = []
        pending: Dict[float, List[SweepRecord]] = {}
        try:
            for outcome in self._outcomes(tasks):
                outcomes.append(outcome)
                if self.on_trial_complete:
                    self.on_trial_complete(len(outcomes), len(tasks))
                value = outcome.records[0].axis_value
                pending.setdefault(value, []).extend(outcome.records)
                finished = len({r.trial for r in pending[value]})
                if finished == trials_per_point[value] and self.on_point_complete:
                    self.on_point_complete(value, pending[value])
        except Exception as e:
            LOGGER.error("trial failed: %s", e)
            if self.on_error:
                self.on_error(str(e))
            raise
        outcomes.sort(key=lambda o: (o.records[0].axis_value, o.records[0].trial))
        return outcomes

    def sweep(self, spec: SweepSpec) -> SweepResult:
        LOGGER.info("%s sweep over %s: methods %s, %d trials, seed %d",
                    spec.axis.value, list(spec.values), list(spec.methods),
                    spec.trials, spec.seed)
        result = SweepResult(spec=spec)
        for outcome in self.execute(self.tasks_for(spec)):
            result.add(outcome.records)
        return result

    def _sweep_axis(self, spec: SweepSpec, axis: SweepAxis) -> SweepResult:
        if spec.axis is not axis:
            raise UsageError(f"expected a {axis.value} sweep, got {spec.axis.value}")
        return self.sweep(spec)

    def sweep_doppler(self, spec: SweepSpec) -> SweepResult:
        """MSE against the Doppler factor at fixed K and SNR."""
        return self._sweep_axis(spec, SweepAxis.DOPPLER)

    def sweep_carriers(self, spec: SweepSpec) -> SweepResult:
        """MSE against K with N = K*N/K; adds the alpha = 0 conventional curve."""
        return self._sweep_axis(spec, SweepAxis.CARRIERS)

    def sweep_snr(self, spec: SweepSpec) -> SweepResult:
        """MSE against SNR at fixed K and Doppler."""
        return self._sweep_axis(spec, SweepAxis.SNR)

    def point_tasks(
        self,
        methods: Sequence[str],
        carriers: int,
        blocks: int,
        doppler_factor: float,
        snr_db: float,
        demod: Optional[DemodConfig],
        trials: int,
        seed: int,
        keep_traces: bool = False,
    ) -> List[TrialTask]:
        _check_methods(methods)
        if trials < 1:
            raise UsageError("trials must be at least 1")
        cfg = replace(self.settings.ofdm, carriers=carriers, blocks_per_frame=blocks)
        if demod is not None:
            layouts = tuple((method, demod) for method in methods)
        else:
            fe_hz = self.settings.fe_hz or default_fe_hz(doppler_factor, cfg.center_freq_hz)
            layouts = self._layouts(methods, fe_hz, self.settings.intervals,
                                    self.settings.half_grid)
        channel = replace(
            self.settings.channel, doppler_factor=doppler_factor, snr_db=snr_db
        )
        return [
            TrialTask(
                axis_value=float(doppler_factor),
                trial=trial,
                master_seed=seed,
                cfg=cfg,
                channel=channel,
                layouts=layouts,
                detector=self.settings.detector,
                cutoff_factor=self.settings.cutoff_factor,
                keep_traces=keep_traces and trial == 0,
            )
            for trial in range(trials)
        ]

    def run_point(
        self,
        method: str,
        carriers: int,
        blocks: int,
        doppler_factor: float,
        snr_db: float,
        demod: Optional[DemodConfig] = None,
        trials: int = 8,
        seed: int = 2024,
    ) -> PointSummary:
        """Mean MSE (averaged linearly, reported in dB) and BER of one method.

        With no explicit `demod`, the method's own layout is used.
        """
        outcomes = self.execute(self.point_tasks(
            [method], carriers, blocks, doppler_factor, snr_db, demod, trials, seed
        ))
        return _summarize(method, doppler_factor, outcomes)

    def compare_methods(
        self,
        methods: Sequence[str],
        carriers: int,
        blocks: int,
        doppler_factor: float,
        snr_db: float,
        trials: int = 8,
        seed: int = 2024,
        keep_traces: bool = False,
    ) -> Tuple[List[PointSummary], Dict[str, DetectionTrace]]:
        """run_point for several methods on shared realizations.

        With `keep_traces`, the detection traces of trial 0 come back too.
        """
        outcomes = self.execute(self.point_tasks(
            methods, carriers, blocks, doppler_factor, snr_db, None, trials, seed,
            keep_traces=keep_traces,
        ))
        summaries = [_summarize(m, doppler_factor, outcomes) for m in methods]
        return summaries, outcomes[0].traces


def _summarize(
    method: str, axis_value: float, outcomes: Sequence[TrialOutcome]
) -> PointSummary:
    records = [r for o in outcomes for r in o.records if r.method == method]
    return PointSummary(
        method=method,
        axis_value=float(axis_value),
        mean_mse_db=linear_to_db(float(np.mean([r.mse_linear for r in records]))),
        mean_ber=float(np.mean([r.ber for r in records])),
        trials=len(records),
        detections=sum(r.detections for r in records),
    )

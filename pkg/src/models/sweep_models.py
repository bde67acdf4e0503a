"""
Models for the benchmark sweeps: what to run and what came out.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from .channel_models import ChannelRealization
from .demod_models import METHOD_LAYOUTS
from .detector_models import DetectorSettings
from .errors import UsageError
from .signal_models import OfdmConfig

# K * N for every frame in the benchmarks.
FRAME_SYMBOLS = 2 ** 13

# Report floor for a perfect trace.
MSE_FLOOR_DB = -80.0

# Residual Doppler and SNR of the benchmark scenario.
BENCH_DOPPLER = 3e-4
BENCH_SNR_DB = 30.0

# Label of the alpha = 0 conventional curve added to the carrier sweep.
BASELINE_METHOD = "single_alpha0"

METHOD_ORDER: Tuple[str, ...] = ("single", "pfft", "ffft", "psfft", BASELINE_METHOD)


class SweepAxis(Enum):
    """Quantity varied along a sweep."""
    DOPPLER = "doppler"
    CARRIERS = "carriers"
    SNR = "snr"


DEFAULT_AXIS_VALUES: Dict[SweepAxis, Tuple[float, ...]] = {
    SweepAxis.DOPPLER: (1e-6, 1e-5, 5e-5, 1e-4, 2e-4, 3e-4),
    SweepAxis.CARRIERS: (64, 128, 256, 512, 1024, 2048),
    SweepAxis.SNR: (10.0, 15.0, 20.0, 25.0, 30.0),
}

ALLOWED_CARRIERS = (64, 128, 256, 512, 1024, 2048)


def linear_to_db(value: float) -> float:
    if value <= 0:
        return MSE_FLOOR_DB
    return max(10.0 * math.log10(value), MSE_FLOOR_DB)


def bandwidth_efficiency(
    order: int, guard_s: float, bandwidth_hz: float, carriers: int
) -> float:
    """R/B = log2(M) / (1 + T_g B / K) in bits/s/Hz."""
    if order < 2 or carriers < 1 or bandwidth_hz <= 0 or guard_s < 0:
        raise UsageError(
            f"bandwidth efficiency needs M >= 2, K >= 1, B > 0, T_g >= 0; got "
            f"M={order}, K={carriers}, B={bandwidth_hz}, T_g={guard_s}"
        )
    return math.log2(order) / (1.0 + guard_s * bandwidth_hz / carriers)


# f_e used when the sweep has no Doppler to size it from (2 * 3e-4 * 32 kHz).
DEFAULT_FE_HZ = 19.2


def benchmark_channel() -> ChannelRealization:
    """Default taps at the benchmark Doppler and SNR."""
    return ChannelRealization(doppler_factor=BENCH_DOPPLER, snr_db=BENCH_SNR_DB)


def default_fe_hz(max_doppler: float, center_freq_hz: float) -> float:
    """f_e = 2 * alpha_max * f_c."""
    fe_hz = 2.0 * abs(max_doppler) * center_freq_hz
    return fe_hz if fe_hz > 0 else DEFAULT_FE_HZ


@dataclass(frozen=True)
class BenchSettings:
    """Everything a benchmark run reads from the config file.

    `intervals`, `half_grid` and `fe_hz` are overrides of the method layouts;
    None keeps each method's own layout and the f_e sized from the sweep.
    """
    ofdm: OfdmConfig = field(default_factory=OfdmConfig)
    intervals: Optional[int] = None
    half_grid: Optional[int] = None
    fe_hz: Optional[float] = None
    detector: DetectorSettings = field(default_factory=DetectorSettings)
    channel: ChannelRealization = field(default_factory=benchmark_channel)
    cutoff_factor: float = 3.5
    trials: int = 8
    seed: int = 2024
    workers: int = 1
    methods: Tuple[str, ...] = ("single", "pfft", "ffft", "psfft")


@dataclass(frozen=True)
class SweepSpec:
    """A sweep axis plus the parameters held fixed along it."""
    axis: SweepAxis
    values: Tuple[float, ...]
    carriers: int = 1024
    snr_db: float = BENCH_SNR_DB
    doppler_factor: float = BENCH_DOPPLER
    methods: Tuple[str, ...] = ("single", "pfft", "ffft", "psfft")
    intervals: Optional[int] = None
    half_grid: Optional[int] = None
    fe_hz: Optional[float] = None
    trials: int = 8
    seed: int = 2024
    frame_symbols: int = FRAME_SYMBOLS
    include_baseline: bool = True

    def __post_init__(self) -> None:
        if not self.values:
            raise UsageError(f"the {self.axis.value} sweep has no axis values")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise UsageError("sweep axis values must be strictly increasing")
        unknown = [m for m in self.methods if m not in METHOD_LAYOUTS]
        if unknown or not self.methods:
            raise UsageError(
                f"unknown method(s) {unknown}; choose from {sorted(METHOD_LAYOUTS)}"
            )
        if self.trials < 1:
            raise UsageError("trials must be at least 1")
        if self.axis is SweepAxis.CARRIERS:
            bad = [v for v in self.values if int(v) not in ALLOWED_CARRIERS]
            if bad:
                raise UsageError(f"carrier counts {bad} not in {ALLOWED_CARRIERS}")
        carrier_counts = self.values if self.axis is SweepAxis.CARRIERS else (self.carriers,)
        for k in carrier_counts:
            if self.frame_symbols % int(k):
                raise UsageError(f"K={int(k)} does not divide K*N={self.frame_symbols}")

    @property
    def max_doppler(self) -> float:
        if self.axis is SweepAxis.DOPPLER:
            return max(abs(v) for v in self.values)
        return abs(self.doppler_factor)

    def point_parameters(self, value: float) -> Tuple[int, float, float]:
        """(K, alpha, snr_db) at one axis value."""
        if self.axis is SweepAxis.DOPPLER:
            return self.carriers, float(value), self.snr_db
        if self.axis is SweepAxis.CARRIERS:
            return int(value), self.doppler_factor, self.snr_db
        return self.carriers, self.doppler_factor, float(value)

    @property
    def with_baseline(self) -> bool:
        return self.axis is SweepAxis.CARRIERS and self.include_baseline


@dataclass(frozen=True)
class SweepRecord:
    """One frame of one method at one axis point."""
    method: str
    axis_value: float
    trial: int
    mse_linear: float
    ber: float
    detections: int

    @property
    def mse_db(self) -> float:
        return linear_to_db(self.mse_linear)


@dataclass(frozen=True)
class PointSummary:
    method: str
    axis_value: float
    mean_mse_db: float
    mean_ber: float
    trials: int
    detections: int


def _record_key(record: SweepRecord) -> Tuple[int, float, int]:
    return (METHOD_ORDER.index(record.method), record.axis_value, record.trial)


@dataclass
class SweepResult:
    """All frame records of a sweep."""
    spec: SweepSpec
    records: List[SweepRecord] = field(default_factory=list)

    def add(self, records: List[SweepRecord]) -> None:
        self.records.extend(records)

    def sorted_records(self) -> List[SweepRecord]:
        return sorted(self.records, key=_record_key)

    @property
    def expected_count(self) -> int:
        methods = len(self.spec.methods) + (1 if self.spec.with_baseline else 0)
        return methods * len(self.spec.values) * self.spec.trials

    def summary(self) -> List[PointSummary]:
        """Per-point means; MSE is averaged linearly and converted once."""
        groups: Dict[Tuple[str, float], List[SweepRecord]] = {}
        for record in self.sorted_records():
            groups.setdefault((record.method, record.axis_value), []).append(record)
        summaries = []
        for (method, value), records in groups.items():
            summaries.append(PointSummary(
                method=method,
                axis_value=value,
                mean_mse_db=linear_to_db(float(np.mean([r.mse_linear for r in records]))),
                mean_ber=float(np.mean([r.ber for r in records])),
                trials=len(records),
                detections=sum(r.detections for r in records),
            ))
        return summaries

    def mean_mse_db(self, method: str, axis_value: float) -> float:
        for point in self.summary():
            if point.method == method and point.axis_value == axis_value:
                return point.mean_mse_db
        raise KeyError(f"no records for {method} at {axis_value}")

    def curve(self, method: str) -> List[float]:
        """Mean MSE (dB) of one method along the axis."""
        return [p.mean_mse_db for p in self.summary() if p.method == method]

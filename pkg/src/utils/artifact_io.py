"""
Files the benchmark writes: sweep CSVs and summaries, detection traces and
raw frame dumps.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
import pandas as pd

from ..models.detector_models import DetectionTrace
from ..models.signal_models import ComplexBlock, OfdmConfig
from ..models.sweep_models import SweepResult, bandwidth_efficiency

LOGGER = logging.getLogger(__name__)

PathLike = Union[str, Path]

SWEEP_COLUMNS = ["method", "axis", "trial", "mse_db", "ber"]
SUMMARY_COLUMNS = [
    "method", "axis", "mean_mse_db", "mean_ber", "trials", "detections",
    "bandwidth_efficiency",
]
TRACE_COLUMNS = [
    "block", "k", "x_re", "x_im", "bhat_re", "bhat_im",
    "btilde_re", "btilde_im", "err_sq", "updated",
]

# Fixed formatting keeps re-runs byte-identical.
FLOAT_FORMAT = "%.10g"


def sweep_frame(result: SweepResult) -> pd.DataFrame:
    """One row per (method, axis value, trial), deterministically ordered."""
    rows = [
        (r.method, r.axis_value, r.trial, r.mse_db, r.ber)
        for r in result.sorted_records()
    ]
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def summary_frame(
    result: SweepResult, cfg: OfdmConfig, order: int = 4
) -> pd.DataFrame:
    """Per-point means plus the bandwidth efficiency of the point's geometry."""
    rows = []
    for point in result.summary():
        carriers, _, _ = result.spec.point_parameters(point.axis_value)
        efficiency = bandwidth_efficiency(order, cfg.guard_s, cfg.bandwidth_hz, carriers)
        rows.append((
            point.method, point.axis_value, point.mean_mse_db, point.mean_ber,
            point.trials, point.detections, efficiency,
        ))
    return pd.DataFrame(rows, columns=SUMMARY_COLUMNS)


def summary_path(csv_path: PathLike) -> Path:
    path = Path(csv_path)
    return path.with_name(f"{path.stem}_summary{path.suffix or '.csv'}")


def write_sweep(
    result: SweepResult, csv_path: PathLike, cfg: OfdmConfig, order: int = 4
) -> Path:
    """Write the per-trial CSV and its summary next to it; returns the summary path."""
    path = Path(csv_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    records = sweep_frame(result)
    if len(records) != result.expected_count:
        LOGGER.warning("sweep has %d records, expected %d",
                       len(records), result.expected_count)
    records.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    summary = summary_path(path)
    summary_frame(result, cfg, order).to_csv(
        summary, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
    )
    LOGGER.info("wrote %d rows to %s and summary to %s", len(records), path, summary)
    return summary


def trace_frame(trace: DetectionTrace) -> pd.DataFrame:
    rows = [
        (r.block, r.k, r.x.real, r.x.imag, r.b_hat.real, r.b_hat.imag,
         r.b_tilde.real, r.b_tilde.imag, r.error_sq, int(r.updated))
        for r in trace.records
    ]
    return pd.DataFrame(rows, columns=TRACE_COLUMNS)


def write_trace_csv(trace: DetectionTrace, csv_path: PathLike) -> Path:
    path = Path(csv_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    trace_frame(trace).to_csv(
        path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
    )
    LOGGER.info("wrote %d detection events to %s", len(trace), path)
    return path


def sidecar_path(frame_path: PathLike) -> Path:
    return Path(frame_path).with_suffix(".json")


def dump_frame(
    block: ComplexBlock, frame_path: PathLike, cfg: Optional[OfdmConfig] = None
) -> Path:
    """Little-endian float64 samples (re, im interleaved when complex) plus a
    JSON sidecar describing them."""
    path = Path(frame_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if block.is_complex:
        values = block.samples.astype(np.complex128).view(np.float64)
    else:
        values = block.samples.astype(np.float64)
    values.astype("<f8").tofile(path)

    meta: Dict[str, Any] = {
        "rate": block.rate,
        "epoch": block.epoch,
        "length": len(block),
        "dtype": "complex128" if block.is_complex else "float64",
        "byte_order": "little",
    }
    if cfg is not None:
        meta["ofdm"] = {
            "carriers": cfg.carriers,
            "bandwidth_hz": cfg.bandwidth_hz,
            "center_freq_hz": cfg.center_freq_hz,
            "first_carrier_hz": cfg.first_carrier_hz,
            "sampling_rate_hz": cfg.sampling_rate_hz,
            "guard_ms": cfg.guard_s * 1e3,
            "blocks_per_frame": cfg.blocks_per_frame,
            "samples_per_block": cfg.samples_per_block,
        }
    with open(sidecar_path(path), "w") as f:
        json.dump(meta, f, indent=2)
    LOGGER.info("dumped %d samples to %s", len(block), path)
    return path


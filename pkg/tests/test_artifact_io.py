"""Tests for sweep CSVs, detection traces and frame dumps."""

import json

import numpy as np
import pandas as pd
import pytest

from src.models.detector_models import DetectionRecord, DetectionTrace
from src.models.signal_models import ComplexBlock, OfdmConfig
from src.models.sweep_models import SweepAxis, SweepRecord, SweepResult, SweepSpec
from src.utils.artifact_io import (
    SUMMARY_COLUMNS,
    SWEEP_COLUMNS,
    TRACE_COLUMNS,
    dump_frame,
    sidecar_path,
    summary_path,
    write_sweep,
    write_trace_csv,
)


@pytest.fixture
def carrier_result():
    spec = SweepSpec(axis=SweepAxis.CARRIERS, values=(64, 128), methods=("psfft",),
                     trials=1, include_baseline=False)
    records = [
        SweepRecord("psfft", 128.0, 0, mse_linear=0.001, ber=0.0, detections=100),
        SweepRecord("psfft", 64.0, 0, mse_linear=0.01, ber=0.01, detections=120),
    ]
    return SweepResult(spec=spec, records=records)


class TestSweepFiles:
    def test_per_trial_csv(self, carrier_result, tmp_path):
        path = tmp_path / "out" / "carriers.csv"
        summary = write_sweep(carrier_result, path, OfdmConfig())
        frame = pd.read_csv(path)
        assert list(frame.columns) == SWEEP_COLUMNS
        assert list(frame["axis"]) == [64, 128]
        assert frame["mse_db"].tolist() == pytest.approx([-20.0, -30.0])
        assert summary == summary_path(path) == tmp_path / "out" / "carriers_summary.csv"

    def test_summary_has_bandwidth_efficiency(self, carrier_result, tmp_path):
        summary = pd.read_csv(write_sweep(carrier_result, tmp_path / "c.csv", OfdmConfig()))
        assert list(summary.columns) == SUMMARY_COLUMNS
        assert summary["bandwidth_efficiency"].tolist() == pytest.approx(
            [2 / (1 + 192 / 64), 2 / (1 + 192 / 128)]
        )

    def test_short_result_is_still_written(self, carrier_result, tmp_path, caplog):
        carrier_result.records.pop()
        write_sweep(carrier_result, tmp_path / "c.csv", OfdmConfig())
        assert "expected 2" in caplog.text


class TestTraceFile:
    def test_columns_and_values(self, tmp_path):
        trace = DetectionTrace([
            DetectionRecord(block=0, k=1, x=1 + 2j, b_hat=0.9j, b_tilde=1j,
                            error_sq=0.01, updated=True, training=False),
            DetectionRecord(block=1, k=5, x=-1.0, b_hat=-1.0, b_tilde=-1.0,
                            error_sq=0.0, updated=False, training=True),
        ])
        frame = pd.read_csv(write_trace_csv(trace, tmp_path / "trace.csv"))
        assert list(frame.columns) == TRACE_COLUMNS
        assert frame.loc[0, ["x_re", "x_im", "bhat_im", "btilde_im"]].tolist() == \
            [1.0, 2.0, 0.9, 1.0]
        assert frame["updated"].tolist() == [1, 0]


class TestFrameDump:
    def test_real_frame(self, tmp_path, rng):
        block = ComplexBlock(samples=rng.standard_normal(300), rate=192_000.0)
        path = dump_frame(block, tmp_path / "tx.bin", OfdmConfig(carriers=64))
        assert path.stat().st_size == 300 * 8
        meta = json.loads(sidecar_path(path).read_text())
        assert meta["dtype"] == "float64" and meta["length"] == 300
        assert meta["ofdm"]["carriers"] == 64
        assert meta["ofdm"]["first_carrier_hz"] == pytest.approx(26_093.75)
        assert meta["rate"] == 192_000.0
        np.testing.assert_array_equal(np.fromfile(path, dtype="<f8"), block.samples)

    def test_complex_frame_is_interleaved(self, tmp_path):
        block = ComplexBlock(samples=np.array([1 + 2j, 3 - 4j]), rate=12_000.0, epoch=0.5)
        path = dump_frame(block, tmp_path / "rx.bin")
        np.testing.assert_array_equal(np.fromfile(path, dtype="<f8"), [1.0, 2.0, 3.0, -4.0])
        meta = json.loads(sidecar_path(path).read_text())
        assert meta["dtype"] == "complex128" and meta["epoch"] == 0.5
        assert "ofdm" not in meta

"""
Command-line view of the benchmark.
Parses arguments, wires the viewmodels' callbacks to progress bars and log
output, and writes the result files.
"""

import argparse
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

from ..models.errors import ConfigurationError, UsageError
from ..models.sweep_models import BenchSettings, PointSummary, SweepAxis
from ..services.channel_service import ChannelService
from ..services.transmitter_service import TransmitterService
from ..utils.artifact_io import dump_frame, write_sweep, write_trace_csv
from ..utils.config_persistence import ConfigPersistence
from ..viewmodels.calibration_viewmodel import CalibrationPoint, CalibrationViewModel
from ..viewmodels.sweep_viewmodel import SweepViewModel, trial_seeds

LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _float_list(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text}") from e


def _method_list(text: str) -> List[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _snr(text: str) -> float:
    if text.lower() in ("inf", "off", "none"):
        return math.inf
    try:
        return float(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"invalid SNR {text!r}") from e


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON config file")
    common.add_argument("--channel-profile", type=Path,
                        help="JSON file with taps, doppler_factor and snr_db")
    common.add_argument("--trials", type=int, help="frames per point")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--workers", type=int, help="worker processes")
    common.add_argument("--methods", type=_method_list,
                        help="comma-separated: single,pfft,ffft,psfft")
    common.add_argument("--alpha", type=float, help="residual Doppler factor")
    common.add_argument("--snr-db", type=_snr, help="SNR in dB ('inf' disables noise)")
    common.add_argument("--carriers", type=int, help="carriers per block K")
    common.add_argument("--intervals", type=int, help="partial intervals A")
    common.add_argument("--half-grid", type=int, help="frequency grid half-width L")
    common.add_argument("--fe-hz", type=float, help="frequency grid span f_e")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true")
    verbosity.add_argument("-q", "--quiet", action="store_true")

    parser = argparse.ArgumentParser(
        prog="psfft-bench",
        description="Differential OFDM detection benchmarks under residual Doppler.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    sweep = commands.add_parser("sweep", parents=[common], help="run an MSE sweep")
    sweep.add_argument("axis", choices=[axis.value for axis in SweepAxis])
    sweep.add_argument("--values", type=_float_list, help="comma-separated axis values")
    sweep.add_argument("--out", type=Path, help="per-trial CSV (summary goes next to it)")
    sweep.add_argument("--no-baseline", action="store_true",
                       help="skip the alpha = 0 curve of the carrier sweep")

    point = commands.add_parser("point", parents=[common], help="compare methods at one point")
    point.add_argument("--blocks", type=int, help="blocks per frame N")
    point.add_argument("--trace", type=Path, help="write the trial-0 detection trace CSV")

    calibrate = commands.add_parser("calibrate", parents=[common],
                                    help="grid-search the detector step size")
    calibrate.add_argument("--step-sizes", type=_float_list)
    calibrate.add_argument("--error-thresholds", type=_float_list)
    calibrate.add_argument("--gradient-thresholds", type=_float_list)
    calibrate.add_argument("--method", default="psfft")
    calibrate.add_argument("--save", action="store_true",
                           help="write the best setting back to the config file")

    frame = commands.add_parser("frame", parents=[common], help="dump one frame's samples")
    frame.add_argument("--stage", choices=["tx", "rx"], default="rx")
    frame.add_argument("--out", type=Path, required=True, help="sample file (.bin)")
    return parser


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


class CliView:
    """Runs one parsed command against the viewmodels."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.persistence = ConfigPersistence(args.config)
        self.settings = self._load_settings()
        self._progress: Optional[tqdm] = None

    def _load_settings(self) -> BenchSettings:
        args = self.args
        if args.config is not None and not args.config.exists():
            raise ConfigurationError(f"config file {args.config} does not exist")
        settings = self.persistence.load_settings()
        if args.channel_profile is not None:
            settings = self.persistence.load_channel_profile(args.channel_profile, settings)
        overrides = {
            "trials": args.trials,
            "seed": args.seed,
            "workers": args.workers,
            "methods": tuple(args.methods) if args.methods else None,
            "intervals": args.intervals,
            "half_grid": args.half_grid,
            "fe_hz": args.fe_hz,
        }
        return replace(settings, **{k: v for k, v in overrides.items() if v is not None})

    def _attach_progress(self, viewmodel: SweepViewModel, label: str) -> None:
        def started(total: int) -> None:
            if self._progress is not None:
                self._progress.close()
            self._progress = tqdm(total=total, desc=label, unit="frame",
                                  disable=self.args.quiet, leave=False)

        def advanced(done: int, total: int) -> None:
            if self._progress is not None:
                self._progress.update(1)

        viewmodel.on_sweep_started = started
        viewmodel.on_trial_complete = advanced
        viewmodel.on_error = lambda message: LOGGER.error("run aborted: %s", message)

    def _close_progress(self) -> None:
        if self._progress is not None:
            self._progress.close()
            self._progress = None

    def run(self) -> int:
        handlers: dict = {
            "sweep": self.run_sweep,
            "point": self.run_point,
            "calibrate": self.run_calibrate,
            "frame": self.run_frame,
        }
        try:
            return handlers[self.args.command]()
        finally:
            self._close_progress()

    def run_sweep(self) -> int:
        args = self.args
        axis = SweepAxis(args.axis)
        viewmodel = SweepViewModel(self.settings)
        self._attach_progress(viewmodel, f"{axis.value} sweep")
        spec = viewmodel.spec_for(
            axis,
            args.values,
            carriers=args.carriers,
            doppler_factor=args.alpha,
            snr_db=args.snr_db,
            include_baseline=False if args.no_baseline else None,
        )
        runners: dict = {
            SweepAxis.DOPPLER: viewmodel.sweep_doppler,
            SweepAxis.CARRIERS: viewmodel.sweep_carriers,
            SweepAxis.SNR: viewmodel.sweep_snr,
        }
        result = runners[axis](spec)
        self._close_progress()
        out = args.out or Path(f"{axis.value}_sweep.csv")
        summary = write_sweep(result, out, self.settings.ofdm)
        print(pd.read_csv(summary).to_string(index=False))
        return EXIT_OK

    def run_point(self) -> int:
        args = self.args
        settings = self.settings
        viewmodel = SweepViewModel(settings)
        self._attach_progress(viewmodel, "point")
        carriers = args.carriers or settings.ofdm.carriers
        # K*N of the configured geometry is kept when only K changes
        frame_symbols = settings.ofdm.carriers * settings.ofdm.blocks_per_frame
        blocks = args.blocks or max(1, frame_symbols // carriers)
        alpha = args.alpha if args.alpha is not None else settings.channel.doppler_factor
        snr_db = args.snr_db if args.snr_db is not None else settings.channel.snr_db
        summaries, traces = viewmodel.compare_methods(
            settings.methods, carriers, blocks, alpha, snr_db,
            settings.trials, settings.seed, keep_traces=args.trace is not None,
        )
        self._close_progress()
        print(_summary_table(summaries).to_string(index=False))
        if args.trace is not None:
            for method, trace in traces.items():
                path = args.trace
                if len(traces) > 1:
                    path = path.with_name(f"{path.stem}_{method}{path.suffix or '.csv'}")
                write_trace_csv(trace, path)
        return EXIT_OK

    def run_calibrate(self) -> int:
        args = self.args
        viewmodel = CalibrationViewModel(self.settings)
        self._attach_progress(viewmodel.sweeps, "calibration")
        viewmodel.on_candidate_complete = _log_candidate
        kwargs = {}
        if args.step_sizes:
            kwargs["step_sizes"] = args.step_sizes
        points = viewmodel.calibrate(
            error_thresholds=args.error_thresholds,
            gradient_thresholds=args.gradient_thresholds,
            method=args.method,
            trials=args.trials or 2,
            **kwargs,
        )
        self._close_progress()
        best = viewmodel.apply_best(points)
        print(pd.DataFrame(
            [(p.detector.step_size, p.detector.error_threshold,
              p.detector.gradient_threshold, p.steady_mse_db) for p in points],
            columns=["step_size", "error_threshold", "gradient_threshold", "steady_mse_db"],
        ).to_string(index=False))
        if args.save:
            if not self.persistence.save_settings(best):
                return EXIT_FAILURE
            LOGGER.info("saved calibrated detector settings to %s",
                        self.persistence.config_file)
        return EXIT_OK

    def run_frame(self) -> int:
        args = self.args
        settings = self.settings
        cfg = settings.ofdm
        if args.carriers is not None:
            cfg = cfg.with_carriers(args.carriers, cfg.carriers * cfg.blocks_per_frame)
        data_seed, noise_seed = trial_seeds(settings.seed, 0)
        plan, frame = TransmitterService(cfg).new_frame(
            settings.detector.pilot_count, np.random.default_rng(data_seed)
        )
        if args.stage == "rx":
            channel = replace(
                settings.channel,
                doppler_factor=args.alpha if args.alpha is not None
                else settings.channel.doppler_factor,
                snr_db=args.snr_db if args.snr_db is not None else settings.channel.snr_db,
                noise_seed=noise_seed,
            )
            frame = ChannelService(cfg, settings.cutoff_factor).propagate(frame, channel)
        dump_frame(frame, args.out, cfg)
        return EXIT_OK


def _summary_table(summaries: Sequence[PointSummary]) -> pd.DataFrame:
    return pd.DataFrame(
        [(s.method, s.mean_mse_db, s.mean_ber, s.trials, s.detections) for s in summaries],
        columns=["method", "mean_mse_db", "mean_ber", "trials", "detections"],
    )


def _log_candidate(point: CalibrationPoint) -> None:
    LOGGER.debug("candidate mu=%g: %.2f dB", point.detector.step_size, point.steady_mse_db)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    try:
        return CliView(args).run()
    except (UsageError, ConfigurationError) as e:
        LOGGER.error("%s", e)
        return EXIT_USAGE
    except KeyboardInterrupt:
        LOGGER.warning("interrupted")
        return EXIT_FAILURE
    except Exception as e:
        LOGGER.exception("failed: %s", e)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())

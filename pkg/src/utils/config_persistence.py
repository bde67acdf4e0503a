"""
Config persistence utility for loading and saving benchmark settings.
"""

import json
import logging
import math
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

from ..models.channel_models import ChannelRealization, PathTap, taps_from_pairs
from ..models.detector_models import DetectorSettings, GradientDenominator
from ..models.errors import ConfigurationError
from ..models.signal_models import OfdmConfig
from ..models.sweep_models import BenchSettings
from ..services.channel_service import image_method_profile

LOGGER = logging.getLogger(__name__)

PathLike = Union[str, Path]

SECTION_KEYS: Dict[str, tuple] = {
    "ofdm": ("carriers", "bandwidth_hz", "center_freq_hz", "sampling_rate_hz",
             "guard_ms", "blocks_per_frame", "lowest_freq_hz", "grid_aligned"),
    "demod": ("intervals", "half_grid", "fe_hz"),
    "detector": ("step_size", "error_threshold", "gradient_threshold",
                 "pilot_count", "denominator"),
    "channel": ("taps", "doppler_factor", "snr_db", "lowpass_cutoff_factor"),
    "bench": ("trials", "seed", "workers", "methods"),
}

PROFILE_KEYS = ("taps", "doppler_factor", "snr_db")

IMAGE_METHOD = "image-method"
IMAGE_METHOD_KEYS: Dict[str, type] = {
    "depth_m": float,
    "range_m": float,
    "source_height_m": float,
    "receiver_height_m": float,
    "sound_speed": float,
    "bottom_sound_speed": float,
    "density_ratio": float,
    "spreading_factor": float,
    "frequency_hz": float,
    "max_delay_s": float,
    "max_taps": int,
    "max_order": int,
}


def _warn_unknown(keys: Iterable[str], allowed: Iterable[str], where: str) -> None:
    for key in sorted(set(keys) - set(allowed)):
        LOGGER.warning("ignoring unknown key %r in %s", key, where)


def _section(document: Dict[str, Any], name: str) -> Dict[str, Any]:
    section = document.get(name, {})
    if not isinstance(section, dict):
        raise ConfigurationError(f"config section {name!r} must be an object")
    _warn_unknown(section, SECTION_KEYS[name], f"section {name!r}")
    return section


def _number(section: Dict[str, Any], key: str, default: Any, kind: type = float) -> Any:
    if key not in section or section[key] is None:
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise ConfigurationError(f"{key!r} must be a number, got {value!r}")
    try:
        converted = kind(value)
    except ValueError as e:
        raise ConfigurationError(f"{key!r} must be a number, got {value!r}") from e
    if kind is int and float(value) != converted:
        raise ConfigurationError(f"{key!r} must be an integer, got {value!r}")
    return converted


def _snr(value: Any) -> float:
    # JSON has no infinity literal; null or "inf" switch the noise off
    if value is None:
        return math.inf
    try:
        return float(value)
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"'snr_db' must be a number or null, got {value!r}") from e


def _flag(section: Dict[str, Any], key: str, default: bool) -> bool:
    if key not in section or section[key] is None:
        return default
    if not isinstance(section[key], bool):
        raise ConfigurationError(f"{key!r} must be true or false, got {section[key]!r}")
    return section[key]


def _image_method_taps(spec: Any) -> List[PathTap]:
    """Taps from the mirror-image waveguide model.

    `spec` is the string "image-method" or an object with "model":
    "image-method" plus any geometry overrides (depth_m, range_m, ...).
    """
    if isinstance(spec, str):
        spec = {"model": spec}
    if spec.get("model") != IMAGE_METHOD:
        raise ConfigurationError(
            f"tap model must be {IMAGE_METHOD!r}, got {spec.get('model')!r}"
        )
    params = {k: v for k, v in spec.items() if k != "model"}
    _warn_unknown(params, IMAGE_METHOD_KEYS, "image-method taps")
    kwargs = {
        key: _number(params, key, None, kind)
        for key, kind in IMAGE_METHOD_KEYS.items()
        if params.get(key) is not None
    }
    try:
        return image_method_profile(**kwargs)
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigurationError(f"image-method geometry {kwargs} is unusable: {e}") from e


def _taps(value: Any) -> List[PathTap]:
    if isinstance(value, (str, dict)):
        return _image_method_taps(value)
    if not isinstance(value, list):
        raise ConfigurationError(
            f"'taps' must be a list of entries or {IMAGE_METHOD!r}, got {value!r}"
        )
    return taps_from_pairs(value)


def _channel(section: Dict[str, Any], base: ChannelRealization) -> ChannelRealization:
    taps = _taps(section["taps"]) if "taps" in section else base.taps
    return ChannelRealization(
        taps=taps,
        doppler_factor=_number(section, "doppler_factor", base.doppler_factor),
        snr_db=_snr(section["snr_db"]) if "snr_db" in section else base.snr_db,
        noise_seed=base.noise_seed,
    )


def settings_from_dict(document: Dict[str, Any]) -> BenchSettings:
    """Build settings from a parsed config document; absent keys keep defaults."""
    if not isinstance(document, dict):
        raise ConfigurationError("a config document must be a JSON object")
    _warn_unknown(document, SECTION_KEYS, "config")
    defaults = BenchSettings()

    ofdm = _section(document, "ofdm")
    base = defaults.ofdm
    geometry = OfdmConfig(
        carriers=_number(ofdm, "carriers", base.carriers, int),
        bandwidth_hz=_number(ofdm, "bandwidth_hz", base.bandwidth_hz),
        center_freq_hz=_number(ofdm, "center_freq_hz", base.center_freq_hz),
        sampling_rate_hz=_number(ofdm, "sampling_rate_hz", base.sampling_rate_hz),
        guard_s=_number(ofdm, "guard_ms", base.guard_s * 1e3) * 1e-3,
        blocks_per_frame=_number(ofdm, "blocks_per_frame", base.blocks_per_frame, int),
        lowest_freq_hz=_number(ofdm, "lowest_freq_hz", None),
        grid_aligned=_flag(ofdm, "grid_aligned", base.grid_aligned),
    )

    demod = _section(document, "demod")

    detector = _section(document, "detector")
    denominator = detector.get("denominator", defaults.detector.denominator.value)
    try:
        denominator = GradientDenominator(denominator)
    except ValueError as e:
        raise ConfigurationError(
            f"'denominator' must be one of {[d.value for d in GradientDenominator]}"
        ) from e
    base_detector = defaults.detector
    detector_settings = DetectorSettings(
        step_size=_number(detector, "step_size", base_detector.step_size),
        error_threshold=_number(detector, "error_threshold", base_detector.error_threshold),
        gradient_threshold=_number(
            detector, "gradient_threshold", base_detector.gradient_threshold
        ),
        pilot_count=_number(detector, "pilot_count", base_detector.pilot_count, int),
        denominator=denominator,
    )

    channel = _section(document, "channel")
    bench = _section(document, "bench")
    methods = bench.get("methods", list(defaults.methods))
    if isinstance(methods, str):
        methods = [m.strip() for m in methods.split(",") if m.strip()]
    if not isinstance(methods, list) or not all(isinstance(m, str) for m in methods):
        raise ConfigurationError("'methods' must be a list of method names")

    return BenchSettings(
        ofdm=geometry,
        intervals=_number(demod, "intervals", None, int),
        half_grid=_number(demod, "half_grid", None, int),
        fe_hz=_number(demod, "fe_hz", None),
        detector=detector_settings,
        channel=_channel(channel, defaults.channel),
        cutoff_factor=_number(channel, "lowpass_cutoff_factor", defaults.cutoff_factor),
        trials=_number(bench, "trials", defaults.trials, int),
        seed=_number(bench, "seed", defaults.seed, int),
        workers=_number(bench, "workers", defaults.workers, int),
        methods=tuple(methods),
    )


def settings_to_dict(settings: BenchSettings) -> Dict[str, Any]:
    """Inverse of settings_from_dict; infinite SNR is written as null."""
    cfg = settings.ofdm
    channel = settings.channel
    return {
        "ofdm": {
            "carriers": cfg.carriers,
            "bandwidth_hz": cfg.bandwidth_hz,
            "center_freq_hz": cfg.center_freq_hz,
            "sampling_rate_hz": cfg.sampling_rate_hz,
            "guard_ms": cfg.guard_s * 1e3,
            "blocks_per_frame": cfg.blocks_per_frame,
            "lowest_freq_hz": cfg.lowest_freq_hz,
            "grid_aligned": cfg.grid_aligned,
        },
        "demod": {
            "intervals": settings.intervals,
            "half_grid": settings.half_grid,
            "fe_hz": settings.fe_hz,
        },
        "detector": {
            "step_size": settings.detector.step_size,
            "error_threshold": settings.detector.error_threshold,
            "gradient_threshold": settings.detector.gradient_threshold,
            "pilot_count": settings.detector.pilot_count,
            "denominator": settings.detector.denominator.value,
        },
        "channel": {
            "taps": [list(pair) for pair in channel.tap_pairs()],
            "doppler_factor": channel.doppler_factor,
            "snr_db": channel.snr_db if math.isfinite(channel.snr_db) else None,
            "lowpass_cutoff_factor": settings.cutoff_factor,
        },
        "bench": {
            "trials": settings.trials,
            "seed": settings.seed,
            "workers": settings.workers,
            "methods": list(settings.methods),
        },
    }


class ConfigPersistence:
    """Handle saving and loading benchmark settings."""

    def __init__(self, config_file: Optional[PathLike] = None):
        # Use user's home directory for config unless a file is given
        if config_file is None:
            self.config_dir = Path.home() / ".psfft-bench"
            self.config_file = self.config_dir / "config.json"
        else:
            self.config_file = Path(config_file)
            self.config_dir = self.config_file.parent

    def _read(self, path: Path) -> Dict[str, Any]:
        try:
            with open(path, "r") as f:
                return json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"{path} is not valid JSON: {e}") from e
        except OSError as e:
            raise ConfigurationError(f"cannot read {path}: {e}") from e

    def load_settings(self) -> BenchSettings:
        """Load the saved settings; built-in defaults when there is no file."""
        if not self.config_file.exists():
            LOGGER.debug("no config at %s, using defaults", self.config_file)
            return BenchSettings()
        LOGGER.info("loading config from %s", self.config_file)
        return settings_from_dict(self._read(self.config_file))

    def save_settings(self, settings: BenchSettings) -> bool:
        """Save settings as indented JSON."""
        try:
            self.config_dir.mkdir(parents=True, exist_ok=True)
            with open(self.config_file, "w") as f:
                json.dump(settings_to_dict(settings), f, indent=2)
            return True
        except OSError as e:
            LOGGER.error("error saving config to %s: %s", self.config_file, e)
            return False

    def load_channel_profile(
        self, profile_path: PathLike, settings: BenchSettings
    ) -> BenchSettings:
        """Overlay a channel-profile file (taps, Doppler, SNR) on `settings`."""
        path = Path(profile_path)
        document = self._read(path)
        if not isinstance(document, dict):
            raise ConfigurationError(f"{path} must hold a JSON object")
        _warn_unknown(document, PROFILE_KEYS, f"profile {path.name}")
        channel = _channel(document, settings.channel)
        LOGGER.info("channel profile %s: %d taps, alpha=%g",
                    path.name, len(channel.taps), channel.doppler_factor)
        return replace(settings, channel=channel)

"""Configuration models for the voxsel toolkit."""

import os

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, model_validator


class Criterion(str, Enum):
    """Data-selection criterion."""
    DC1 = "dc1"  # raw PLDA score
    DC2 = "dc2"  # sigmoid score over speaker divergence
    DC3 = "dc3"  # sigmoid score over speaker and utterance divergence


class _FrozenModel(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class StftConfig(_FrozenModel):
    """One STFT analysis resolution."""
    fft_size: PositiveInt
    hop: PositiveInt
    window_length: PositiveInt
    window: Literal["hann"] = "hann"

    @model_validator(mode="after")
    def _check_ordering(self) -> "StftConfig":
        if not self.hop <= self.window_length <= self.fft_size:
            raise ValueError(
                f"expected hop <= window_length <= fft_size, got "
                f"{self.hop}/{self.window_length}/{self.fft_size}"
            )
        return self

    @property
    def num_bins(self) -> int:
        return self.fft_size // 2 + 1


# Vocoder training resolutions for 44.1 kHz audio and its 5-band decomposition.
FULLBAND_FFT_SIZES = (1024, 2048, 4096)
FULLBAND_HOPS = (120, 240, 480)
FULLBAND_WINDOWS = (600, 1200, 2400)
SUBBAND_FFT_SIZES = (384, 683, 171)
SUBBAND_HOPS = (30, 60, 10)
SUBBAND_WINDOWS = (150, 300, 60)

# 80-band mel analysis, hop 220, FFT 2048.
ANALYSIS_STFT = {"fft_size": 2048, "hop": 220, "window_length": 2048}


class StftLossConfig(_FrozenModel):
    """A set of STFT resolutions evaluated together by the multi-resolution loss."""
    resolutions: Tuple[StftConfig, ...] = Field(min_length=1)

    @classmethod
    def from_lists(cls, fft_sizes, hops, windows) -> "StftLossConfig":
        if not len(fft_sizes) == len(hops) == len(windows):
            raise ValueError("fft_sizes, hops and windows must have equal length")
        return cls(resolutions=tuple(
            StftConfig(fft_size=n, hop=h, window_length=w)
            for n, h, w in zip(fft_sizes, hops, windows)
        ))

    @classmethod
    def fullband(cls) -> "StftLossConfig":
        return cls.from_lists(FULLBAND_FFT_SIZES, FULLBAND_HOPS, FULLBAND_WINDOWS)

    @classmethod
    def subband(cls) -> "StftLossConfig":
        return cls.from_lists(SUBBAND_FFT_SIZES, SUBBAND_HOPS, SUBBAND_WINDOWS)


class GanLossWeights(_FrozenModel):
    """Balance weight between adversarial and spectral generator terms."""
    lambda_adv: float = Field(default=2.5, ge=0.0, allow_inf_nan=False)


class SelectionConfig(_FrozenModel):
    """Parameters of one selection run."""
    criterion: Criterion = Criterion.DC3
    k: PositiveInt = 85
    alpha: float = Field(default=0.1, ge=0.0, allow_inf_nan=False)
    sigmoid_c: float = Field(default=0.5, gt=0.0, allow_inf_nan=False)
    epsilon: float = Field(default=1e-6, gt=0.0, allow_inf_nan=False)


class F0Config(_FrozenModel):
    """Autocorrelation pitch tracker settings."""
    frame_period_ms: float = Field(default=5.0, gt=0.0)
    fmin_hz: float = Field(default=70.0, gt=0.0)
    fmax_hz: float = Field(default=400.0, gt=0.0)
    voicing_threshold: float = Field(default=0.3, gt=0.0, le=1.0)
    rms_floor: float = Field(default=1e-4, ge=0.0)

    @model_validator(mode="after")
    def _check_range(self) -> "F0Config":
        if self.fmin_hz >= self.fmax_hz:
            raise ValueError(f"fmin_hz ({self.fmin_hz}) must be below fmax_hz ({self.fmax_hz})")
        return self


class EvalConfig(_FrozenModel):
    """Analysis settings of the objective metrics."""
    lsd_stft: StftConfig = Field(default_factory=lambda: StftConfig(**ANALYSIS_STFT))
    mcd_stft: StftConfig = Field(default_factory=lambda: StftConfig(**ANALYSIS_STFT))
    mcd_order: int = Field(default=24, ge=1)
    num_mels: int = Field(default=80, ge=2)
    f0: F0Config = Field(default_factory=F0Config)

    @model_validator(mode="after")
    def _check_order(self) -> "EvalConfig":
        if self.mcd_order >= self.num_mels:
            raise ValueError(f"mcd_order ({self.mcd_order}) must be below num_mels ({self.num_mels})")
        return self


class PqmfConfig(_FrozenModel):
    """Cosine-modulated filterbank design parameters."""
    num_bands: int = Field(default=5, ge=2)
    taps: PositiveInt = 62
    kaiser_beta: float = Field(default=9.0, ge=0.0)

    @model_validator(mode="after")
    def _check_taps(self) -> "PqmfConfig":
        if self.taps % 2:
            raise ValueError(f"taps must be even, got {self.taps}")
        return self


class RunConfig(_FrozenModel):
    """Process-wide settings shared by all subcommands."""
    threads: PositiveInt = Field(default_factory=lambda: os.cpu_count() or 1)
    seed: int = 0
    log_level: Literal["error", "warn", "info", "debug"] = "warn"
    config_path: Optional[str] = None

    @classmethod
    def create_default(cls) -> "RunConfig":
        """Create default configuration with environment variable overrides."""
        values: Dict[str, Any] = {}
        if os.getenv("VOXSEL_THREADS"):
            values["threads"] = int(os.environ["VOXSEL_THREADS"])
        if os.getenv("VOXSEL_LOG_LEVEL"):
            values["log_level"] = os.environ["VOXSEL_LOG_LEVEL"].lower()
        return cls(**values)


def load_config_file(path: str) -> Dict[str, Dict[str, Any]]:
    """Read a TOML or YAML config file into ``{subcommand: {option: value}}``.

    Option names may use dashes or underscores; they are normalized to the
    underscore form click uses for parameter names.
    """
    config_path = Path(path)
    suffix = config_path.suffix.lower()
    text = config_path.read_text(encoding="utf-8")
    if suffix == ".toml":
        try:
            raw = tomllib.loads(text)
        except tomllib.TOMLDecodeError as e:
            raise ValueError(f"{path}: invalid TOML: {e}") from None
    elif suffix in (".yaml", ".yml"):
        try:
            raw = yaml.safe_load(text) or {}
        except yaml.YAMLError as e:
            raise ValueError(f"{path}: invalid YAML: {e}") from None
    else:
        raise ValueError(f"unsupported config file type '{suffix}' (use .toml, .yaml or .yml)")

    if not isinstance(raw, dict):
        raise ValueError(f"config file {path} must contain a mapping of subcommand tables")

    sections: Dict[str, Dict[str, Any]] = {}
    for section, options in raw.items():
        if not isinstance(options, dict):
            raise ValueError(f"config section '{section}' must be a table")
        sections[section] = {key.replace("-", "_"): value for key, value in options.items()}
    return sections


# Global configuration instance
_config: Optional[RunConfig] = None


def get_config() -> RunConfig:
    """Get the global run configuration."""
    global _config
    if _config is None:
        _config = RunConfig.create_default()
    return _config


def set_config(config: RunConfig) -> None:
    """Set the global run configuration."""
    global _config
    _config = config

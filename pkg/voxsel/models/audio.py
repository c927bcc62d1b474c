"""Audio and spectral data models."""

from dataclasses import dataclass

import numpy as np

from ..errors import VoxselError
from .config import StftConfig


class DspError(VoxselError):
    """Base exception for signal-processing operations"""
    module = "dsp"


class AudioFormatError(DspError):
    """Raised when audio cannot be read or has an unsupported layout"""
    pass


class PqmfDesignError(DspError):
    """Raised when the filterbank prototype optimization fails"""
    pass


@dataclass(frozen=True)
class AudioBuffer:
    """Mono waveform at a declared sample rate."""
    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise AudioFormatError(f"audio must be mono (1-D), got shape {samples.shape}")
        if not np.all(np.isfinite(samples)):
            raise AudioFormatError("audio samples contain NaN or Inf")
        if int(self.sample_rate_hz) <= 0:
            raise AudioFormatError(f"sample rate must be positive, got {self.sample_rate_hz}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate_hz", int(self.sample_rate_hz))

    def __len__(self) -> int:
        return int(self.samples.shape[0])

    @property
    def duration_seconds(self) -> float:
        return len(self) / self.sample_rate_hz

    def scaled(self, gain: float) -> "AudioBuffer":
        return AudioBuffer(self.samples * gain, self.sample_rate_hz)


@dataclass(frozen=True)
class SpectralFrameSeries:
    """Framewise magnitude spectra, shape (num_frames, fft_size // 2 + 1)."""
    frames: np.ndarray
    config: StftConfig
    sample_rate_hz: int


@dataclass(frozen=True)
class F0Track:
    """Per-frame F0 in Hz (0 where unvoiced) and the voicing decisions."""
    f0_hz: np.ndarray
    voiced: np.ndarray
    frame_period_ms: float

    def __len__(self) -> int:
        return int(self.f0_hz.shape[0])

    @property
    def voiced_ratio(self) -> float:
        return float(np.mean(self.voiced)) if len(self) else 0.0


@dataclass(frozen=True)
class PqmfBank:
    """Cosine-modulated analysis/synthesis filter pair, each (num_bands, taps + 1)."""
    num_bands: int
    taps: int
    kaiser_beta: float
    cutoff: float
    analysis_filters: np.ndarray
    synthesis_filters: np.ndarray
    objective: float

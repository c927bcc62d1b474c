"""Vocoder training losses evaluated as plain numeric functions.

The spectral loss combines spectral convergence and mean absolute log-magnitude
difference over several STFT resolutions. The adversarial terms are the
least-squares GAN objectives averaged over score samples and discriminators.
"""

import logging
from dataclasses import dataclass
from typing import List, NamedTuple, Sequence

import numpy as np

from ..errors import VoxselError
from ..models.audio import AudioBuffer
from ..models.config import GanLossWeights, StftConfig, StftLossConfig
from .dsp import stft_magnitude

logger = logging.getLogger(__name__)

LOG_MAGNITUDE_FLOOR = 1e-7


class LossError(VoxselError):
    """Base exception for loss computations"""
    module = "losses"


class StftLossTerms(NamedTuple):
    sc: float
    mag: float


def _check_pair(x: AudioBuffer, y: AudioBuffer) -> None:
    if len(x) != len(y):
        raise LossError(f"signal lengths differ: {len(x)} vs {len(y)}")
    if x.sample_rate_hz != y.sample_rate_hz:
        raise LossError(f"sample rates differ: {x.sample_rate_hz} vs {y.sample_rate_hz}")


def stft_loss_single(x: AudioBuffer, y: AudioBuffer, cfg: StftConfig) -> StftLossTerms:
    """Spectral convergence and log-magnitude loss of ``x`` against reference ``y``."""
    _check_pair(x, y)
    x_mag = stft_magnitude(x, cfg).frames
    y_mag = stft_magnitude(y, cfg).frames
    reference_norm = np.linalg.norm(y_mag)
    if reference_norm == 0.0:
        raise LossError("spectral convergence is undefined for a silent reference signal")
    sc = np.linalg.norm(y_mag - x_mag) / reference_norm
    mag = np.mean(np.abs(
        np.log(np.maximum(y_mag, LOG_MAGNITUDE_FLOOR)) - np.log(np.maximum(x_mag, LOG_MAGNITUDE_FLOOR))
    ))
    return StftLossTerms(sc=float(sc), mag=float(mag))


def multi_resolution_stft_loss(x: AudioBuffer, y: AudioBuffer, cfg: StftLossConfig) -> float:
    """Mean over resolutions of (sc + mag)."""
    terms = [stft_loss_single(x, y, resolution) for resolution in cfg.resolutions]
    return float(np.mean([t.sc + t.mag for t in terms]))


def subband_buffers(subbands: np.ndarray, fullband_rate_hz: int) -> List[AudioBuffer]:
    """Wrap each subband row as audio at the decimated rate."""
    subbands = np.asarray(subbands, dtype=np.float64)
    if subbands.ndim != 2:
        raise LossError(f"subbands must be a (bands, samples) matrix, got shape {subbands.shape}")
    rate = max(1, fullband_rate_hz // subbands.shape[0])
    return [AudioBuffer(row, rate) for row in subbands]


@dataclass(frozen=True)
class CombinedLoss:
    """Fullband term, per-band subband terms and their combination."""
    fullband: float
    subbands: List[float]

    @property
    def total(self) -> float:
        return self.fullband + float(np.mean(self.subbands))


def combined_sp_terms(x_full: AudioBuffer, y_full: AudioBuffer, x_sub: np.ndarray,
                      y_sub: np.ndarray, full_cfg: StftLossConfig,
                      sub_cfg: StftLossConfig) -> CombinedLoss:
    """Fullband loss and each band's subband loss."""
    x_sub = np.asarray(x_sub, dtype=np.float64)
    y_sub = np.asarray(y_sub, dtype=np.float64)
    if x_sub.shape != y_sub.shape:
        raise LossError(f"subband shapes differ: {x_sub.shape} vs {y_sub.shape}")
    fullband = multi_resolution_stft_loss(x_full, y_full, full_cfg)
    x_bands = subband_buffers(x_sub, x_full.sample_rate_hz)
    y_bands = subband_buffers(y_sub, y_full.sample_rate_hz)
    per_band = [multi_resolution_stft_loss(xb, yb, sub_cfg) for xb, yb in zip(x_bands, y_bands)]
    return CombinedLoss(fullband=fullband, subbands=per_band)


def combined_sp_loss(x_full: AudioBuffer, y_full: AudioBuffer, x_sub: np.ndarray,
                     y_sub: np.ndarray, full_cfg: StftLossConfig,
                     sub_cfg: StftLossConfig) -> float:
    """Fullband loss plus the mean over bands of the subband losses."""
    return combined_sp_terms(x_full, y_full, x_sub, y_sub, full_cfg, sub_cfg).total


def _as_scores(values, what: str) -> np.ndarray:
    array = np.asarray(values, dtype=np.float64).ravel()
    if array.size == 0:
        raise LossError(f"{what} is empty")
    return array


def discriminator_loss(real_scores: Sequence, fake_scores: Sequence) -> float:
    """(1/K) sum_k [ mean((1 - real_k)^2) + mean(fake_k^2) ]."""
    if len(real_scores) == 0:
        raise LossError("at least one discriminator is required")
    if len(real_scores) != len(fake_scores):
        raise LossError(
            f"got {len(real_scores)} real and {len(fake_scores)} fake score vectors"
        )
    total = 0.0
    for k, (real, fake) in enumerate(zip(real_scores, fake_scores)):
        real = _as_scores(real, f"real scores of discriminator {k}")
        fake = _as_scores(fake, f"fake scores of discriminator {k}")
        total += np.mean((1.0 - real) ** 2) + np.mean(fake ** 2)
    return float(total / len(real_scores))


def adversarial_loss(fake_scores) -> float:
    """mean((1 - fake)^2)."""
    fake = _as_scores(fake_scores, "fake scores")
    return float(np.mean((1.0 - fake) ** 2))


def generator_loss(adv: float, sp: float, weights: GanLossWeights = GanLossWeights()) -> float:
    """lambda_adv * adv + sp."""
    if not (np.isfinite(adv) and np.isfinite(sp)):
        raise LossError(f"generator loss terms must be finite, got adv={adv}, sp={sp}")
    return weights.lambda_adv * adv + sp

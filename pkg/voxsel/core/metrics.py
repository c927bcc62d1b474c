"""Objective speech metrics: LSD, MCD, F0 RMSE, U/V error and embedding similarity."""

import logging
import math
from typing import NamedTuple, Optional

import numpy as np

from ..errors import VoxselError
from ..models.audio import AudioBuffer
from ..models.config import ANALYSIS_STFT, EvalConfig, F0Config, StftConfig
from ..models.scoring import PldaModel
from . import plda
from .dsp import estimate_f0, mel_cepstrum, stft_magnitude

logger = logging.getLogger(__name__)

LSD_EPSILON = 1e-10
MCD_CONSTANT = 10.0 * math.sqrt(2.0) / math.log(10.0)


class MetricError(VoxselError):
    """Base exception for metric computations"""
    module = "metrics"


class F0Metrics(NamedTuple):
    rmse_hz: float
    uv_error_pct: float


def align_length(test: AudioBuffer, reference: AudioBuffer, tolerance: int) -> AudioBuffer:
    """Center-trim or zero-pad ``test`` to the reference length.

    A discrepancy larger than ``tolerance`` samples is an error.
    """
    if test.sample_rate_hz != reference.sample_rate_hz:
        raise MetricError(
            f"sample rates differ: {test.sample_rate_hz} vs {reference.sample_rate_hz}"
        )
    diff = len(test) - len(reference)
    if abs(diff) > tolerance:
        raise MetricError(
            f"length mismatch of {abs(diff)} samples exceeds tolerance of {tolerance}"
        )
    if diff > 0:
        start = diff // 2
        samples = test.samples[start:start + len(reference)]
    elif diff < 0:
        front = (-diff) // 2
        samples = np.pad(test.samples, (front, -diff - front))
    else:
        return test
    return AudioBuffer(samples, test.sample_rate_hz)


def lsd(x: AudioBuffer, y: AudioBuffer, cfg: Optional[StftConfig] = None) -> float:
    """Log-spectral distortion in dB of test ``x`` against reference ``y``."""
    cfg = cfg or StftConfig(**ANALYSIS_STFT)
    x = align_length(x, y, cfg.hop)
    x_db = 20.0 * np.log10(stft_magnitude(x, cfg).frames + LSD_EPSILON)
    y_db = 20.0 * np.log10(stft_magnitude(y, cfg).frames + LSD_EPSILON)
    per_frame = np.sqrt(np.mean((x_db - y_db) ** 2, axis=1))
    return float(np.mean(per_frame))


def mcd_from_cepstra(cx: np.ndarray, cy: np.ndarray) -> float:
    """Mel-cepstral distortion in dB over c1..c_order (c0 excluded).

    Cepstra are (frames, order + 1); one trailing frame of mismatch is dropped.
    """
    cx = np.asarray(cx, dtype=np.float64)
    cy = np.asarray(cy, dtype=np.float64)
    if cx.shape[1] != cy.shape[1]:
        raise MetricError(f"cepstral orders differ: {cx.shape[1] - 1} vs {cy.shape[1] - 1}")
    if abs(cx.shape[0] - cy.shape[0]) > 1:
        raise MetricError(f"frame counts differ by more than one: {cx.shape[0]} vs {cy.shape[0]}")
    frames = min(cx.shape[0], cy.shape[0])
    diff = cx[:frames, 1:] - cy[:frames, 1:]
    return float(MCD_CONSTANT * np.mean(np.sqrt(np.sum(diff * diff, axis=1))))


def mcd(x: AudioBuffer, y: AudioBuffer, order: int = 24, cfg: Optional[StftConfig] = None,
        num_mels: int = 80) -> float:
    """Mel-cepstral distortion in dB between frame-aligned signals."""
    cfg = cfg or StftConfig(**ANALYSIS_STFT)
    if x.sample_rate_hz != y.sample_rate_hz:
        raise MetricError(f"sample rates differ: {x.sample_rate_hz} vs {y.sample_rate_hz}")
    return mcd_from_cepstra(
        mel_cepstrum(x, cfg, order, num_mels=num_mels),
        mel_cepstrum(y, cfg, order, num_mels=num_mels),
    )


def f0_metrics(x: AudioBuffer, y: AudioBuffer, f0cfg: Optional[F0Config] = None) -> F0Metrics:
    """F0 RMSE over all frames (unvoiced frames count as 0 Hz) and U/V error rate."""
    f0cfg = f0cfg or F0Config()
    if x.sample_rate_hz != y.sample_rate_hz:
        raise MetricError(f"sample rates differ: {x.sample_rate_hz} vs {y.sample_rate_hz}")
    tx = estimate_f0(x, **f0cfg.model_dump())
    ty = estimate_f0(y, **f0cfg.model_dump())
    if abs(len(tx) - len(ty)) > 1:
        raise MetricError(f"F0 frame counts differ by more than one: {len(tx)} vs {len(ty)}")
    frames = min(len(tx), len(ty))
    diff = tx.f0_hz[:frames] - ty.f0_hz[:frames]
    rmse = float(np.sqrt(np.mean(diff * diff)))
    mismatched = np.count_nonzero(tx.voiced[:frames] != ty.voiced[:frames])
    return F0Metrics(rmse_hz=rmse, uv_error_pct=100.0 * mismatched / frames)


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """a . b / (|a| |b|), clipped to [-1, 1]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise MetricError(f"embedding shapes differ: {a.shape} vs {b.shape}")
    norm_a = np.linalg.norm(a)
    norm_b = np.linalg.norm(b)
    if norm_a == 0.0 or norm_b == 0.0:
        raise MetricError("cosine similarity is undefined for a zero vector")
    return float(np.clip(a @ b / (norm_a * norm_b), -1.0, 1.0))


def plda_similarity(model: PldaModel, a: np.ndarray, b: np.ndarray) -> float:
    """PLDA verification score of ``b`` against enrollment ``a``."""
    return plda.plda_score(model, plda.prepare(model, a), plda.prepare(model, b))


def audio_metrics(ref: AudioBuffer, test: AudioBuffer, cfg: EvalConfig) -> dict:
    """All audio-level metrics of one pair, after aligning the test length."""
    test = align_length(test, ref, cfg.lsd_stft.hop)
    f0 = f0_metrics(test, ref, cfg.f0)
    return {
        "lsd_db": lsd(test, ref, cfg.lsd_stft),
        "mcd_db": mcd(test, ref, cfg.mcd_order, cfg.mcd_stft, cfg.num_mels),
        "f0_rmse_hz": f0.rmse_hz,
        "uv_error_pct": f0.uv_error_pct,
    }

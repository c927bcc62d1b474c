"""Signal-processing kernels: STFT, mel analysis, mel-cepstrum, F0 and PQMF."""

import logging
from functools import lru_cache
from typing import NamedTuple, Tuple

import librosa
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import fft as sp_fft
from scipy import optimize, signal

from ..models.audio import AudioBuffer, DspError, F0Track, PqmfBank, PqmfDesignError, SpectralFrameSeries
from ..models.config import StftConfig

logger = logging.getLogger(__name__)

LOG_MEL_FLOOR = 1e-10


# ---------------------------------------------------------------------------
# STFT
# ---------------------------------------------------------------------------

@lru_cache(maxsize=32)
def analysis_window(fft_size: int, window_length: int) -> np.ndarray:
    """Periodic Hann of ``window_length`` zero-padded (centered) to ``fft_size``."""
    window = signal.get_window("hann", window_length, fftbins=True)
    left = (fft_size - window_length) // 2
    padded = np.zeros(fft_size)
    padded[left:left + window_length] = window
    padded.flags.writeable = False
    return padded


def frame_signal(samples: np.ndarray, cfg: StftConfig) -> np.ndarray:
    """Centered frames of length ``fft_size`` every ``hop`` samples (reflection padded)."""
    pad = cfg.fft_size // 2
    padded = np.pad(samples, (pad, pad), mode="reflect")
    return sliding_window_view(padded, cfg.fft_size)[::cfg.hop]


def num_frames(num_samples: int, cfg: StftConfig) -> int:
    padded = num_samples + 2 * (cfg.fft_size // 2)
    return 1 + (padded - cfg.fft_size) // cfg.hop


def stft_magnitude(audio: AudioBuffer, cfg: StftConfig) -> SpectralFrameSeries:
    """Framewise magnitude spectra, shape (frames, fft_size // 2 + 1).

    Any ``fft_size`` is accepted; non-power-of-two sizes go through the general
    length real DFT.
    """
    if len(audio) < cfg.window_length:
        raise DspError(
            f"audio of {len(audio)} samples is shorter than one window ({cfg.window_length})"
        )
    frames = frame_signal(audio.samples, cfg) * analysis_window(cfg.fft_size, cfg.window_length)
    magnitudes = np.abs(sp_fft.rfft(frames, n=cfg.fft_size, axis=1))
    return SpectralFrameSeries(frames=magnitudes, config=cfg, sample_rate_hz=audio.sample_rate_hz)


# ---------------------------------------------------------------------------
# Mel analysis
# ---------------------------------------------------------------------------

def _check_band(sample_rate_hz: int, fmin: float, fmax: float) -> None:
    nyquist = sample_rate_hz / 2.0
    if not (0.0 <= fmin < fmax <= nyquist):
        raise DspError(
            f"invalid mel frequency range: need 0 <= fmin < fmax <= {nyquist:g} Hz, "
            f"got fmin={fmin:g}, fmax={fmax:g}"
        )


@lru_cache(maxsize=32)
def mel_filterbank(sample_rate_hz: int, fft_size: int, num_mels: int,
                   fmin: float, fmax: float) -> np.ndarray:
    """Triangular (Slaney-normalized) mel filters, shape (num_mels, fft_size // 2 + 1)."""
    _check_band(sample_rate_hz, fmin, fmax)
    weights = librosa.filters.mel(
        sr=sample_rate_hz, n_fft=fft_size, n_mels=num_mels, fmin=fmin, fmax=fmax,
        htk=False, norm="slaney", dtype=np.float64,
    )
    weights.flags.writeable = False
    return weights


def mel_spectrogram(audio: AudioBuffer, cfg: StftConfig, num_mels: int = 80,
                    fmin: float = 0.0, fmax: float = None) -> np.ndarray:
    """Natural-log mel magnitudes, shape (frames, num_mels), floored at 1e-10."""
    if fmax is None:
        fmax = audio.sample_rate_hz / 2.0
    _check_band(audio.sample_rate_hz, fmin, fmax)
    weights = mel_filterbank(audio.sample_rate_hz, cfg.fft_size, num_mels, float(fmin), float(fmax))
    spectra = stft_magnitude(audio, cfg).frames
    return np.log(np.maximum(spectra @ weights.T, LOG_MEL_FLOOR))


def mel_cepstrum(audio: AudioBuffer, cfg: StftConfig, order: int, num_mels: int = 80,
                 fmin: float = 0.0, fmax: float = None) -> np.ndarray:
    """Orthonormal DCT-II of log-mel frames truncated to c0..c_order."""
    if order < 1 or order >= num_mels:
        raise DspError(f"cepstral order must be in [1, {num_mels - 1}], got {order}")
    log_mel = mel_spectrogram(audio, cfg, num_mels=num_mels, fmin=fmin, fmax=fmax)
    return sp_fft.dct(log_mel, type=2, norm="ortho", axis=1)[:, :order + 1]


# ---------------------------------------------------------------------------
# F0
# ---------------------------------------------------------------------------

def _pick_peak(nccf: np.ndarray) -> int:
    """Shortest-lag local maximum within 90% of the global maximum."""
    best = int(np.argmax(nccf))
    if nccf[best] <= 0:
        return best
    inner = nccf[1:-1]
    is_peak = (inner > nccf[:-2]) & (inner >= nccf[2:]) & (inner >= 0.9 * nccf[best])
    candidates = np.flatnonzero(is_peak)
    return int(candidates[0]) + 1 if candidates.size else best


def estimate_f0(audio: AudioBuffer, frame_period_ms: float = 5.0, fmin_hz: float = 70.0,
                fmax_hz: float = 400.0, voicing_threshold: float = 0.3,
                rms_floor: float = 1e-4) -> F0Track:
    """Normalized cross-correlation pitch tracker.

    Each frame correlates a window of ``ceil(fs / fmin)`` samples with its shifts
    over lags ``[floor(fs / fmax), ceil(fs / fmin)]``. A frame is voiced when the
    chosen peak reaches ``voicing_threshold`` and the window RMS reaches
    ``rms_floor`` (full scale 1.0). The peak lag is refined by parabolic
    interpolation. Frames start every ``frame_period_ms`` and lie fully inside
    the signal.
    """
    fs = audio.sample_rate_hz
    if not (0.0 < fmin_hz < fmax_hz < fs / 2.0):
        raise DspError(
            f"invalid F0 search range: need 0 < fmin < fmax < {fs / 2.0:g} Hz, "
            f"got {fmin_hz:g}..{fmax_hz:g}"
        )
    min_lag = max(2, int(np.floor(fs / fmax_hz)))
    max_lag = int(np.ceil(fs / fmin_hz))
    window = max_lag
    segment = window + max_lag
    hop = max(1, int(round(fs * frame_period_ms / 1000.0)))
    if len(audio) < segment:
        raise DspError(f"audio of {len(audio)} samples is shorter than one F0 frame ({segment})")

    count = 1 + (len(audio) - segment) // hop
    segments = sliding_window_view(audio.samples, segment)[::hop][:count]

    f0 = np.zeros(count)
    voiced = np.zeros(count, dtype=bool)
    for t, seg in enumerate(segments):
        head = seg[:window]
        energy = float(head @ head)
        if np.sqrt(energy / window) < rms_floor:
            continue
        cumulative = np.concatenate(([0.0], np.cumsum(seg * seg)))
        lags = np.arange(min_lag, max_lag + 1)
        shifted_energy = cumulative[lags + window] - cumulative[lags]
        products = signal.correlate(seg, head, mode="valid")[min_lag:max_lag + 1]
        denom = np.sqrt(energy * np.maximum(shifted_energy, 0.0))
        nccf = np.divide(products, denom, out=np.zeros_like(products), where=denom > 0)

        i = _pick_peak(nccf)
        if nccf[i] < voicing_threshold:
            continue
        lag = float(lags[i])
        if 0 < i < len(nccf) - 1:
            curvature = nccf[i - 1] - 2.0 * nccf[i] + nccf[i + 1]
            if curvature < 0:
                lag += 0.5 * (nccf[i - 1] - nccf[i + 1]) / curvature
        f0[t] = float(np.clip(fs / lag, fmin_hz, fmax_hz))
        voiced[t] = True

    logger.debug(f"F0 track: {count} frames, {int(voiced.sum())} voiced")
    return F0Track(f0_hz=f0, voiced=voiced, frame_period_ms=frame_period_ms)


# ---------------------------------------------------------------------------
# PQMF
# ---------------------------------------------------------------------------

def prototype_filter(taps: int, cutoff: float, kaiser_beta: float) -> np.ndarray:
    """Kaiser-windowed lowpass of ``taps + 1`` coefficients; ``cutoff`` in cycles/sample."""
    omega_c = 2.0 * np.pi * cutoff
    n = np.arange(taps + 1) - 0.5 * taps
    with np.errstate(invalid="ignore", divide="ignore"):
        ideal = np.sin(omega_c * n) / (np.pi * n)
    ideal[taps // 2] = omega_c / np.pi
    return ideal * signal.windows.kaiser(taps + 1, kaiser_beta)


def cosine_modulate(prototype: np.ndarray, num_bands: int) -> Tuple[np.ndarray, np.ndarray]:
    """Analysis and synthesis filters, each (num_bands, taps + 1)."""
    taps = prototype.shape[0] - 1
    n = np.arange(taps + 1) - 0.5 * taps
    analysis = np.zeros((num_bands, taps + 1))
    synthesis = np.zeros((num_bands, taps + 1))
    for k in range(num_bands):
        phase = (2 * k + 1) * np.pi / (2 * num_bands) * n
        shift = (-1) ** k * np.pi / 4
        analysis[k] = 2.0 * prototype * np.cos(phase + shift)
        synthesis[k] = 2.0 * prototype * np.cos(phase - shift)
    return analysis, synthesis


def reconstruction_deviation(analysis: np.ndarray, synthesis: np.ndarray,
                             grid_size: int = 8192) -> float:
    """Max deviation from unity of the overall analysis-synthesis magnitude response."""
    overall = sum(np.convolve(h, f) for h, f in zip(analysis, synthesis))
    response = np.abs(sp_fft.rfft(overall, n=grid_size))
    return float(np.max(np.abs(response - 1.0)))


def design_pqmf(num_bands: int = 5, taps: int = 62, kaiser_beta: float = 9.0) -> PqmfBank:
    """Cosine-modulated filterbank whose prototype cutoff minimizes reconstruction error.

    A coarse scan over ``(0, 1 / (2 * num_bands))`` brackets the minimum, then a
    golden-section search refines it.
    """
    if num_bands < 2:
        raise PqmfDesignError(f"num_bands must be at least 2, got {num_bands}")
    if taps < 2 or taps % 2:
        raise PqmfDesignError(f"taps must be a positive even number, got {taps}")

    def objective(cutoff: float) -> float:
        return reconstruction_deviation(*cosine_modulate(prototype_filter(taps, cutoff, kaiser_beta), num_bands))

    upper = 1.0 / (2 * num_bands)
    grid = np.linspace(0.02 * upper, 0.98 * upper, 49)
    values = np.array([objective(c) for c in grid])
    best = int(np.argmin(values))
    if best in (0, len(grid) - 1) or not (values[best] < values[best - 1] and values[best] < values[best + 1]):
        raise PqmfDesignError(
            f"could not bracket a minimum of the reconstruction error for "
            f"taps={taps}, beta={kaiser_beta} (best scan point {grid[best]:.5f})"
        )
    try:
        result = optimize.minimize_scalar(
            objective, bracket=(grid[best - 1], grid[best], grid[best + 1]),
            method="golden", tol=1e-8,
        )
    except ValueError as e:
        raise PqmfDesignError(f"golden-section search failed: {e}") from e
    cutoff = float(result.x)
    if not (0.0 < cutoff < upper) or not np.isfinite(result.fun):
        raise PqmfDesignError(f"optimized cutoff {cutoff} left the search interval (0, {upper})")

    analysis, synthesis = cosine_modulate(prototype_filter(taps, cutoff, kaiser_beta), num_bands)
    analysis.flags.writeable = False
    synthesis.flags.writeable = False
    logger.info(
        f"Designed {num_bands}-band PQMF: taps={taps}, beta={kaiser_beta}, "
        f"cutoff={cutoff:.6f}, deviation={result.fun:.3e}"
    )
    return PqmfBank(
        num_bands=num_bands, taps=taps, kaiser_beta=kaiser_beta, cutoff=cutoff,
        analysis_filters=analysis, synthesis_filters=synthesis, objective=float(result.fun),
    )


def pqmf_analyze(bank: PqmfBank, audio: AudioBuffer) -> np.ndarray:
    """Subband signals, shape (num_bands, ceil(N / num_bands)).

    Filtering is centered: equivalent to ``taps / 2`` leading zeros followed by a
    causal filter, keeping samples 0..N-1 before decimation.
    """
    n = len(audio)
    if n == 0:
        raise DspError("cannot analyze empty audio")
    half = bank.taps // 2
    length = -(-n // bank.num_bands)
    subbands = np.zeros((bank.num_bands, length))
    for k, h in enumerate(bank.analysis_filters):
        filtered = np.convolve(audio.samples, h)[half:half + n]
        subbands[k] = filtered[::bank.num_bands]
    return subbands


def pqmf_synthesize(bank: PqmfBank, subbands: np.ndarray, sample_rate_hz: int) -> AudioBuffer:
    """Fullband signal of ``num_bands * L`` samples from (num_bands, L) subbands."""
    subbands = np.asarray(subbands, dtype=np.float64)
    if subbands.ndim != 2 or subbands.shape[0] != bank.num_bands:
        raise DspError(
            f"expected {bank.num_bands} subbands, got array of shape {subbands.shape}"
        )
    half = bank.taps // 2
    length = subbands.shape[1] * bank.num_bands
    output = np.zeros(length)
    for k, f in enumerate(bank.synthesis_filters):
        upsampled = np.zeros(length)
        upsampled[::bank.num_bands] = subbands[k] * bank.num_bands
        output += np.convolve(upsampled, f)[half:half + length]
    return AudioBuffer(output, sample_rate_hz)


class RoundTrip(NamedTuple):
    snr_db: float
    delay: int


def pqmf_roundtrip_snr(bank: PqmfBank, audio: AudioBuffer) -> RoundTrip:
    """Analyze-synthesize SNR after integer delay alignment and edge trimming.

    The delay is searched within +/- taps; ``taps`` samples are dropped at each end.
    """
    n = len(audio)
    if n <= 4 * bank.taps:
        raise DspError(f"round-trip measurement needs more than {4 * bank.taps} samples, got {n}")
    reconstructed = pqmf_synthesize(bank, pqmf_analyze(bank, audio), audio.sample_rate_hz).samples[:n]
    reference = audio.samples[bank.taps:n - bank.taps]
    power = float(reference @ reference)
    if power == 0.0:
        raise DspError("round-trip SNR is undefined for a silent signal")

    best = RoundTrip(snr_db=-np.inf, delay=0)
    for delay in range(-bank.taps, bank.taps + 1):
        aligned = reconstructed[bank.taps + delay:n - bank.taps + delay]
        error = reference - aligned
        noise = float(error @ error)
        snr = np.inf if noise == 0.0 else 10.0 * np.log10(power / noise)
        if snr > best.snr_db:
            best = RoundTrip(snr_db=float(snr), delay=delay)
    return best

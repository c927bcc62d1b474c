"""RIFF WAV input/output through soundfile (mono, 16-bit PCM or 32-bit float)."""

import io
import logging
from typing import Optional

import numpy as np
import soundfile as sf

from ..models.audio import AudioBuffer, AudioFormatError
from .base import StorageBackend
from .local_storage import LocalStorageBackend

logger = logging.getLogger(__name__)

SUPPORTED_SUBTYPES = ("PCM_16", "FLOAT")


def decode_wav(data: bytes, source: str = "audio") -> AudioBuffer:
    try:
        with sf.SoundFile(io.BytesIO(data)) as handle:
            if handle.format != "WAV":
                raise AudioFormatError(f"{source}: expected a RIFF WAV file, got {handle.format}")
            if handle.subtype not in SUPPORTED_SUBTYPES:
                raise AudioFormatError(
                    f"{source}: unsupported sample format {handle.subtype} "
                    f"(expected {' or '.join(SUPPORTED_SUBTYPES)})"
                )
            if handle.channels != 1:
                raise AudioFormatError(f"{source}: expected mono audio, got {handle.channels} channels")
            samples = handle.read(dtype="float64", always_2d=True)[:, 0]
            rate = handle.samplerate
    except RuntimeError as e:
        # soundfile reports undecodable input as a RuntimeError subclass
        raise AudioFormatError(f"{source}: cannot decode audio: {e}") from None
    return AudioBuffer(samples, rate)


def encode_wav(audio: AudioBuffer, subtype: str = "FLOAT") -> bytes:
    if subtype not in SUPPORTED_SUBTYPES:
        raise AudioFormatError(f"unsupported sample format {subtype}")
    samples = audio.samples
    if subtype == "PCM_16":
        peak = float(np.max(np.abs(samples))) if len(audio) else 0.0
        if peak > 1.0:
            logger.warning(f"Clipping audio with peak {peak:.3f} to 16-bit range")
            samples = np.clip(samples, -1.0, 1.0)
    buffer = io.BytesIO()
    sf.write(buffer, samples, audio.sample_rate_hz, subtype=subtype, format="WAV")
    return buffer.getvalue()


def read_wav(path: str, storage: Optional[StorageBackend] = None) -> AudioBuffer:
    """Read a mono WAV file as float64 samples in [-1, 1)."""
    storage = storage or LocalStorageBackend()
    audio = decode_wav(storage.get_object(path).content, source=path)
    logger.debug(f"Read {len(audio)} samples at {audio.sample_rate_hz} Hz from {path}")
    return audio


def write_wav(audio: AudioBuffer, path: str, subtype: str = "FLOAT",
              storage: Optional[StorageBackend] = None) -> None:
    storage = storage or LocalStorageBackend()
    storage.put_object(path, encode_wav(audio, subtype))

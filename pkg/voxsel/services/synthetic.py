"""Seeded synthetic embedding pools and PLDA models for desk-scale experiments.

Speakers are isotropic Gaussian clusters: each speaker centre is drawn from
N(0, separation^2 I) and its utterances from N(centre, spread^2 I).
"""

import logging
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from ..core.plda import build_model
from ..models.embedding import EmbeddingError, EmbeddingPool, UtteranceRecord
from ..models.scoring import PldaModel

logger = logging.getLogger(__name__)

DEFAULT_TAGS = ("f", "m")


@dataclass(frozen=True)
class SyntheticCorpus:
    pool: EmbeddingPool
    centres: np.ndarray  # (num_speakers, dim), row i belongs to speaker_ids[i]
    speaker_ids: List[str]


def _speaker_id(index: int) -> str:
    return f"spk{index:04d}"


def generate_synthetic_pool(num_speakers: int, utterances_per_speaker: int, dim: int,
                            seed: int = 0, spread: float = 0.3, separation: float = 3.0,
                            tags: Sequence[str] = DEFAULT_TAGS) -> SyntheticCorpus:
    """Gaussian speaker clusters; speaker ``i`` is tagged ``tags[i % len(tags)]``."""
    if num_speakers < 1 or utterances_per_speaker < 1 or dim < 1:
        raise EmbeddingError(
            f"synthetic pool needs positive sizes, got speakers={num_speakers}, "
            f"utterances={utterances_per_speaker}, dim={dim}"
        )
    rng = np.random.default_rng(seed)
    centres = rng.normal(0.0, separation, size=(num_speakers, dim))
    noise = rng.normal(0.0, spread, size=(num_speakers, utterances_per_speaker, dim))

    speaker_ids = [_speaker_id(i) for i in range(num_speakers)]
    records = []
    for i, speaker in enumerate(speaker_ids):
        tag = tags[i % len(tags)] if tags else None
        for j in range(utterances_per_speaker):
            records.append(UtteranceRecord(
                speaker_id=speaker,
                utterance_id=f"{speaker}_u{j:04d}",
                embedding=centres[i] + noise[i, j],
                tag=tag,
            ))
    pool = EmbeddingPool.from_records(records, dim)
    logger.info(f"Generated synthetic pool: {num_speakers} speakers x {utterances_per_speaker} utterances, dim {dim}")
    return SyntheticCorpus(pool=pool, centres=centres, speaker_ids=speaker_ids)


def generate_target_records(centre: np.ndarray, count: int, seed: int = 0, spread: float = 0.3,
                            speaker_id: str = "target") -> List[UtteranceRecord]:
    """Target-speaker utterances drawn around ``centre``."""
    if count < 1:
        raise EmbeddingError(f"target count must be positive, got {count}")
    rng = np.random.default_rng(seed)
    centre = np.asarray(centre, dtype=np.float64)
    samples = centre + rng.normal(0.0, spread, size=(count, centre.shape[0]))
    return [
        UtteranceRecord(speaker_id=speaker_id, utterance_id=f"{speaker_id}_t{j:02d}", embedding=row)
        for j, row in enumerate(samples)
    ]


def generate_synthetic_plda(dim: int, seed: int = 0) -> PldaModel:
    """A valid model: small random mean, well-conditioned transform, psi in [0.5, 4]."""
    if dim < 1:
        raise EmbeddingError(f"model dimension must be positive, got {dim}")
    rng = np.random.default_rng(seed)
    rotation, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    scales = rng.uniform(0.5, 2.0, size=dim)
    return build_model(
        mean=rng.normal(0.0, 0.1, size=dim),
        transform=rotation * scales[:, np.newaxis],
        psi=rng.uniform(0.5, 4.0, size=dim),
    )

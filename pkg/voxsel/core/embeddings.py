"""Speaker-level aggregation of utterance embeddings."""

import logging
from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np

from ..models.embedding import (
    DimensionMismatchError, EmbeddingPool, EmptyPoolError, UtteranceRecord,
)

logger = logging.getLogger(__name__)


def compensated_mean(rows: np.ndarray) -> np.ndarray:
    """Componentwise mean of ``rows`` (n, D) using Neumaier-compensated summation."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise EmptyPoolError("cannot average an empty set of embeddings")
    total = np.zeros(rows.shape[1])
    compensation = np.zeros(rows.shape[1])
    for row in rows:
        updated = total + row
        big = np.abs(total) >= np.abs(row)
        compensation += np.where(big, (total - updated) + row, (row - updated) + total)
        total = updated
    return (total + compensation) / rows.shape[0]


def speaker_mean(pool: EmbeddingPool, speaker_id: str) -> np.ndarray:
    """Average embedding of one speaker's utterances."""
    return compensated_mean(pool.matrix[pool.rows_for(speaker_id)])


def target_embedding(records: Sequence[UtteranceRecord]) -> np.ndarray:
    """Average embedding of the target speaker's available utterances."""
    if not records:
        raise EmptyPoolError("target embedding needs at least one record")
    dimension = records[0].dimension
    for position, record in enumerate(records, start=1):
        if record.dimension != dimension:
            raise DimensionMismatchError(
                f"target record {position} ({record.key_str}) has dimension "
                f"{record.dimension}, expected {dimension}"
            )
    return compensated_mean(np.vstack([record.embedding for record in records]))


def speaker_divergence(pool: EmbeddingPool, speaker_id: str) -> float:
    """RMS Euclidean distance of a speaker's embeddings from their mean."""
    rows = pool.matrix[pool.rows_for(speaker_id)]
    centered = rows - compensated_mean(rows)
    return float(np.sqrt(np.mean(np.sum(centered * centered, axis=1))))


@dataclass(frozen=True)
class SpeakerStatistics:
    """Per-speaker mean and divergence plus each record's distance to its mean.

    ``utterance_distance`` is aligned with the pool's record order.
    """
    means: Dict[str, np.ndarray]
    divergence: Dict[str, float]
    utterance_distance: np.ndarray

    @classmethod
    def compute(cls, pool: EmbeddingPool) -> "SpeakerStatistics":
        means: Dict[str, np.ndarray] = {}
        divergence: Dict[str, float] = {}
        distances = np.zeros(len(pool))
        for speaker in pool.speakers:
            rows = pool.rows_for(speaker)
            embeddings = pool.matrix[rows]
            mean = compensated_mean(embeddings)
            centered = embeddings - mean
            squared = np.sum(centered * centered, axis=1)
            means[speaker] = mean
            divergence[speaker] = float(np.sqrt(np.mean(squared)))
            distances[rows] = np.sqrt(squared)
        logger.debug(f"Computed statistics for {len(means)} speakers over {len(pool)} utterances")
        return cls(means=means, divergence=divergence, utterance_distance=distances)

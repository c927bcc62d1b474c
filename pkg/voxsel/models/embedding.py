"""Embedding data models: utterance records and the candidate pool."""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from ..errors import VoxselError


class EmbeddingError(VoxselError):
    """Base exception for embedding pool operations"""
    module = "embeddings"


class PoolFormatError(EmbeddingError):
    """Raised when a pool file cannot be parsed"""
    pass


class DimensionMismatchError(EmbeddingError):
    """Raised when embeddings of different dimensions are mixed"""
    pass


class DuplicateRecordError(EmbeddingError):
    """Raised when a (speaker, utterance) key appears twice"""
    pass


class UnknownSpeakerError(EmbeddingError):
    """Raised when a speaker id is not present in the pool"""
    pass


class EmptyPoolError(EmbeddingError):
    """Raised when an operation needs at least one record"""
    pass


def as_embedding(values: Iterable[float], where: str = "embedding") -> np.ndarray:
    """Convert values to a read-only float64 vector, rejecting NaN/Inf."""
    vector = np.array(values, dtype=np.float64)
    if vector.ndim != 1 or vector.size == 0:
        raise EmbeddingError(f"{where}: expected a non-empty 1-D vector, got shape {vector.shape}")
    if not np.all(np.isfinite(vector)):
        raise EmbeddingError(f"{where}: embedding contains NaN or Inf")
    vector.flags.writeable = False
    return vector


@dataclass(frozen=True)
class UtteranceRecord:
    """One utterance's speaker embedding plus its identifiers."""
    speaker_id: str
    utterance_id: str
    embedding: np.ndarray
    duration_seconds: Optional[float] = None
    tag: Optional[str] = None

    def __post_init__(self):
        if not self.speaker_id:
            raise EmbeddingError("speaker_id must be non-empty")
        if not self.utterance_id:
            raise EmbeddingError("utterance_id must be non-empty")
        object.__setattr__(self, "embedding", as_embedding(self.embedding, self.key_str))
        if self.duration_seconds is not None and not self.duration_seconds >= 0:
            raise EmbeddingError(
                f"{self.key_str}: duration must be non-negative, got {self.duration_seconds}"
            )

    @property
    def key(self) -> Tuple[str, str]:
        return (self.speaker_id, self.utterance_id)

    @property
    def key_str(self) -> str:
        return f"{self.speaker_id}/{self.utterance_id}"

    @property
    def dimension(self) -> int:
        return int(self.embedding.shape[0])


@dataclass(frozen=True)
class EmbeddingPool:
    """Immutable collection of utterance records sharing one embedding dimension.

    ``matrix`` stacks the embeddings in record order; ``speaker_rows`` maps each
    speaker to the row indices of its utterances.
    """
    dimension: int
    records: Tuple[UtteranceRecord, ...]
    speaker_index: Dict[str, Tuple[str, ...]]
    matrix: np.ndarray = field(repr=False)
    speaker_rows: Dict[str, np.ndarray] = field(repr=False)

    @classmethod
    def from_records(cls, records: Iterable[UtteranceRecord],
                     dimension: Optional[int] = None) -> "EmbeddingPool":
        """Validate records and build the pool indices.

        The dimension is taken from the first record unless given. Errors name the
        1-based record position.
        """
        records = tuple(records)
        if not records:
            raise EmptyPoolError("empty pool")
        if dimension is None:
            dimension = records[0].dimension
        if dimension <= 0:
            raise DimensionMismatchError(f"pool dimension must be positive, got {dimension}")

        seen = set()
        rows: Dict[str, List[int]] = {}
        for position, record in enumerate(records, start=1):
            if record.dimension != dimension:
                raise DimensionMismatchError(
                    f"record {position} ({record.key_str}) has dimension {record.dimension}, "
                    f"expected {dimension}"
                )
            if record.key in seen:
                raise DuplicateRecordError(
                    f"record {position}: duplicate key {record.key_str}"
                )
            seen.add(record.key)
            rows.setdefault(record.speaker_id, []).append(position - 1)

        matrix = np.vstack([record.embedding for record in records]).astype(np.float64)
        matrix.flags.writeable = False
        speaker_rows = {}
        for speaker, indices in rows.items():
            index_array = np.asarray(indices, dtype=np.int64)
            index_array.flags.writeable = False
            speaker_rows[speaker] = index_array
        speaker_index = {
            speaker: tuple(records[i].utterance_id for i in indices)
            for speaker, indices in rows.items()
        }
        return cls(
            dimension=dimension,
            records=records,
            speaker_index=speaker_index,
            matrix=matrix,
            speaker_rows=speaker_rows,
        )

    def __len__(self) -> int:
        return len(self.records)

    @property
    def speakers(self) -> List[str]:
        return sorted(self.speaker_index)

    def rows_for(self, speaker_id: str) -> np.ndarray:
        try:
            return self.speaker_rows[speaker_id]
        except KeyError:
            raise UnknownSpeakerError(f"unknown speaker id '{speaker_id}'") from None

    def without_speakers(self, speaker_ids: Iterable[str]) -> "EmbeddingPool":
        """Pool with every utterance of the given speakers removed."""
        excluded = set(speaker_ids)
        kept = [record for record in self.records if record.speaker_id not in excluded]
        if not kept:
            raise EmptyPoolError("empty pool after exclusion")
        return EmbeddingPool.from_records(kept, self.dimension)

    def with_tag(self, tag: str) -> "EmbeddingPool":
        """Pool restricted to records carrying ``tag``."""
        kept = [record for record in self.records if record.tag == tag]
        if not kept:
            raise EmptyPoolError(f"no records tagged '{tag}'")
        return EmbeddingPool.from_records(kept, self.dimension)

    def find(self, embedding_id: str) -> UtteranceRecord:
        """Look up a record by ``speaker/utterance`` or by a unique utterance id."""
        if "/" in embedding_id:
            speaker, utterance = embedding_id.split("/", 1)
            for record in self.records:
                if record.key == (speaker, utterance):
                    return record
            raise EmbeddingError(f"no record '{embedding_id}' in pool")
        matches = [record for record in self.records if record.utterance_id == embedding_id]
        if not matches:
            raise EmbeddingError(f"no record with utterance id '{embedding_id}' in pool")
        if len(matches) > 1:
            raise EmbeddingError(
                f"utterance id '{embedding_id}' is ambiguous; use speaker/utterance"
            )
        return matches[0]

"""Evaluation pair lists: ``ref_path<TAB>test_path[<TAB>ref_emb_id<TAB>test_emb_id]`` per line."""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

from ..core.metrics import MetricError
from ..models.embedding import EmbeddingPool
from ..models.evaluation import EvalPair
from .audio_io import read_wav
from .base import StorageBackend
from .local_storage import LocalStorageBackend

logger = logging.getLogger(__name__)

# Placeholder for a missing audio path
ABSENT = "-"


@dataclass(frozen=True)
class PairSpec:
    line_number: int
    ref_path: Optional[str]
    test_path: Optional[str]
    ref_embedding_id: Optional[str] = None
    test_embedding_id: Optional[str] = None

    @property
    def name(self) -> str:
        return self.test_path or self.test_embedding_id or f"pair{self.line_number}"


def parse_pairs(text: str, source: str = "pairs") -> List[PairSpec]:
    """Parse pair lines; blank lines and ``#`` comments are skipped, ``-`` marks absent audio."""
    specs = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.rstrip("\r\n").split("\t")
        if len(fields) not in (2, 4):
            raise MetricError(
                f"{source} line {line_number}: expected 2 or 4 tab-separated fields, got {len(fields)}"
            )
        fields = [field.strip() for field in fields]
        ref_path, test_path = (None if f == ABSENT else f for f in fields[:2])
        if (ref_path is None) != (test_path is None):
            raise MetricError(f"{source} line {line_number}: give both audio paths or neither")
        ref_id = test_id = None
        if len(fields) == 4:
            ref_id, test_id = fields[2], fields[3]
            if not ref_id or not test_id:
                raise MetricError(f"{source} line {line_number}: empty embedding id")
        specs.append(PairSpec(line_number, ref_path, test_path, ref_id, test_id))
    return specs


def load_pairs(path: str, embeddings: Optional[EmbeddingPool] = None,
               storage: Optional[StorageBackend] = None) -> List[EvalPair]:
    """Read a pair list and resolve its audio files and embedding ids.

    Relative audio paths resolve against the directory of the pair list.
    """
    storage = storage or LocalStorageBackend()
    specs = parse_pairs(storage.get_text(path), source=path)
    base_dir = Path(path).parent

    pairs = []
    for spec in specs:
        ref_audio = test_audio = ref_embedding = test_embedding = None
        if spec.ref_path is not None:
            ref_audio = read_wav(str(base_dir / spec.ref_path), storage)
            test_audio = read_wav(str(base_dir / spec.test_path), storage)
        if spec.ref_embedding_id is not None:
            if embeddings is None:
                raise MetricError(
                    f"{path} line {spec.line_number}: names embeddings but no embedding pool was given"
                )
            ref_embedding = embeddings.find(spec.ref_embedding_id).embedding
            test_embedding = embeddings.find(spec.test_embedding_id).embedding
        pairs.append(EvalPair(
            name=spec.name,
            ref_audio=ref_audio,
            test_audio=test_audio,
            ref_embedding=ref_embedding,
            test_embedding=test_embedding,
        ))
    logger.info(f"Loaded {len(pairs)} evaluation pairs from {path}")
    return pairs

"""
Embedding pool codecs: line-delimited JSON and the XVB1 binary layout.

xvecbin layout (little-endian)::

    b"XVB1" | u32 dimension | u32 record count
    per record: u16 len + UTF-8 speaker id | u16 len + UTF-8 utterance id | D x float32
"""

import dataclasses
import json
import logging
import struct
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from ..models.embedding import (
    DimensionMismatchError, EmbeddingError, EmbeddingPool, EmptyPoolError,
    PoolFormatError, UtteranceRecord, as_embedding
)
from .base import StorageBackend
from .local_storage import LocalStorageBackend

logger = logging.getLogger(__name__)

FORMAT_JSONL = "jsonl"
FORMAT_XVECBIN = "xvecbin"
POOL_FORMATS = (FORMAT_JSONL, FORMAT_XVECBIN)

XVB_MAGIC = b"XVB1"
_HEADER = struct.Struct("<4sII")
_ID_LENGTH = struct.Struct("<H")

_SUFFIX_FORMATS = {
    ".jsonl": FORMAT_JSONL,
    ".json": FORMAT_JSONL,
    ".xvb": FORMAT_XVECBIN,
    ".xvecbin": FORMAT_XVECBIN,
}


def infer_format(path: str) -> str:
    """Pool format implied by the file suffix."""
    suffix = Path(path).suffix.lower()
    try:
        return _SUFFIX_FORMATS[suffix]
    except KeyError:
        raise PoolFormatError(
            f"cannot infer pool format from '{path}'; use a .jsonl or .xvb suffix or pass a format"
        ) from None


def _resolve_format(path: str, format: Optional[str]) -> str:
    if format is None:
        return infer_format(path)
    if format not in POOL_FORMATS:
        raise PoolFormatError(f"unknown pool format '{format}' (expected one of {', '.join(POOL_FORMATS)})")
    return format


def parse_jsonl(text: str) -> EmbeddingPool:
    """Parse one JSON object per line; blank lines are skipped."""
    records: List[UtteranceRecord] = []
    dimension = None
    for line_number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        position = len(records) + 1
        where = f"line {line_number} (record {position})"
        try:
            item = json.loads(line)
        except json.JSONDecodeError as e:
            raise PoolFormatError(f"{where}: invalid JSON: {e.msg}") from None
        if not isinstance(item, dict):
            raise PoolFormatError(f"{where}: expected a JSON object")
        missing = [name for name in ("speaker", "utterance", "embedding") if name not in item]
        if missing:
            raise PoolFormatError(f"{where}: missing field(s) {', '.join(missing)}")

        try:
            embedding = as_embedding(item["embedding"], where)
        except (TypeError, ValueError) as e:
            raise PoolFormatError(f"{where}: embedding is not a list of numbers: {e}") from None
        if dimension is None:
            dimension = embedding.shape[0]
        elif embedding.shape[0] != dimension:
            raise DimensionMismatchError(
                f"{where}: dimension {embedding.shape[0]}, expected {dimension}"
            )

        duration = item.get("duration")
        tag = item.get("gender")
        try:
            records.append(UtteranceRecord(
                speaker_id=str(item["speaker"]),
                utterance_id=str(item["utterance"]),
                embedding=embedding,
                duration_seconds=None if duration is None else float(duration),
                tag=None if tag is None else str(tag),
            ))
        except (TypeError, ValueError) as e:
            raise PoolFormatError(f"{where}: {e}") from None
        except EmbeddingError as e:
            raise type(e)(f"{where}: {e}") from None

    if not records:
        raise EmptyPoolError("empty pool")
    return EmbeddingPool.from_records(records, dimension)


def _read_id(data: bytes, offset: int, where: str):
    if offset + _ID_LENGTH.size > len(data):
        raise PoolFormatError(f"{where}: truncated id length")
    (length,) = _ID_LENGTH.unpack_from(data, offset)
    offset += _ID_LENGTH.size
    if offset + length > len(data):
        raise PoolFormatError(f"{where}: truncated id")
    try:
        value = data[offset:offset + length].decode("utf-8")
    except UnicodeDecodeError as e:
        raise PoolFormatError(f"{where}: id is not valid UTF-8: {e}") from None
    return value, offset + length


def parse_xvecbin(data: bytes) -> EmbeddingPool:
    """Decode the XVB1 binary layout."""
    if not data:
        raise EmptyPoolError("empty pool")
    if len(data) < _HEADER.size:
        raise PoolFormatError("truncated header")
    magic, dimension, count = _HEADER.unpack_from(data, 0)
    if magic != XVB_MAGIC:
        raise PoolFormatError(f"bad magic {magic!r}, expected {XVB_MAGIC!r}")
    if count == 0:
        raise EmptyPoolError("empty pool")
    if dimension == 0:
        raise PoolFormatError("header declares dimension 0")

    vector_bytes = 4 * dimension
    offset = _HEADER.size
    records: List[UtteranceRecord] = []
    for position in range(1, count + 1):
        where = f"record {position}"
        speaker, offset = _read_id(data, offset, where)
        utterance, offset = _read_id(data, offset, where)
        if offset + vector_bytes > len(data):
            raise PoolFormatError(f"{where}: truncated embedding")
        values = np.frombuffer(data, dtype="<f4", count=dimension, offset=offset)
        offset += vector_bytes
        embedding = as_embedding(values, where)
        try:
            records.append(UtteranceRecord(speaker, utterance, embedding))
        except EmbeddingError as e:
            raise type(e)(f"{where}: {e}") from None

    if offset != len(data):
        raise PoolFormatError(f"{len(data) - offset} trailing bytes after record {count}")
    return EmbeddingPool.from_records(records, dimension)


def encode_jsonl(pool: EmbeddingPool) -> str:
    lines = []
    for record in pool.records:
        item = {
            "speaker": record.speaker_id,
            "utterance": record.utterance_id,
            "embedding": record.embedding.tolist(),
        }
        if record.duration_seconds is not None:
            item["duration"] = record.duration_seconds
        if record.tag is not None:
            item["gender"] = record.tag
        lines.append(json.dumps(item))
    return "\n".join(lines) + "\n"


def encode_xvecbin(pool: EmbeddingPool) -> bytes:
    """Encode to XVB1; embeddings are stored as float32 and tags are not kept."""
    chunks = [_HEADER.pack(XVB_MAGIC, pool.dimension, len(pool))]
    for record in pool.records:
        for identifier in (record.speaker_id, record.utterance_id):
            encoded = identifier.encode("utf-8")
            if len(encoded) > 0xFFFF:
                raise PoolFormatError(f"{record.key_str}: id longer than 65535 bytes")
            chunks.append(_ID_LENGTH.pack(len(encoded)))
            chunks.append(encoded)
        chunks.append(record.embedding.astype("<f4").tobytes())
    return b"".join(chunks)


def load_pool(path: str, format: Optional[str] = None,
              storage: Optional[StorageBackend] = None) -> EmbeddingPool:
    """Load an embedding pool; the format defaults to the one implied by the suffix."""
    format = _resolve_format(path, format)
    storage = storage or LocalStorageBackend()
    obj = storage.get_object(path)
    if format == FORMAT_JSONL:
        pool = parse_jsonl(obj.text)
    else:
        pool = parse_xvecbin(obj.content)
    logger.info(
        f"Loaded {len(pool)} records of {len(pool.speaker_index)} speakers (dim {pool.dimension}) from {path}"
    )
    return pool


def save_pool(pool: EmbeddingPool, path: str, format: Optional[str] = None,
              storage: Optional[StorageBackend] = None) -> None:
    """Write a pool atomically in the requested format."""
    format = _resolve_format(path, format)
    storage = storage or LocalStorageBackend()
    if format == FORMAT_JSONL:
        storage.put_text(path, encode_jsonl(pool))
    else:
        if any(record.tag is not None for record in pool.records):
            logger.debug(f"Tags are not stored in {FORMAT_XVECBIN}; use a spk2gender file for {path}")
        storage.put_object(path, encode_xvecbin(pool))


def load_speaker_tags(path: str, storage: Optional[StorageBackend] = None) -> Dict[str, str]:
    """Read a ``<speaker> <tag>`` per line file (Kaldi spk2gender)."""
    storage = storage or LocalStorageBackend()
    tags: Dict[str, str] = {}
    for line_number, line in enumerate(storage.get_text(path).splitlines(), start=1):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != 2:
            raise PoolFormatError(f"{path} line {line_number}: expected '<speaker> <tag>'")
        tags[fields[0]] = fields[1]
    return tags


def apply_speaker_tags(pool: EmbeddingPool, tags: Dict[str, str]) -> EmbeddingPool:
    """Pool whose records carry the tag of their speaker; unlisted speakers keep theirs."""
    untagged = [speaker for speaker in pool.speakers if speaker not in tags]
    if untagged:
        logger.warning(f"{len(untagged)} speaker(s) have no tag, e.g. '{untagged[0]}'")
    records = [
        dataclasses.replace(record, tag=tags.get(record.speaker_id, record.tag))
        for record in pool.records
    ]
    return EmbeddingPool.from_records(records, pool.dimension)


def load_id_list(path: str, storage: Optional[StorageBackend] = None) -> List[str]:
    """Non-empty, non-comment lines of a text file."""
    storage = storage or LocalStorageBackend()
    ids = []
    for line in storage.get_text(path).splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            ids.append(line)
    return ids

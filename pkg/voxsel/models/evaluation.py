"""Objective evaluation data models."""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from .audio import AudioBuffer

METRIC_NAMES = ("lsd_db", "mcd_db", "f0_rmse_hz", "uv_error_pct", "cos_sim", "plda")


@dataclass(frozen=True)
class EvalPair:
    """Reference/test material for one evaluated utterance; any side may be absent."""
    name: str
    ref_audio: Optional[AudioBuffer] = None
    test_audio: Optional[AudioBuffer] = None
    ref_embedding: Optional[np.ndarray] = None
    test_embedding: Optional[np.ndarray] = None

    @property
    def has_audio(self) -> bool:
        return self.ref_audio is not None and self.test_audio is not None

    @property
    def has_embeddings(self) -> bool:
        return self.ref_embedding is not None and self.test_embedding is not None


@dataclass
class PairMetrics:
    """Metrics of one pair; a metric is ``None`` when its inputs were missing."""
    name: str
    lsd_db: Optional[float] = None
    mcd_db: Optional[float] = None
    f0_rmse_hz: Optional[float] = None
    uv_error_pct: Optional[float] = None
    cos_sim: Optional[float] = None
    plda: Optional[float] = None

    def values(self) -> Dict[str, float]:
        return {name: getattr(self, name) for name in METRIC_NAMES if getattr(self, name) is not None}

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, **self.values()}


@dataclass
class EvalReport:
    """Mean of each metric over the pairs where it was computable."""
    aggregates: Dict[str, float]
    per_pair: List[PairMetrics] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "aggregates": {name: self.aggregates[name] for name in METRIC_NAMES if name in self.aggregates},
            "per_pair": [pair.to_dict() for pair in self.per_pair],
        }

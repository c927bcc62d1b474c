"""Selection data models: scored candidates, statistics and reports."""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from ..errors import VoxselError


class SelectionError(VoxselError):
    """Base exception for data-selection operations"""
    module = "selection"


@dataclass(frozen=True)
class ScoredUtterance:
    """One candidate utterance with every component of its selection score."""
    speaker_id: str
    utterance_id: str
    plda_raw: float
    plda_sigmoid: float
    sigma_n: float
    utt_distance: float
    final_score: float
    tag: Optional[str] = None

    @property
    def key(self) -> Tuple[str, str]:
        return (self.speaker_id, self.utterance_id)

    def sort_key(self) -> Tuple[float, str, str]:
        """Descending score, then ascending speaker and utterance ids."""
        return (-self.final_score, self.speaker_id, self.utterance_id)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ScoredUtterance":
        return cls(
            speaker_id=data["speaker_id"],
            utterance_id=data["utterance_id"],
            plda_raw=float(data["plda_raw"]),
            plda_sigmoid=float(data["plda_sigmoid"]),
            sigma_n=float(data["sigma_n"]),
            utt_distance=float(data["utt_distance"]),
            final_score=float(data["final_score"]),
            tag=data.get("tag"),
        )


@dataclass(frozen=True)
class SelectionStats:
    """Speaker-level statistics of a selected set.

    Overlap percentages are ``None`` when no reference selection was given.
    """
    num_speakers: int
    num_suspected: int
    utterance_overlap_pct: Optional[float] = None
    speaker_overlap_pct: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SelectionStats":
        return cls(
            num_speakers=int(data["num_speakers"]),
            num_suspected=int(data["num_suspected"]),
            utterance_overlap_pct=data.get("utterance_overlap_pct"),
            speaker_overlap_pct=data.get("speaker_overlap_pct"),
        )


@dataclass
class SelectionReport:
    """Ranked candidates, the chosen subset and its statistics."""
    ranked: List[ScoredUtterance]
    selected: List[ScoredUtterance]
    stats: SelectionStats
    threshold_score: float
    thresholds: Dict[int, float] = field(default_factory=dict)

    @property
    def selected_keys(self) -> List[Tuple[str, str]]:
        return [item.key for item in self.selected]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "ranked": [item.to_dict() for item in self.ranked],
            "selected": [item.to_dict() for item in self.selected],
            "stats": self.stats.to_dict(),
            "threshold_score": self.threshold_score,
            "thresholds": {str(k): v for k, v in sorted(self.thresholds.items())},
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SelectionReport":
        return cls(
            ranked=[ScoredUtterance.from_dict(item) for item in data["ranked"]],
            selected=[ScoredUtterance.from_dict(item) for item in data["selected"]],
            stats=SelectionStats.from_dict(data["stats"]),
            threshold_score=float(data["threshold_score"]),
            thresholds={int(k): float(v) for k, v in data.get("thresholds", {}).items()},
        )

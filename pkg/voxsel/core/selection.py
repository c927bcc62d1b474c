"""Relational data-selection criteria and selection statistics.

DC1 ranks candidates by their raw PLDA score against the target. DC2 divides a
temperature-sigmoid of that score by the speaker divergence raised to ``alpha``.
DC3 additionally multiplies the divergence by the utterance's distance to its
speaker mean. Denominator bases are floored at ``epsilon``.
"""

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence

import numpy as np

from ..models.config import Criterion, SelectionConfig
from ..models.embedding import UtteranceRecord
from ..models.selection import ScoredUtterance, SelectionError, SelectionStats

logger = logging.getLogger(__name__)

GROUP_NONE = "none"
GROUP_TAG = "speaker_gender_tag"
UNTAGGED = "unknown"


class ScoreComponents(NamedTuple):
    plda_raw: float
    plda_sigmoid: float
    sigma_n: float
    utt_distance: float
    final_score: float


def sigmoid_scores(plda_raw, c: float) -> np.ndarray:
    """Vectorized 1 / (1 + c * exp(-x)), evaluated without overflow in either tail."""
    if not c > 0:
        raise SelectionError(f"sigmoid constant must be positive, got {c}")
    x = np.atleast_1d(np.asarray(plda_raw, dtype=np.float64))
    out = np.empty_like(x)
    upper = x >= 0
    out[upper] = 1.0 / (1.0 + c * np.exp(-x[upper]))
    lower_exp = np.exp(x[~upper])
    out[~upper] = lower_exp / (lower_exp + c)
    return out


def sigmoid_score(plda_raw: float, c: float) -> float:
    """Temperature sigmoid of one PLDA score."""
    return float(sigmoid_scores(plda_raw, c)[0])


def final_scores(cfg: SelectionConfig, plda_raw, sigma_n, utt_distance) -> np.ndarray:
    """Criterion scores for aligned arrays of components."""
    plda_raw = np.atleast_1d(np.asarray(plda_raw, dtype=np.float64))
    if cfg.criterion is Criterion.DC1:
        return plda_raw.copy()
    sigmoid = sigmoid_scores(plda_raw, cfg.sigmoid_c)
    sigma_n = np.asarray(sigma_n, dtype=np.float64)
    if cfg.criterion is Criterion.DC2:
        base = sigma_n
    else:
        base = sigma_n * np.asarray(utt_distance, dtype=np.float64)
    return sigmoid / np.power(np.maximum(base, cfg.epsilon), cfg.alpha)


def score_utterance(cfg: SelectionConfig, plda_raw: float, sigma_n: float,
                    utt_distance: float) -> ScoreComponents:
    """Score components of one candidate under the configured criterion."""
    if sigma_n < 0 or utt_distance < 0:
        raise SelectionError(
            f"divergences must be non-negative, got sigma_n={sigma_n}, utt_distance={utt_distance}"
        )
    return ScoreComponents(
        plda_raw=float(plda_raw),
        plda_sigmoid=sigmoid_score(plda_raw, cfg.sigmoid_c),
        sigma_n=float(sigma_n),
        utt_distance=float(utt_distance),
        final_score=float(final_scores(cfg, plda_raw, sigma_n, utt_distance)[0]),
    )


def rank_scored(items: Iterable[ScoredUtterance]) -> List[ScoredUtterance]:
    """Order by final score descending, ties by speaker id then utterance id."""
    return sorted(items, key=ScoredUtterance.sort_key)


def selection_stats(selected: Sequence[ScoredUtterance],
                    reference: Optional[Sequence[ScoredUtterance]] = None) -> SelectionStats:
    """Speaker count, suspected utterances and overlap with a reference selection.

    A suspected utterance is the only selection from its speaker. Overlaps are
    ``100 * |intersection| / |reference|`` over (speaker, utterance) keys and over
    speaker ids.
    """
    if not selected:
        raise SelectionError("selection statistics need a non-empty selection")

    per_speaker = Counter(item.speaker_id for item in selected)
    num_suspected = sum(1 for count in per_speaker.values() if count == 1)

    utterance_overlap = speaker_overlap = None
    if reference is not None:
        if not reference:
            raise SelectionError("reference selection is empty")
        ref_keys = {item.key for item in reference}
        ref_speakers = {item.speaker_id for item in reference}
        utterance_overlap = 100.0 * len(ref_keys & {item.key for item in selected}) / len(ref_keys)
        speaker_overlap = 100.0 * len(ref_speakers & set(per_speaker)) / len(ref_speakers)

    return SelectionStats(
        num_speakers=len(per_speaker),
        num_suspected=num_suspected,
        utterance_overlap_pct=utterance_overlap,
        speaker_overlap_pct=speaker_overlap,
    )


def selection_thresholds(ranked: Sequence[ScoredUtterance], ks: Iterable[int]) -> Dict[int, float]:
    """Final score of the last item selected at each size ``k`` (clamped to the pool)."""
    if not ranked:
        raise SelectionError("cannot compute thresholds of an empty ranking")
    thresholds = {}
    for k in ks:
        if k < 1:
            raise SelectionError(f"threshold size must be positive, got {k}")
        thresholds[int(k)] = ranked[min(k, len(ranked)) - 1].final_score
    return thresholds


@dataclass(frozen=True)
class ScoreHistogram:
    """Equal-width bin edges over the raw PLDA score range and counts per group."""
    edges: np.ndarray
    counts: Dict[str, np.ndarray]


def score_histogram(ranked: Sequence[ScoredUtterance], bins: int,
                    group_by: str = GROUP_NONE) -> ScoreHistogram:
    """Histogram of raw PLDA scores, optionally split by metadata tag."""
    if not ranked:
        raise SelectionError("cannot build a histogram of an empty ranking")
    if bins < 1:
        raise SelectionError(f"bins must be positive, got {bins}")
    if group_by not in (GROUP_NONE, GROUP_TAG):
        raise SelectionError(f"unknown grouping '{group_by}'")

    scores = np.array([item.plda_raw for item in ranked], dtype=np.float64)
    _, edges = np.histogram(scores, bins=bins, range=(scores.min(), scores.max()))

    if group_by == GROUP_NONE:
        groups = {"all": scores}
    else:
        tags = np.array([item.tag or UNTAGGED for item in ranked])
        groups = {tag: scores[tags == tag] for tag in sorted(set(tags.tolist()))}

    counts = {name: np.histogram(values, bins=edges)[0] for name, values in groups.items()}
    return ScoreHistogram(edges=edges, counts=counts)


def build_adaptation_list(selected: Sequence[ScoredUtterance],
                          targets: Sequence[UtteranceRecord]) -> List[str]:
    """Utterance ids of the adaptation set: selected candidates then target utterances."""
    entries = [item.utterance_id for item in selected] + [record.utterance_id for record in targets]
    duplicates = [uid for uid, count in Counter(entries).items() if count > 1]
    if duplicates:
        logger.warning(
            f"Adaptation list repeats {len(duplicates)} utterance id(s), e.g. '{duplicates[0]}'"
        )
    return entries

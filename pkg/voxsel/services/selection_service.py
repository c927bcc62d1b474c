"""Candidate ranking over an embedding pool and side-by-side criterion comparison."""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from ..core import plda
from ..core.embeddings import SpeakerStatistics
from ..core.selection import (
    final_scores, rank_scored, selection_stats, selection_thresholds, sigmoid_scores
)
from ..models.config import Criterion, SelectionConfig
from ..models.embedding import DimensionMismatchError, EmbeddingPool
from ..models.scoring import PldaModel, PreparedEmbedding, ZeroVectorError
from ..models.selection import ScoredUtterance, SelectionReport, SelectionStats

logger = logging.getLogger(__name__)

# Fixed so that results do not depend on the worker count.
CHUNK_SIZE = 4096


def _canonical_pool(pool: EmbeddingPool, exclude_speakers: Iterable[str]) -> EmbeddingPool:
    """Drop excluded speakers and order records by (speaker, utterance)."""
    excluded = set(exclude_speakers or ())
    unknown = excluded.difference(pool.speaker_index)
    if unknown:
        logger.warning(f"{len(unknown)} excluded speaker(s) are not in the pool, e.g. '{sorted(unknown)[0]}'")
    if excluded:
        pool = pool.without_speakers(excluded)
    return EmbeddingPool.from_records(sorted(pool.records, key=lambda r: r.key), pool.dimension)


def _prepare_chunk(model: PldaModel, pool: EmbeddingPool, start: int, stop: int) -> np.ndarray:
    try:
        return plda.prepare_many(model, pool.matrix[start:stop])
    except ZeroVectorError:
        for position in range(start, stop):
            try:
                plda.prepare(model, pool.matrix[position])
            except ZeroVectorError:
                record = pool.records[position]
                raise ZeroVectorError(
                    f"{record.key_str} equals the model mean and cannot be length-normalized"
                ) from None
        raise


def _raw_scores(pool: EmbeddingPool, model: PldaModel, target: PreparedEmbedding,
                threads: int) -> np.ndarray:
    bounds = [(start, min(start + CHUNK_SIZE, len(pool))) for start in range(0, len(pool), CHUNK_SIZE)]

    def score_chunk(bound: Tuple[int, int]) -> np.ndarray:
        start, stop = bound
        return plda.score_many(model, target, _prepare_chunk(model, pool, start, stop))

    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        chunks = list(tqdm(
            executor.map(score_chunk, bounds),
            total=len(bounds),
            desc="scoring",
            unit="chunk",
            disable=None,
            leave=False,
        ))
    return np.concatenate(chunks)


def rank_pool(pool: EmbeddingPool, model: PldaModel, target: np.ndarray, cfg: SelectionConfig,
              exclude_speakers: Iterable[str] = (), threads: Optional[int] = None,
              threshold_ks: Sequence[int] = (), reference: Optional[Sequence[ScoredUtterance]] = None,
              ) -> SelectionReport:
    """Score every candidate against the target, rank, and select the top ``k``.

    Speaker means and divergences are computed over each speaker's full candidate
    set before scoring. Results are identical for any ``threads`` value.
    """
    threads = threads or os.cpu_count() or 1
    target = np.asarray(target, dtype=np.float64)
    if target.shape != (pool.dimension,):
        raise DimensionMismatchError(
            f"target embedding has shape {target.shape}, pool dimension is {pool.dimension}"
        )

    pool = _canonical_pool(pool, exclude_speakers)
    statistics = SpeakerStatistics.compute(pool)
    prepared_target = plda.prepare(model, target)
    logger.info(
        f"Ranking {len(pool)} candidates from {len(pool.speaker_index)} speakers "
        f"with {cfg.criterion.value} on {threads} thread(s)"
    )

    raw = _raw_scores(pool, model, prepared_target, threads)
    sigma = np.array([statistics.divergence[record.speaker_id] for record in pool.records])
    distance = statistics.utterance_distance
    sigmoid = sigmoid_scores(raw, cfg.sigmoid_c)
    final = final_scores(cfg, raw, sigma, distance)

    scored = [
        ScoredUtterance(
            speaker_id=record.speaker_id,
            utterance_id=record.utterance_id,
            plda_raw=float(raw[i]),
            plda_sigmoid=float(sigmoid[i]),
            sigma_n=float(sigma[i]),
            utt_distance=float(distance[i]),
            final_score=float(final[i]),
            tag=record.tag,
        )
        for i, record in enumerate(pool.records)
    ]
    ranked = rank_scored(scored)

    k = cfg.k
    if k > len(ranked):
        logger.warning(f"k={k} exceeds the {len(ranked)} available candidates; selecting the entire pool")
        k = len(ranked)
    selected = ranked[:k]

    return SelectionReport(
        ranked=ranked,
        selected=selected,
        stats=selection_stats(selected, reference),
        threshold_score=selected[-1].final_score,
        thresholds=selection_thresholds(ranked, threshold_ks) if threshold_ks else {},
    )


@dataclass
class CriterionComparison:
    """Selections under every criterion with statistics relative to DC1."""
    reports: Dict[Criterion, SelectionReport]
    stats: Dict[Criterion, SelectionStats]

    def to_dict(self) -> Dict[str, dict]:
        return {criterion.value: self.stats[criterion].to_dict() for criterion in self.reports}


def compare_criteria(pool: EmbeddingPool, model: PldaModel, target: np.ndarray,
                     base_cfg: SelectionConfig, exclude_speakers: Iterable[str] = (),
                     threads: Optional[int] = None) -> CriterionComparison:
    """Run DC1, DC2 and DC3 with otherwise identical settings; DC1 is the overlap reference."""
    reports: Dict[Criterion, SelectionReport] = {}
    for criterion in Criterion:
        cfg = base_cfg.model_copy(update={"criterion": criterion})
        reports[criterion] = rank_pool(pool, model, target, cfg, exclude_speakers, threads)

    reference = reports[Criterion.DC1].selected
    stats = {
        criterion: selection_stats(report.selected, reference)
        for criterion, report in reports.items()
    }
    for criterion, row in stats.items():
        logger.info(
            f"{criterion.value}: {row.num_speakers} speakers, {row.num_suspected} suspected, "
            f"{row.utterance_overlap_pct:.1f}% utterance overlap with dc1"
        )
    return CriterionComparison(reports=reports, stats=stats)


"""Objective evaluation over a set of reference/test pairs."""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence

from tqdm import tqdm

from ..core.metrics import MetricError, audio_metrics, cosine_similarity, plda_similarity
from ..models.config import EvalConfig
from ..models.evaluation import METRIC_NAMES, EvalPair, EvalReport, PairMetrics
from ..models.scoring import PldaModel

logger = logging.getLogger(__name__)


def evaluate_pair(pair: EvalPair, model: Optional[PldaModel], cfg: EvalConfig) -> PairMetrics:
    """Every metric whose inputs are present for this pair."""
    metrics = PairMetrics(name=pair.name)
    if pair.has_audio:
        for name, value in audio_metrics(pair.ref_audio, pair.test_audio, cfg).items():
            setattr(metrics, name, value)
    if pair.has_embeddings:
        metrics.cos_sim = cosine_similarity(pair.ref_embedding, pair.test_embedding)
        if model is not None:
            metrics.plda = plda_similarity(model, pair.ref_embedding, pair.test_embedding)
    if not metrics.values():
        logger.warning(f"Pair '{pair.name}' has no computable metric")
    return metrics


def aggregate(per_pair: Sequence[PairMetrics]) -> Dict[str, float]:
    """Arithmetic mean of each metric over the pairs that have it."""
    aggregates = {}
    for name in METRIC_NAMES:
        values = [getattr(metrics, name) for metrics in per_pair if getattr(metrics, name) is not None]
        if values:
            aggregates[name] = math.fsum(values) / len(values)
    return aggregates


def evaluate_pair_set(pairs: Sequence[EvalPair], model: Optional[PldaModel] = None,
                      cfg: Optional[EvalConfig] = None, threads: Optional[int] = None) -> EvalReport:
    """Per-pair metrics in input order plus their means.

    A metric whose inputs are missing for every pair is left out of the
    aggregates instead of being reported as zero.
    """
    if not pairs:
        raise MetricError("no pairs to evaluate")
    cfg = cfg or EvalConfig()
    threads = threads or os.cpu_count() or 1

    if model is None and any(pair.has_embeddings for pair in pairs):
        logger.info("No PLDA model given; the plda row is omitted")

    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        per_pair: List[PairMetrics] = list(tqdm(
            executor.map(lambda pair: evaluate_pair(pair, model, cfg), pairs),
            total=len(pairs),
            desc="evaluating",
            unit="pair",
            disable=None,
            leave=False,
        ))

    aggregates = aggregate(per_pair)
    if not aggregates:
        raise MetricError("no computable metric: pairs carry neither audio nor embeddings")
    logger.info(f"Evaluated {len(per_pair)} pairs: {', '.join(sorted(aggregates))}")
    return EvalReport(aggregates=aggregates, per_pair=per_pair)

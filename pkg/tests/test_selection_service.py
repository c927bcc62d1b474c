"""
Tests for pool ranking and criterion comparison.
"""

import logging
import random

import numpy as np
import pytest

from voxsel.core.plda import build_model
from voxsel.core.selection import build_adaptation_list
from voxsel.models.config import Criterion, SelectionConfig
from voxsel.models.embedding import DimensionMismatchError, EmbeddingPool, UtteranceRecord
from voxsel.models.scoring import ZeroVectorError
from voxsel.services.selection_service import CHUNK_SIZE, compare_criteria, rank_pool
from voxsel.services.synthetic import (
    generate_synthetic_plda, generate_synthetic_pool, generate_target_records
)


def _identity_model(dim):
    return build_model(np.zeros(dim), np.eye(dim), np.ones(dim))


class TestRankPool:
    """Test ranking a candidate pool against a target."""

    @pytest.fixture
    def corpus(self):
        return generate_synthetic_pool(num_speakers=4, utterances_per_speaker=15, dim=8, seed=3)

    def test_selects_target_speaker_first(self, corpus):
        """Test that the closest speaker's utterances are ranked on top."""
        model = _identity_model(8)
        cfg = SelectionConfig(criterion=Criterion.DC1, k=10)
        report = rank_pool(corpus.pool, model, corpus.centres[2], cfg, threads=2)
        assert len(report.ranked) == 60
        assert len(report.selected) == 10
        assert {item.speaker_id for item in report.selected} == {corpus.speaker_ids[2]}
        assert report.threshold_score == report.selected[-1].final_score
        assert report.stats.num_speakers == 1

    def test_ranking_is_sorted_and_complete(self, corpus):
        """Test descending order and that every record is scored once."""
        report = rank_pool(corpus.pool, generate_synthetic_plda(8, seed=1), corpus.centres[0],
                           SelectionConfig(k=5))
        scores = [item.final_score for item in report.ranked]
        assert scores == sorted(scores, reverse=True)
        assert sorted(item.key for item in report.ranked) == sorted(r.key for r in corpus.pool.records)

    def test_components_are_carried(self, corpus):
        """Test that tags and divergence components reach the scored items."""
        report = rank_pool(corpus.pool, _identity_model(8), corpus.centres[1], SelectionConfig(k=3))
        item = report.ranked[0]
        assert item.tag in ("f", "m")
        assert item.sigma_n > 0
        assert item.utt_distance >= 0
        assert 0 < item.plda_sigmoid < 1

    def test_record_order_does_not_matter(self, corpus):
        """Test that shuffling the pool gives the same report."""
        records = list(corpus.pool.records)
        random.Random(0).shuffle(records)
        shuffled = EmbeddingPool.from_records(records)
        model = _identity_model(8)
        first = rank_pool(corpus.pool, model, corpus.centres[0], SelectionConfig())
        second = rank_pool(shuffled, model, corpus.centres[0], SelectionConfig())
        assert first.to_dict() == second.to_dict()

    def test_thread_count_does_not_change_results(self):
        """Test identical reports for one and several workers across chunk boundaries."""
        corpus = generate_synthetic_pool(100, 100, 16, seed=5)
        assert len(corpus.pool) > 2 * CHUNK_SIZE
        model = generate_synthetic_plda(16, seed=6)
        cfg = SelectionConfig(criterion=Criterion.DC3, k=85)
        single = rank_pool(corpus.pool, model, corpus.centres[7], cfg, threads=1)
        several = rank_pool(corpus.pool, model, corpus.centres[7], cfg, threads=8)
        assert single.to_dict() == several.to_dict()

    def test_k_larger_than_pool_is_clamped(self, corpus, caplog):
        """Test that oversize k selects the whole pool with a warning."""
        with caplog.at_level(logging.WARNING):
            report = rank_pool(corpus.pool, _identity_model(8), corpus.centres[0],
                               SelectionConfig(k=1000))
        assert len(report.selected) == 60
        assert "k=1000 exceeds the 60 available candidates" in caplog.text

    def test_excluded_speakers(self, corpus, caplog):
        """Test exclusion and the warning for unknown speakers."""
        excluded = corpus.speaker_ids[0]
        with caplog.at_level(logging.WARNING):
            report = rank_pool(corpus.pool, _identity_model(8), corpus.centres[0],
                               SelectionConfig(k=5), exclude_speakers=[excluded, "nobody"])
        assert excluded not in {item.speaker_id for item in report.ranked}
        assert len(report.ranked) == 45
        assert "not in the pool" in caplog.text

    def test_target_dimension_mismatch(self, corpus):
        """Test that the target must match the pool dimension."""
        with pytest.raises(DimensionMismatchError):
            rank_pool(corpus.pool, _identity_model(8), np.ones(5), SelectionConfig())

    def test_zero_vector_names_the_record(self):
        """Test that a candidate equal to the model mean is reported by key."""
        pool = EmbeddingPool.from_records([
            UtteranceRecord("a", "ok", np.array([1.0, 0.0])),
            UtteranceRecord("b", "bad", np.array([0.0, 0.0])),
        ])
        with pytest.raises(ZeroVectorError, match="b/bad"):
            rank_pool(pool, _identity_model(2), np.array([1.0, 1.0]), SelectionConfig())

    def test_thresholds_and_reference(self, corpus):
        """Test thresholds and overlap against a reference selection."""
        model = _identity_model(8)
        base = rank_pool(corpus.pool, model, corpus.centres[0],
                         SelectionConfig(criterion=Criterion.DC1, k=10))
        report = rank_pool(corpus.pool, model, corpus.centres[0],
                           SelectionConfig(criterion=Criterion.DC1, k=10),
                           threshold_ks=(1, 10, 100), reference=base.selected)
        assert report.thresholds[1] == report.ranked[0].final_score
        assert report.thresholds[10] == report.threshold_score
        assert report.thresholds[100] == report.ranked[-1].final_score
        assert report.stats.utterance_overlap_pct == 100.0


class TestSyntheticSelection:
    """Test end-to-end selection on seeded synthetic corpora."""

    def test_dc1_selects_only_target_speaker(self):
        """Test three separated speakers with the target at the first speaker's mean."""
        model = _identity_model(16)
        cfg = SelectionConfig(criterion=Criterion.DC1, k=10)
        successes = 0
        for seed in range(100):
            corpus = generate_synthetic_pool(3, 20, 16, seed=seed)
            report = rank_pool(corpus.pool, model, corpus.centres[0], cfg, threads=1)
            if {item.speaker_id for item in report.selected} == {corpus.speaker_ids[0]}:
                successes += 1
        assert successes >= 99

    def test_adaptation_list_counts(self):
        """Test that 85 selections plus 5 targets make a 90-entry list."""
        corpus = generate_synthetic_pool(100, 100, 16, seed=11)
        targets = generate_target_records(corpus.centres[0], 5, seed=12)
        report = rank_pool(corpus.pool, generate_synthetic_plda(16, seed=13),
                           np.mean([t.embedding for t in targets], axis=0),
                           SelectionConfig(k=85))
        entries = build_adaptation_list(report.selected, targets)
        assert len(entries) == 90
        assert entries[-5:] == [t.utterance_id for t in targets]


class TestCompareCriteria:
    """Test side-by-side criterion comparison."""

    def test_compare(self):
        """Test that every criterion is run and DC1 is the reference."""
        corpus = generate_synthetic_pool(6, 12, 8, seed=2)
        comparison = compare_criteria(corpus.pool, generate_synthetic_plda(8, seed=2),
                                      corpus.centres[0], SelectionConfig(k=20))
        assert set(comparison.reports) == set(Criterion)
        assert comparison.stats[Criterion.DC1].utterance_overlap_pct == 100.0
        assert comparison.stats[Criterion.DC1].speaker_overlap_pct == 100.0
        for criterion in Criterion:
            assert len(comparison.reports[criterion].selected) == 20
        table = comparison.to_dict()
        assert list(table) == ["dc1", "dc2", "dc3"]
        assert set(table["dc3"]) == {
            "num_speakers", "num_suspected", "utterance_overlap_pct", "speaker_overlap_pct"
        }

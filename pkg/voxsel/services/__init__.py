# Import workflow services
from .selection_service import rank_pool, compare_criteria, CriterionComparison, CHUNK_SIZE
from .evaluation_service import evaluate_pair_set, evaluate_pair, aggregate
from .synthetic import (
    SyntheticCorpus, generate_synthetic_pool, generate_target_records, generate_synthetic_plda
)

# Export all public names
__all__ = [
    'rank_pool',
    'compare_criteria',
    'CriterionComparison',
    'CHUNK_SIZE',
    'evaluate_pair_set',
    'evaluate_pair',
    'aggregate',
    'SyntheticCorpus',
    'generate_synthetic_pool',
    'generate_target_records',
    'generate_synthetic_plda',
]

from .config import (
    Criterion, StftConfig, StftLossConfig, GanLossWeights, SelectionConfig,
    F0Config, EvalConfig, PqmfConfig, RunConfig, load_config_file, get_config, set_config
)
from .embedding import (
    UtteranceRecord, EmbeddingPool, as_embedding,
    EmbeddingError, PoolFormatError, DimensionMismatchError,
    DuplicateRecordError, UnknownSpeakerError, EmptyPoolError
)
from .scoring import PldaModel, PreparedEmbedding, PldaError, PldaModelError, ZeroVectorError
from .selection import ScoredUtterance, SelectionStats, SelectionReport, SelectionError
from .audio import (
    AudioBuffer, SpectralFrameSeries, F0Track, PqmfBank,
    DspError, AudioFormatError, PqmfDesignError
)
from .evaluation import EvalPair, PairMetrics, EvalReport, METRIC_NAMES

__all__ = [
    # Configuration models
    'Criterion', 'StftConfig', 'StftLossConfig', 'GanLossWeights', 'SelectionConfig',
    'F0Config', 'EvalConfig', 'PqmfConfig', 'RunConfig', 'load_config_file', 'get_config', 'set_config',

    # Embedding models
    'UtteranceRecord', 'EmbeddingPool', 'as_embedding',
    'EmbeddingError', 'PoolFormatError', 'DimensionMismatchError',
    'DuplicateRecordError', 'UnknownSpeakerError', 'EmptyPoolError',

    # PLDA models
    'PldaModel', 'PreparedEmbedding', 'PldaError', 'PldaModelError', 'ZeroVectorError',

    # Selection models
    'ScoredUtterance', 'SelectionStats', 'SelectionReport', 'SelectionError',

    # Audio models
    'AudioBuffer', 'SpectralFrameSeries', 'F0Track', 'PqmfBank',
    'DspError', 'AudioFormatError', 'PqmfDesignError',

    # Evaluation models
    'EvalPair', 'PairMetrics', 'EvalReport', 'METRIC_NAMES',
]

# Import all classes from base module
from .base import (
    StorageBackend,
    StorageObject,
    StorageError,
    StorageNotFoundError,
    StoragePermissionError
)

# Import concrete implementations
from .local_storage import LocalStorageBackend

# Artifact codecs
from .pool_io import (
    load_pool, save_pool, load_speaker_tags, apply_speaker_tags, load_id_list,
    infer_format, POOL_FORMATS
)
from .plda_io import load_plda, save_plda
from .audio_io import read_wav, write_wav
from .pairs_io import PairSpec, parse_pairs, load_pairs
from .report_io import (
    ReportFormatError, build_document, dumps_document, write_document, read_document,
    read_selection_report, write_id_list, histogram_csv, write_histogram_csv
)

# Export all public classes
__all__ = [
    'StorageBackend',
    'StorageObject',
    'StorageError',
    'StorageNotFoundError',
    'StoragePermissionError',
    'LocalStorageBackend',
    'load_pool', 'save_pool', 'load_speaker_tags', 'apply_speaker_tags', 'load_id_list',
    'infer_format', 'POOL_FORMATS',
    'load_plda', 'save_plda',
    'read_wav', 'write_wav',
    'PairSpec', 'parse_pairs', 'load_pairs',
    'ReportFormatError', 'build_document', 'dumps_document', 'write_document', 'read_document',
    'read_selection_report', 'write_id_list', 'histogram_csv', 'write_histogram_csv',
]

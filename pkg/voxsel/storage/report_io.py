"""
Report artifacts: provenance-stamped JSON documents, id lists and histogram CSV
"""

import csv
import io
import json
import logging
from typing import Any, Dict, Iterable, List, Optional

from .. import REPORT_FORMAT_VERSION
from ..core.selection import ScoreHistogram
from ..models.selection import SelectionReport
from .base import StorageBackend, StorageError
from .local_storage import LocalStorageBackend

logger = logging.getLogger(__name__)

HISTOGRAM_COLUMNS = ("kind", "group", "index", "lower", "upper", "value")


class ReportFormatError(StorageError):
    """Raised when a report document does not have the expected structure"""
    pass


def build_document(kind: str, payload: Dict[str, Any], config: Dict[str, Any],
                   warnings: Iterable[str] = ()) -> Dict[str, Any]:
    """Wrap a payload with the format version, effective config and run warnings."""
    return {
        "format_version": REPORT_FORMAT_VERSION,
        "kind": kind,
        "config": config,
        "warnings": list(warnings),
        **payload,
    }


def dumps_document(document: Dict[str, Any]) -> str:
    """Canonical serialization: sorted keys, two-space indent, trailing newline."""
    return json.dumps(document, sort_keys=True, indent=2) + "\n"


def write_document(path: str, document: Dict[str, Any],
                   storage: Optional[StorageBackend] = None) -> None:
    storage = storage or LocalStorageBackend()
    storage.put_text(path, dumps_document(document))
    logger.info(f"Wrote {document.get('kind', 'report')} report to {path}")


def read_document(path: str, kind: Optional[str] = None,
                  storage: Optional[StorageBackend] = None) -> Dict[str, Any]:
    """Load a report and check its format version and, optionally, its kind."""
    storage = storage or LocalStorageBackend()
    try:
        document = json.loads(storage.get_text(path))
    except json.JSONDecodeError as e:
        raise ReportFormatError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from None
    if not isinstance(document, dict):
        raise ReportFormatError(f"{path}: expected a JSON object")
    version = document.get("format_version")
    if version != REPORT_FORMAT_VERSION:
        raise ReportFormatError(
            f"{path}: unsupported format_version {version!r}, expected {REPORT_FORMAT_VERSION!r}"
        )
    if kind is not None and document.get("kind") != kind:
        raise ReportFormatError(f"{path}: expected a {kind} report, got {document.get('kind')!r}")
    return document


def read_selection_report(path: str, storage: Optional[StorageBackend] = None) -> SelectionReport:
    document = read_document(path, kind="selection", storage=storage)
    try:
        return SelectionReport.from_dict(document)
    except (KeyError, TypeError, ValueError) as e:
        raise ReportFormatError(f"{path}: malformed selection report: {e!r}") from None


def write_id_list(path: str, ids: List[str], storage: Optional[StorageBackend] = None) -> None:
    """One id per line."""
    storage = storage or LocalStorageBackend()
    storage.put_text(path, "".join(f"{item}\n" for item in ids))
    logger.info(f"Wrote {len(ids)} ids to {path}")


def histogram_csv(histogram: ScoreHistogram, thresholds: Optional[Dict[int, float]] = None) -> str:
    """Bin rows per group, then one ``threshold`` row per selection size.

    Threshold rows put the selection size in ``index`` and the score in
    ``lower``/``upper``.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(HISTOGRAM_COLUMNS)
    edges = histogram.edges
    for group, counts in histogram.counts.items():
        for index, count in enumerate(counts):
            writer.writerow(("bin", group, index, repr(float(edges[index])),
                             repr(float(edges[index + 1])), int(count)))
    for k, score in sorted((thresholds or {}).items()):
        writer.writerow(("threshold", "all", k, repr(float(score)), repr(float(score)), ""))
    return buffer.getvalue()


def write_histogram_csv(path: str, histogram: ScoreHistogram,
                        thresholds: Optional[Dict[int, float]] = None,
                        storage: Optional[StorageBackend] = None) -> None:
    storage = storage or LocalStorageBackend()
    storage.put_text(path, histogram_csv(histogram, thresholds))

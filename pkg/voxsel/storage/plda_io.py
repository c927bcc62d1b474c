"""PLDA model JSON codec: {"dim": D, "mean": [...], "transform": [[...]...], "psi": [...]}."""

import json
import logging
from typing import Optional

from ..core.plda import build_model
from ..models.scoring import PldaModel, PldaModelError
from .base import StorageBackend
from .local_storage import LocalStorageBackend

logger = logging.getLogger(__name__)

_FIELDS = ("dim", "mean", "transform", "psi")


def parse_plda(text: str, source: str = "plda model") -> PldaModel:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise PldaModelError(f"{source}: invalid JSON at line {e.lineno}: {e.msg}") from None
    if not isinstance(document, dict):
        raise PldaModelError(f"{source}: expected a JSON object")
    missing = [name for name in _FIELDS if name not in document]
    if missing:
        raise PldaModelError(f"{source}: missing field(s) {', '.join(missing)}")

    try:
        model = build_model(document["mean"], document["transform"], document["psi"])
    except (TypeError, ValueError) as e:
        raise PldaModelError(f"{source}: arrays are not numeric or not rectangular: {e}") from None
    if document["dim"] != model.dimension:
        raise PldaModelError(
            f"{source}: declared dim {document['dim']} but mean has {model.dimension} entries"
        )
    return model


def load_plda(path: str, storage: Optional[StorageBackend] = None) -> PldaModel:
    """Load and validate a PLDA model file."""
    storage = storage or LocalStorageBackend()
    model = parse_plda(storage.get_text(path), source=path)
    logger.info(f"Loaded PLDA model of dimension {model.dimension} from {path}")
    return model


def save_plda(model: PldaModel, path: str, storage: Optional[StorageBackend] = None) -> None:
    storage = storage or LocalStorageBackend()
    document = {
        "dim": model.dimension,
        "mean": model.mean.tolist(),
        "transform": model.transform.tolist(),
        "psi": model.psi.tolist(),
    }
    storage.put_text(path, json.dumps(document, indent=2) + "\n")

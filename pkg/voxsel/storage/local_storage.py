import logging
import os
import tempfile
from pathlib import Path

from .base import StorageBackend, StorageError, StorageNotFoundError, StorageObject, StoragePermissionError

logger = logging.getLogger(__name__)


class LocalStorageBackend(StorageBackend):
    """Filesystem backend for pools, models, audio and reports.

    Keys are paths; relative keys resolve against ``base_path`` and absolute
    keys are used as they are.
    """

    def __init__(self, base_path: str = "."):
        self.base_path = Path(base_path)
        try:
            self.base_path.mkdir(parents=True, exist_ok=True)
        except PermissionError as e:
            raise StoragePermissionError(f"cannot create storage directory {base_path}: {e}")
        except OSError as e:
            raise StorageError(f"cannot use {base_path} as storage root: {e}")

    def _resolve(self, key: str) -> Path:
        return self.base_path / Path(key)

    def get_object(self, key: str) -> StorageObject:
        path = self._resolve(key)
        if not path.exists():
            raise StorageNotFoundError(f"file not found: {key}")
        if not path.is_file():
            raise StorageError(f"path is not a file: {key}")
        try:
            return StorageObject(key=key, content=path.read_bytes())
        except PermissionError as e:
            raise StoragePermissionError(f"permission denied reading {key}: {e}")
        except OSError as e:
            raise StorageError(f"cannot read {key}: {e}")

    def put_object(self, key: str, content: bytes) -> None:
        """Write to a temporary file in the target directory, then rename over the target"""
        path = self._resolve(key)
        temp_name = None
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with tempfile.NamedTemporaryFile(
                dir=path.parent, prefix=f".{path.name}.", suffix=".tmp", delete=False
            ) as handle:
                temp_name = handle.name
                handle.write(content)
                handle.flush()
                os.fsync(handle.fileno())
            os.replace(temp_name, path)
            temp_name = None
            logger.debug(f"Wrote {len(content)} bytes to {path}")
        except PermissionError as e:
            raise StoragePermissionError(f"permission denied writing {key}: {e}")
        except OSError as e:
            raise StorageError(f"cannot write {key}: {e}")
        finally:
            if temp_name is not None and os.path.exists(temp_name):
                os.unlink(temp_name)

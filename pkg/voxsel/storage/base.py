"""
Abstract storage backend interface for voxsel artifacts
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass

from ..errors import VoxselError


# Storage Exceptions
class StorageError(VoxselError):
    """Base exception for storage operations"""
    module = "storage"


class StorageNotFoundError(StorageError):
    """Raised when a storage object is not found"""
    pass


class StoragePermissionError(StorageError):
    """Raised when storage operation lacks permissions"""
    pass


@dataclass
class StorageObject:
    """Raw bytes of one stored artifact"""
    key: str
    content: bytes

    @property
    def size(self) -> int:
        return len(self.content)

    @property
    def text(self) -> str:
        try:
            return self.content.decode("utf-8")
        except UnicodeDecodeError as e:
            raise StorageError(f"{self.key} is not valid UTF-8: {e}") from None


class StorageBackend(ABC):
    """Abstract base class for artifact storage backends.

    Writes must be atomic: a reader sees either the previous object or the
    complete new one, never a partial file.
    """

    @abstractmethod
    def get_object(self, key: str) -> StorageObject:
        """Retrieve an object by key"""
        pass

    @abstractmethod
    def put_object(self, key: str, content: bytes) -> None:
        """Store an object atomically"""
        pass

    def get_text(self, key: str) -> str:
        return self.get_object(key).text

    def put_text(self, key: str, text: str) -> None:
        self.put_object(key, text.encode("utf-8"))

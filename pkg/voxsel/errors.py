"""Base exception shared by every voxsel module."""


class VoxselError(Exception):
    """Base exception for voxsel data errors.

    Subclasses set ``module`` so the command line can report which stage failed.
    """
    module = "voxsel"

    def qualified(self) -> str:
        """Message prefixed with the owning module, as printed by the CLI."""
        return f"error [{self.module}]: {self}"

"""PLDA model data types."""

from dataclasses import dataclass

import numpy as np

from ..errors import VoxselError


class PldaError(VoxselError):
    """Base exception for PLDA operations"""
    module = "plda"


class PldaModelError(PldaError):
    """Raised when a PLDA model is inconsistent or singular"""
    pass


class ZeroVectorError(PldaError):
    """Raised when an embedding collapses to zero after centering"""
    pass


@dataclass(frozen=True)
class PldaModel:
    """Simplified PLDA model with a diagonalized between-class variance.

    ``transform`` maps centered embeddings into the space where within-class
    covariance is identity; ``psi`` is the between-class variance there.
    """
    mean: np.ndarray
    transform: np.ndarray
    psi: np.ndarray

    @property
    def dimension(self) -> int:
        return int(self.mean.shape[0])


@dataclass(frozen=True)
class PreparedEmbedding:
    """Centered, transformed and length-normalized embedding (norm sqrt(D))."""
    values: np.ndarray

    @property
    def dimension(self) -> int:
        return int(self.values.shape[0])

"""Simplified PLDA scoring.

Embeddings are centered, mapped by ``transform`` into a space with identity
within-class covariance and length-normalized to sqrt(D). With between-class
variance ``psi`` (diagonal in that space), the verification log-likelihood ratio
of a test vector given a single enrollment vector factorizes over dimensions:

    same speaker:      test_d ~ N(psi_d / (psi_d + 1) * enroll_d, 1 + psi_d / (psi_d + 1))
    different speaker: test_d ~ N(0, 1 + psi_d)
"""

import logging
import warnings
from typing import Iterable

import numpy as np
from scipy import linalg

from ..models.scoring import PldaModel, PldaModelError, PreparedEmbedding, ZeroVectorError

logger = logging.getLogger(__name__)

PIVOT_TOLERANCE = 1e-10
ZERO_NORM = 1e-12


def build_model(mean: Iterable[float], transform: Iterable[Iterable[float]],
                psi: Iterable[float]) -> PldaModel:
    """Validate raw arrays and assemble a read-only PldaModel."""
    mean = np.array(mean, dtype=np.float64)
    transform = np.array(transform, dtype=np.float64)
    psi = np.array(psi, dtype=np.float64)

    if mean.ndim != 1 or mean.size == 0:
        raise PldaModelError(f"mean must be a non-empty vector, got shape {mean.shape}")
    dim = mean.shape[0]
    if transform.shape != (dim, dim):
        raise PldaModelError(f"transform must be {dim}x{dim}, got shape {transform.shape}")
    if psi.shape != (dim,):
        raise PldaModelError(f"psi must have {dim} entries, got shape {psi.shape}")
    for name, array in (("mean", mean), ("transform", transform), ("psi", psi)):
        if not np.all(np.isfinite(array)):
            raise PldaModelError(f"{name} contains NaN or Inf")
    if np.any(psi < 0):
        index = int(np.argmax(psi < 0))
        raise PldaModelError(f"psi[{index}] = {psi[index]} is negative")

    _check_full_rank(transform)

    for array in (mean, transform, psi):
        array.flags.writeable = False
    return PldaModel(mean=mean, transform=transform, psi=psi)


def _check_full_rank(transform: np.ndarray) -> None:
    scale = float(np.max(np.abs(transform)))
    if scale == 0.0:
        raise PldaModelError("transform is singular (all zeros)")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", linalg.LinAlgWarning)
        lu, _ = linalg.lu_factor(transform, check_finite=False)
    pivots = np.abs(np.diag(lu))
    weakest = int(np.argmin(pivots))
    if pivots[weakest] <= PIVOT_TOLERANCE * scale:
        raise PldaModelError(
            f"transform is singular: pivot {weakest} is {pivots[weakest]:.3e} "
            f"(tolerance {PIVOT_TOLERANCE * scale:.3e})"
        )


def _check_dimension(model: PldaModel, size: int, what: str) -> None:
    if size != model.dimension:
        raise PldaModelError(f"{what} has dimension {size}, model expects {model.dimension}")


def prepare(model: PldaModel, embedding: np.ndarray) -> PreparedEmbedding:
    """Center, transform and scale an embedding to norm sqrt(D)."""
    embedding = np.asarray(embedding, dtype=np.float64)
    _check_dimension(model, embedding.shape[-1], "embedding")
    return PreparedEmbedding(values=prepare_many(model, embedding[np.newaxis, :])[0])


def prepare_many(model: PldaModel, embeddings: np.ndarray) -> np.ndarray:
    """Row-wise ``prepare`` over a (n, D) matrix."""
    embeddings = np.asarray(embeddings, dtype=np.float64)
    _check_dimension(model, embeddings.shape[1], "embeddings")
    projected = (embeddings - model.mean) @ model.transform.T
    norms = np.linalg.norm(projected, axis=1)
    if np.any(norms < ZERO_NORM):
        row = int(np.argmax(norms < ZERO_NORM))
        raise ZeroVectorError(
            f"embedding row {row} is zero after centering and cannot be length-normalized"
        )
    return projected * (np.sqrt(model.dimension) / norms)[:, np.newaxis]


def dimension_scores(psi: np.ndarray, enroll: np.ndarray, test: np.ndarray) -> np.ndarray:
    """Per-dimension log-likelihood ratio terms; broadcasts over leading axes."""
    psi = np.asarray(psi, dtype=np.float64)
    gain = psi / (psi + 1.0)
    var_same = 1.0 + gain
    var_diff = 1.0 + psi
    residual = test - gain * enroll
    return 0.5 * (
        np.log(var_diff) - np.log(var_same)
        + test * test / var_diff
        - residual * residual / var_same
    )


def plda_score(model: PldaModel, enroll: PreparedEmbedding, test: PreparedEmbedding) -> float:
    """Verification log-likelihood ratio of ``test`` against ``enroll``."""
    _check_dimension(model, enroll.dimension, "enrollment embedding")
    _check_dimension(model, test.dimension, "test embedding")
    return float(np.sum(dimension_scores(model.psi, enroll.values, test.values)))


def score_many(model: PldaModel, enroll: PreparedEmbedding, tests: np.ndarray) -> np.ndarray:
    """Scores of each prepared row in ``tests`` against one enrollment."""
    _check_dimension(model, enroll.dimension, "enrollment embedding")
    _check_dimension(model, tests.shape[1], "test embeddings")
    return np.sum(dimension_scores(model.psi, enroll.values, tests), axis=1)

from dataclasses import dataclass

import numpy as np
from loguru import logger

from iacd.common.errors import DegenerateDatabase, DimensionMismatch, InvalidModel
from iacd.global_settings import SCALED_CLAMP_HIGH, SCALED_CLAMP_LOW
from iacd.signature.signature_database import SignatureDatabase


@dataclass(frozen=True)
class ScalerParams:
    """
    Per-feature training minima and maxima of the features that survive null-feature removal.
    """
    dimension: int
    retained_indices: tuple
    minimums: tuple
    maximums: tuple

    def __post_init__(self):
        if not (len(self.retained_indices) == len(self.minimums) == len(self.maximums)):
            raise ValueError("retained_indices, minimums and maximums must have the same length")
        if any(b <= a for a, b in zip(self.retained_indices, self.retained_indices[1:])):
            raise ValueError("retained_indices must be strictly increasing")
        if self.retained_indices and not 0 <= self.retained_indices[0] <= self.retained_indices[-1] < self.dimension:
            raise ValueError(f"retained_indices must lie in [0, {self.dimension})")
        if any(high <= low for low, high in zip(self.minimums, self.maximums)):
            raise ValueError("every retained feature needs max > min")

    def positions(self, indices) -> list:
        """
        Columns of the scaled vector holding the given catalogue feature indices.

        Raises:
            InvalidModel: When an index was removed as a null feature.
        """
        column_of = {index: column for column, index in enumerate(self.retained_indices)}
        missing = [index for index in indices if index not in column_of]
        if missing:
            raise InvalidModel(f"feature indices {missing} are not retained by the scaler")
        return [column_of[index] for index in indices]


def fit_scaler(vectors) -> ScalerParams:
    """
    Record per-feature ranges over the training vectors and drop null features (zero range).

    Args:
        vectors (np.ndarray | SignatureDatabase): Training database or matrix, one row per signature.
    Return:
        (ScalerParams): Ranges of the retained features.
    Raises:
        DegenerateDatabase: When every feature is null.
    """
    if isinstance(vectors, SignatureDatabase):
        vectors = vectors.matrix()
    vectors = np.asarray(vectors, dtype=float)
    if vectors.ndim != 2 or vectors.shape[0] == 0:
        raise DegenerateDatabase("scaler needs a non-empty 2-D training matrix")
    minimums = vectors.min(axis=0)
    maximums = vectors.max(axis=0)
    retained = np.flatnonzero(maximums > minimums)
    if retained.size == 0:
        raise DegenerateDatabase(f"all {vectors.shape[1]} features are null over {vectors.shape[0]} samples")
    logger.debug(f"Scaler keeps {retained.size} of {vectors.shape[1]} features ({vectors.shape[1] - retained.size} null)")
    return ScalerParams(
        dimension=vectors.shape[1],
        retained_indices=tuple(int(i) for i in retained),
        minimums=tuple(float(v) for v in minimums[retained]),
        maximums=tuple(float(v) for v in maximums[retained]),
    )


def apply_scaler(x: np.ndarray, params: ScalerParams) -> np.ndarray:
    """
    Rescale raw vectors onto the retained features; training values land in [0, 1] and unseen
    values are clamped to [-0.5, 1.5].

    Args:
        x (np.ndarray): One raw vector or a matrix of raw vectors of the original dimension.
        params (ScalerParams): Fitted scaler.
    Return:
        (np.ndarray): Scaled vector(s) over the retained indices.
    Raises:
        DimensionMismatch: When x does not have the original dimension.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != params.dimension:
        raise DimensionMismatch(f"expected vectors of dimension {params.dimension}, got {x.shape[-1]}")
    minimums = np.asarray(params.minimums)
    spans = np.asarray(params.maximums) - minimums
    scaled = (x[..., list(params.retained_indices)] - minimums) / spans
    return np.clip(scaled, SCALED_CLAMP_LOW, SCALED_CLAMP_HIGH)

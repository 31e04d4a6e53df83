import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats

from iacd.common.errors import InsufficientSamples

# score of a feature that separates the classes with zero pooled variance
SENTINEL_MAX = float(np.finfo(float).max)


@dataclass(frozen=True)
class FeatureRanking:
    """
    Feature indices with their scores, most significant first.
    """
    indices: tuple
    scores: tuple

    def __len__(self):
        return len(self.indices)

    def prefix(self, size: int) -> tuple:
        return self.indices[:size]


def t_scores(vectors: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """
    Absolute pooled-variance two-sample Student t statistic of every feature, +1 class against -1 class.

    A feature with zero pooled variance scores SENTINEL_MAX when the class means differ and 0
    when they are equal.

    Args:
        vectors (np.ndarray): Matrix (n, d).
        targets (np.ndarray): Labels in {+1, -1}.
    Return:
        (np.ndarray): d scores.
    Raises:
        InsufficientSamples: When a class has fewer than 2 samples.
    """
    vectors = np.asarray(vectors, dtype=float)
    targets = np.asarray(targets)
    positive = vectors[targets > 0]
    negative = vectors[targets <= 0]
    if len(positive) < 2 or len(negative) < 2:
        raise InsufficientSamples(f"t-test needs 2 samples per class, got {len(positive)} and {len(negative)}")

    with warnings.catch_warnings(), np.errstate(divide="ignore", invalid="ignore"):
        warnings.simplefilter("ignore", RuntimeWarning)
        statistic = stats.ttest_ind(positive, negative, axis=0, equal_var=True).statistic
    scores = np.abs(np.asarray(statistic, dtype=float))

    constant = (np.ptp(positive, axis=0) == 0) & (np.ptp(negative, axis=0) == 0)
    same_mean = positive[0] == negative[0]
    scores[constant] = np.where(same_mean[constant], 0.0, SENTINEL_MAX)
    return np.nan_to_num(scores, nan=0.0, posinf=SENTINEL_MAX)


def mean_difference_scores(vectors: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """
    Absolute difference of class means; ranks features when a class is too small for a t-test.
    """
    vectors = np.asarray(vectors, dtype=float)
    targets = np.asarray(targets)
    return np.abs(vectors[targets > 0].mean(axis=0) - vectors[targets <= 0].mean(axis=0))


def rank_features(scores: np.ndarray) -> FeatureRanking:
    """
    Order features by descending score; ties go to the lower index.

    Args:
        scores (np.ndarray): One score per feature.
    Return:
        (FeatureRanking): Ranked indices and their scores.
    """
    scores = np.asarray(scores, dtype=float)
    order = np.lexsort((np.arange(scores.size), -scores))
    return FeatureRanking(indices=tuple(int(i) for i in order), scores=tuple(float(scores[i]) for i in order))

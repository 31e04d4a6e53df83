from dataclasses import dataclass, field, replace
from itertools import product
from typing import Optional

import numpy as np
from joblib import Parallel, delayed
from loguru import logger
from sklearn.model_selection import StratifiedKFold

from iacd.common.errors import FoldError, InvalidConfiguration
from iacd.featsel.t_test_ranking import FeatureRanking, mean_difference_scores, rank_features, t_scores
from iacd.global_settings import (
    C_GRID,
    DEFAULT_SEED,
    GAMMA_GRID,
    MAX_K_FOLDS,
    SELECTION_TOLERANCE,
    SVM_DEFAULT_C,
    SVM_MAX_ITER,
    SVM_TOLERANCE,
)
from iacd.svm.kernels.abstract_kernel import KernelKind, KernelSpec
from iacd.svm.l2_svm_trainer import L2SvmTrainer


@dataclass(frozen=True)
class SvmSearchConfig:
    """
    SVM family searched by the wrapper: the kernel plus C and (RBF only) gamma grids.
    """
    kernel: KernelSpec
    c_grid: tuple = C_GRID
    gamma_grid: tuple = GAMMA_GRID
    max_iter: int = SVM_MAX_ITER
    tol: float = SVM_TOLERANCE

    def candidates(self) -> list:
        """
        (C, kernel) pairs in grid order: C outer, gamma inner.
        """
        if self.kernel.kind == KernelKind.RBF:
            return [(c, replace(self.kernel, gamma=gamma)) for c, gamma in product(self.c_grid, self.gamma_grid)]
        return [(c, self.kernel) for c in self.c_grid]


def create_default_svm_search_config(kernel: KernelSpec) -> SvmSearchConfig:
    """
    Search over the default C and gamma grids for the given kernel.
    """
    return SvmSearchConfig(kernel=kernel)


@dataclass(frozen=True)
class SelectionResult:
    """
    Outcome of wrapper selection: the chosen prefix size q of the ranking, its indices, the best
    mean CV accuracy per candidate size and the hyperparameters chosen for q.
    """
    q: int
    selected_indices: tuple
    cv_accuracy_by_size: dict
    C: float
    kernel: KernelSpec
    cv_skipped: bool = False
    k_folds: int = 0
    cv_table: list = field(default_factory=list)


def default_k_folds(targets: np.ndarray) -> int:
    """
    min(5, size of the smallest class).
    """
    _, counts = np.unique(np.asarray(targets), return_counts=True)
    return int(min(MAX_K_FOLDS, counts.min()))


def wrapper_select(vectors: np.ndarray, targets: np.ndarray, ranking: FeatureRanking, candidate_sizes,
                   k_folds: int, svm_config: SvmSearchConfig, seed: int = DEFAULT_SEED,
                   tolerance: float = SELECTION_TOLERANCE, n_jobs: int = 1) -> SelectionResult:
    """
    Cross-validate an SVM on growing prefixes of the ranking and pick the smallest prefix whose
    accuracy is within tolerance of the best one.

    Every (size, C, gamma) combination is scored with the same stratified folds; the accuracy of a
    size is its best combination. Ties between combinations go to the first in grid order.

    Args:
        vectors (np.ndarray): Scaled training matrix (n, d).
        targets (np.ndarray): Labels in {+1, -1}.
        ranking (FeatureRanking): Ranked feature indices into the columns of vectors.
        candidate_sizes: Prefix sizes to try.
        k_folds (int): Number of stratified folds.
        svm_config (SvmSearchConfig): Kernel and hyperparameter grids.
        seed (int): Seed of the fold assignment.
        tolerance (float): Accepted accuracy loss (fraction) for preferring a smaller size.
        n_jobs (int): Parallel workers for the grid.
    Return:
        (SelectionResult): Chosen q with its indices and the CV table.
    Raises:
        FoldError: When k_folds is below 2 or above the smallest class size.
    """
    vectors = np.asarray(vectors, dtype=float)
    targets = np.asarray(targets)
    sizes = _usable_sizes(candidate_sizes, len(ranking))
    smallest_class = int(np.unique(targets, return_counts=True)[1].min()) if targets.size else 0
    if k_folds < 2 or k_folds > smallest_class:
        raise FoldError(f"cannot build {k_folds} stratified folds when the smallest class has {smallest_class} samples")

    folds = list(StratifiedKFold(n_splits=k_folds, shuffle=True, random_state=seed).split(vectors, targets))
    grid = [(size, c, kernel) for size in sizes for c, kernel in svm_config.candidates()]
    accuracies = Parallel(n_jobs=n_jobs)(
        delayed(_cv_accuracy)(vectors[:, list(ranking.prefix(size))], targets, folds, kernel, c, svm_config)
        for size, c, kernel in grid
    )

    best_by_size = {}
    cv_table = []
    for (size, c, kernel), accuracy in zip(grid, accuracies):
        cv_table.append({"size": size, "C": c, "gamma": kernel.gamma if kernel.kind == KernelKind.RBF else None,
                         "accuracy": accuracy})
        if size not in best_by_size or accuracy > best_by_size[size][0]:
            best_by_size[size] = (accuracy, c, kernel)

    best_accuracy = max(accuracy for accuracy, _, _ in best_by_size.values())
    q = next(size for size in sizes if best_by_size[size][0] >= best_accuracy - tolerance)
    _, chosen_c, chosen_kernel = best_by_size[q]
    accuracy_by_size = {size: best_by_size[size][0] for size in sizes}
    logger.debug(f"Wrapper CV ({k_folds} folds) accuracy by size: {accuracy_by_size}, q={q}")
    return SelectionResult(
        q=q,
        selected_indices=ranking.prefix(q),
        cv_accuracy_by_size=accuracy_by_size,
        C=chosen_c,
        kernel=chosen_kernel,
        k_folds=k_folds,
        cv_table=cv_table,
    )


def select_features(vectors: np.ndarray, targets: np.ndarray, candidate_sizes, svm_config: SvmSearchConfig,
                    k_folds: Optional[int] = None, seed: int = DEFAULT_SEED, n_jobs: int = 1) -> tuple:
    """
    Rank features by t score and wrapper-select q. When a class has fewer than 2 samples the
    ranking falls back to class-mean differences and cross-validation is skipped: the first
    usable candidate size is kept with the default C.

    Args:
        vectors (np.ndarray): Scaled training matrix.
        targets (np.ndarray): Labels in {+1, -1}.
        candidate_sizes: Prefix sizes to try.
        svm_config (SvmSearchConfig): Kernel and hyperparameter grids.
        k_folds (int): Fold count; min(5, smallest class) when None.
        seed (int): Seed of the fold assignment.
        n_jobs (int): Parallel workers for the grid.
    Return:
        (tuple): (FeatureRanking, SelectionResult)
    """
    folds = default_k_folds(targets) if k_folds is None else k_folds
    if default_k_folds(targets) < 2:
        ranking = rank_features(mean_difference_scores(vectors, targets))
        size = _usable_sizes(candidate_sizes, len(ranking))[0]
        logger.warning(f"A class has fewer than 2 samples: ranking by mean difference, CV skipped, q={size}")
        return ranking, SelectionResult(
            q=size,
            selected_indices=ranking.prefix(size),
            cv_accuracy_by_size={},
            C=SVM_DEFAULT_C,
            kernel=svm_config.kernel,
            cv_skipped=True,
        )
    ranking = rank_features(t_scores(vectors, targets))
    return ranking, wrapper_select(vectors, targets, ranking, candidate_sizes, folds, svm_config, seed=seed,
                                   n_jobs=n_jobs)


# ----------------------------------------------------------------------------------------------------------------------
# Private helpers
# ----------------------------------------------------------------------------------------------------------------------

def _usable_sizes(candidate_sizes, ranking_length: int) -> list:
    sizes = sorted({int(size) for size in candidate_sizes})
    if not sizes or sizes[0] < 1:
        raise InvalidConfiguration(f"candidate sizes must be a nonempty set of positive integers, got {candidate_sizes}")
    usable = [size for size in sizes if size <= ranking_length]
    if len(usable) < len(sizes):
        logger.warning(f"Candidate sizes {[s for s in sizes if s > ranking_length]} exceed the "
                       f"{ranking_length} ranked features")
    return usable or [ranking_length]


def _cv_accuracy(vectors: np.ndarray, targets: np.ndarray, folds: list, kernel: KernelSpec, c: float,
                 svm_config: SvmSearchConfig) -> float:
    trainer = L2SvmTrainer(kernel, C=c, max_iter=svm_config.max_iter, tol=svm_config.tol, log_non_convergence=False)
    correct = []
    for train_index, test_index in folds:
        model = trainer.train(vectors[train_index], targets[train_index])
        correct.append(float(np.mean(model.predict(vectors[test_index]) == targets[test_index])))
    return float(np.mean(correct))

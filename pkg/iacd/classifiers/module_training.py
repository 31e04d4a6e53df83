from dataclasses import dataclass

import numpy as np
from loguru import logger

from iacd.classifiers.training_config import ModuleConfig, TrainingConfig
from iacd.featsel.wrapper_selection import SvmSearchConfig, select_features
from iacd.preprocess.min_max_scaler import ScalerParams
from iacd.svm.l2_svm_trainer import L2SvmTrainer
from iacd.svm.trained_svm import TrainedSVM


@dataclass(frozen=True, eq=False)
class SvmModule:
    """
    A trained binary SVM together with the catalogue features it reads.
    """
    svm: TrainedSVM
    selected_indices: tuple
    cv_accuracy_by_size: dict

    @property
    def q(self) -> int:
        return len(self.selected_indices)

    def decision_value(self, scaled: np.ndarray, scaler: ScalerParams):
        """
        Decision value(s) of scaled vector(s) laid out in the scaler's retained-index space.
        """
        scaled = np.asarray(scaled, dtype=float)
        return self.svm.decision_value(scaled[..., scaler.positions(self.selected_indices)])


def fit_module(scaled: np.ndarray, targets: np.ndarray, scaler: ScalerParams, module_config: ModuleConfig,
               config: TrainingConfig, name: str) -> tuple:
    """
    Rank and wrapper-select features on scaled training data, then train the final SVM on the
    selected columns with the chosen hyperparameters.

    Args:
        scaled (np.ndarray): Training matrix in the scaler's retained-index space.
        targets (np.ndarray): Labels in {+1, -1}.
        scaler (ScalerParams): Scaler that produced the matrix.
        module_config (ModuleConfig): Kernel and candidate feature counts.
        config (TrainingConfig): Grids, folds, seed and solver limits.
        name (str): Module name used in log messages.
    Return:
        (tuple): (selected catalogue indices, TrainedSVM, SelectionResult)
    """
    search = SvmSearchConfig(kernel=module_config.kernel, c_grid=config.c_grid, gamma_grid=config.gamma_grid,
                             max_iter=config.max_iter, tol=config.tol)
    _, selection = select_features(scaled, targets, module_config.candidate_sizes, search, k_folds=config.k_folds,
                                   seed=config.seed, n_jobs=config.n_jobs)
    columns = list(selection.selected_indices)
    svm = L2SvmTrainer(selection.kernel, C=selection.C, max_iter=config.max_iter, tol=config.tol).train(
        scaled[:, columns], targets)
    selected_indices = tuple(scaler.retained_indices[column] for column in columns)

    training_accuracy = float(np.mean(svm.predict(scaled[:, columns]) == targets))
    logger.info(
        f"\n"
        f"====================================================================\n"
        f"Trained {name}: {int(np.sum(targets > 0))} faulty vs {int(np.sum(targets < 0))} healthy samples \n"
        f"    Kernel: {selection.kernel.describe()}, C={selection.C:g}, \n"
        f"    Features: q={selection.q}, CV by size: {'skipped' if selection.cv_skipped else selection.cv_accuracy_by_size}, \n"
        f"    Training accuracy: {training_accuracy:.2%}, support vectors: {len(svm.dual_coefs)}\n"
        f"===================================================================="
        f"\n")
    return selected_indices, svm, selection

import numpy as np
from loguru import logger

from iacd.common.errors import InvalidConfiguration, InvalidModel, SingleClass
from iacd.global_settings import SVM_ALPHA_EPSILON, SVM_DEBUG_CHECKS, SVM_DEFAULT_C, SVM_MAX_ITER, SVM_TOLERANCE
from iacd.svm.kernels.abstract_kernel import KernelSpec
from iacd.svm.kernels.kernel_factory import KernelFactory
from iacd.svm.trained_svm import TrainedSVM, TrainingMeta

# curvature floor for degenerate working pairs
TAU = 1e-12


class L2SvmTrainer:
    """
    Dual solver for the L2 soft-margin SVM.

    The squared-slack penalty turns into a 1/C term on the kernel diagonal, leaving
    alpha_i >= 0 and sum(alpha_i * y_i) = 0 as the only constraints. Pairs are chosen as the
    maximal KKT-violating pair and solved analytically, SMO style.

    Sample Usage:
    ```python
    trainer = L2SvmTrainer(KernelSpec(KernelKind.RBF, gamma=0.5), C=8.0)
    model = trainer.train(vectors, targets)
    ```
    """

    def __init__(self, kernel: KernelSpec, C: float = SVM_DEFAULT_C, max_iter: int = SVM_MAX_ITER,
                 tol: float = SVM_TOLERANCE, debug_checks: bool = SVM_DEBUG_CHECKS, log_non_convergence: bool = True):
        """
        Args:
            kernel (KernelSpec): Kernel to train with.
            C (float): Regularization constant, > 0.
            max_iter (int): Maximum number of full passes (n pair updates each).
            tol (float): Maximum KKT violation accepted at convergence, > 0.
            debug_checks (bool): Assert that the dual objective never decreases between passes.
            log_non_convergence (bool): Warn when the pass budget runs out; cross-validation turns it off.
        """
        if not C > 0:
            raise InvalidConfiguration(f"C must be > 0, got {C}")
        if not tol > 0:
            raise InvalidConfiguration(f"tol must be > 0, got {tol}")
        if max_iter < 1:
            raise InvalidConfiguration(f"max_iter must be >= 1, got {max_iter}")
        self.kernel = kernel
        self.C = C
        self.max_iter = max_iter
        self.tol = tol
        self.debug_checks = debug_checks
        self.log_non_convergence = log_non_convergence

    # ------------------------------------------------------------------------------------------------------------------
    # Public Methods
    # ------------------------------------------------------------------------------------------------------------------

    def train(self, vectors: np.ndarray, targets: np.ndarray) -> TrainedSVM:
        """
        Train a binary model.

        Args:
            vectors (np.ndarray): Training matrix (n, d).
            targets (np.ndarray): Labels in {+1, -1}.
        Return:
            (TrainedSVM): Model with its support vectors; non-convergence is flagged in training_meta.
        Raises:
            SingleClass: When only one class is present.
        """
        x = np.atleast_2d(np.asarray(vectors, dtype=float))
        y = np.asarray(targets, dtype=float).ravel()
        if x.shape[0] != y.shape[0]:
            raise InvalidConfiguration(f"{x.shape[0]} vectors but {y.shape[0]} targets")
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise InvalidConfiguration("targets must be +1 or -1")
        if np.unique(y).size < 2:
            raise SingleClass(f"training data of {y.size} samples holds one class only")

        gram = KernelFactory.create(self.kernel).gram(x, x)
        alpha, passes, residual = self._solve(gram, y)

        support = alpha > SVM_ALPHA_EPSILON
        if not support.any():
            raise InvalidModel("solver produced no support vector")
        bias = self._bias(gram, y, alpha, support)
        converged = residual <= self.tol
        meta = TrainingMeta(
            iterations_used=passes,
            kkt_residual=float(residual),
            converged=bool(converged),
            dual_objective=float(self.dual_objective(gram, y, alpha)),
        )
        if not converged and self.log_non_convergence:
            logger.warning(f"L2 SVM ({self.kernel.describe()}, C={self.C:g}) did not converge in {self.max_iter} "
                           f"passes: KKT residual {residual:.3g} > {self.tol:g}")
        return TrainedSVM(
            support_vectors=x[support],
            dual_coefs=alpha[support] * y[support],
            bias=float(bias),
            kernel=self.kernel,
            C=self.C,
            training_meta=meta,
        )

    def dual_objective(self, gram: np.ndarray, y: np.ndarray, alpha: np.ndarray) -> float:
        """
        W(alpha) = sum(alpha) - 1/2 alpha' Q alpha with Q = yy' * (K + I / C).
        """
        q = self._q_matrix(gram, y)
        return float(alpha.sum() - 0.5 * alpha @ q @ alpha)

    # ------------------------------------------------------------------------------------------------------------------
    # Private Methods
    # ------------------------------------------------------------------------------------------------------------------

    def _q_matrix(self, gram: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.outer(y, y) * (gram + np.eye(len(y)) / self.C)

    def _solve(self, gram: np.ndarray, y: np.ndarray) -> tuple:
        """
        Minimize 1/2 a'Qa - sum(a) over a >= 0, y'a = 0.

        Return:
            (tuple): (alpha, passes used, final maximal KKT violation)
        """
        n = len(y)
        q = self._q_matrix(gram, y)
        alpha = np.zeros(n)
        grad = -np.ones(n)
        positive = y > 0
        previous_objective = 0.0

        residual = np.inf
        for update in range(self.max_iter * n):
            # alphas have no upper bound: every positive point can move up, every negative one down
            score = -y * grad
            up = positive | (alpha > 0)
            low = ~positive | (alpha > 0)
            i = int(np.flatnonzero(up)[np.argmax(score[up])])
            j = int(np.flatnonzero(low)[np.argmin(score[low])])
            residual = score[i] - score[j]
            if residual <= self.tol:
                return alpha, update // n + 1, residual

            old_i, old_j = alpha[i], alpha[j]
            if y[i] != y[j]:
                quad = max(q[i, i] + q[j, j] + 2 * q[i, j], TAU)
                delta = (-grad[i] - grad[j]) / quad
                diff = alpha[i] - alpha[j]
                alpha[i] += delta
                alpha[j] += delta
                if diff > 0 and alpha[j] < 0:
                    alpha[j], alpha[i] = 0.0, diff
                elif diff <= 0 and alpha[i] < 0:
                    alpha[i], alpha[j] = 0.0, -diff
            else:
                quad = max(q[i, i] + q[j, j] - 2 * q[i, j], TAU)
                delta = (grad[i] - grad[j]) / quad
                total = alpha[i] + alpha[j]
                alpha[i] -= delta
                alpha[j] += delta
                if alpha[j] < 0:
                    alpha[j], alpha[i] = 0.0, total
                if alpha[i] < 0:
                    alpha[i], alpha[j] = 0.0, total
            grad += q[:, i] * (alpha[i] - old_i) + q[:, j] * (alpha[j] - old_j)

            if self.debug_checks and (update + 1) % n == 0:
                objective = alpha.sum() - 0.5 * alpha @ q @ alpha
                assert objective >= previous_objective - 1e-9 * max(1.0, abs(objective)), \
                    f"dual objective decreased from {previous_objective} to {objective}"
                previous_objective = objective

        score = -y * grad
        up = positive | (alpha > 0)
        low = ~positive | (alpha > 0)
        residual = float(score[up].max() - score[low].min())
        return alpha, self.max_iter, residual

    def _bias(self, gram: np.ndarray, y: np.ndarray, alpha: np.ndarray, support: np.ndarray) -> float:
        """
        Mean over support vectors of y_i (1 - alpha_i / C) - sum_j alpha_j y_j K(x_j, x_i).
        """
        margins = gram[:, support] @ (alpha[support] * y[support])
        per_vector = y[support] * (1.0 - alpha[support] / self.C) - margins[support]
        return float(per_vector.mean())


def train_l2svm(vectors: np.ndarray, targets: np.ndarray, kernel: KernelSpec, C: float = SVM_DEFAULT_C,
                max_iter: int = SVM_MAX_ITER, tol: float = SVM_TOLERANCE) -> TrainedSVM:
    """
    Train a binary L2 soft-margin SVM; see L2SvmTrainer.
    """
    return L2SvmTrainer(kernel, C=C, max_iter=max_iter, tol=tol).train(vectors, targets)

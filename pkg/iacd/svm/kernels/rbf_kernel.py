import numpy as np
from scipy.spatial.distance import cdist

from iacd.svm.kernels.abstract_kernel import AbstractKernel


class RbfKernel(AbstractKernel):
    """
    Gaussian kernel K(x, z) = exp(-gamma * ||x - z||^2).
    """

    def _compute(self, x: np.ndarray, z: np.ndarray) -> np.ndarray:
        """
        [Implementation of AbstractKernel]
        """
        return np.exp(-self.spec.gamma * cdist(x, z, "sqeuclidean"))

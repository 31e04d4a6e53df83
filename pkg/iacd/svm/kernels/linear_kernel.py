import numpy as np

from iacd.svm.kernels.abstract_kernel import AbstractKernel


class LinearKernel(AbstractKernel):
    """
    K(x, z) = x . z
    """

    def _compute(self, x: np.ndarray, z: np.ndarray) -> np.ndarray:
        """
        [Implementation of AbstractKernel]
        """
        return x @ z.T

import numpy as np

from iacd.svm.kernels.abstract_kernel import AbstractKernel


class PolynomialKernel(AbstractKernel):
    """
    Inhomogeneous polynomial kernel K(x, z) = (x . z + coef0) ** degree; degree 2 is the
    quadratic kernel.
    """

    def _compute(self, x: np.ndarray, z: np.ndarray) -> np.ndarray:
        """
        [Implementation of AbstractKernel]
        """
        return (x @ z.T + self.spec.coef0) ** self.spec.degree

import numpy as np

from iacd.svm.kernels.abstract_kernel import AbstractKernel, KernelKind, KernelSpec
from iacd.svm.kernels.linear_kernel import LinearKernel
from iacd.svm.kernels.polynomial_kernel import PolynomialKernel
from iacd.svm.kernels.rbf_kernel import RbfKernel


class KernelFactory:

    @staticmethod
    def create(spec: KernelSpec) -> AbstractKernel:
        """
        Factory method to create a kernel from its KernelSpec.

        Args:
            spec (KernelSpec): Kernel kind and parameters.

        Return:
            (AbstractKernel): Kernel instance.
        """
        if spec.kind == KernelKind.LINEAR:
            return LinearKernel(spec)
        elif spec.kind == KernelKind.POLY:
            return PolynomialKernel(spec)
        elif spec.kind == KernelKind.RBF:
            return RbfKernel(spec)
        else:
            raise ValueError(f"Unsupported kernel kind: {spec.kind}")

    @staticmethod
    def parse(text: str) -> KernelSpec:
        """
        Parse a kernel override such as ``LINEAR``, ``POLY2``, ``POLY:3``, ``RBF`` or ``RBF:0.5``.
        """
        name, _, parameter = text.strip().upper().partition(":")
        if name.startswith("POLY"):
            degree = parameter or name[len("POLY"):] or "2"
            return KernelSpec(KernelKind.POLY, degree=int(degree))
        elif name == "RBF":
            return KernelSpec(KernelKind.RBF, gamma=float(parameter)) if parameter else KernelSpec(KernelKind.RBF)
        elif name == "LINEAR":
            return KernelSpec(KernelKind.LINEAR)
        else:
            raise ValueError(f"Unsupported kernel kind: {text}")


def kernel_eval(spec: KernelSpec, x: np.ndarray, z: np.ndarray) -> float:
    """
    Evaluate the kernel described by a KernelSpec on two equal-length vectors.
    """
    return KernelFactory.create(spec).evaluate(x, z)

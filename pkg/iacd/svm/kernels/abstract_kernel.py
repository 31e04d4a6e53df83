from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum

import numpy as np

from iacd.common.errors import DimensionMismatch, InvalidConfiguration
from iacd.global_settings import DEFAULT_RBF_GAMMA


class KernelKind(str, Enum):
    LINEAR = "LINEAR"
    POLY = "POLY"
    RBF = "RBF"


@dataclass(frozen=True)
class KernelSpec:
    """
    Kernel choice and parameters. degree applies to POLY, gamma to RBF, coef0 is the POLY offset.
    """
    kind: KernelKind
    degree: int = 1
    gamma: float = DEFAULT_RBF_GAMMA
    coef0: float = 1.0

    def __post_init__(self):
        if not isinstance(self.kind, KernelKind):
            object.__setattr__(self, "kind", KernelKind(self.kind))
        if self.degree < 1:
            raise InvalidConfiguration(f"kernel degree must be >= 1, got {self.degree}")
        if not self.gamma > 0:
            raise InvalidConfiguration(f"kernel gamma must be > 0, got {self.gamma}")

    def describe(self) -> str:
        if self.kind == KernelKind.POLY:
            return f"POLY(degree={self.degree}, coef0={self.coef0:g})"
        if self.kind == KernelKind.RBF:
            return f"RBF(gamma={self.gamma:g})"
        return "LINEAR"


class AbstractKernel(ABC):
    """
    Abstract base class for SVM kernel functions.
    """

    def __init__(self, spec: KernelSpec):
        """
        Args:
            spec (KernelSpec): Kernel parameters.
        """
        self.spec = spec

    # ------------------------------------------------------------------------------------------------------------------
    # Abstract Methods
    # ------------------------------------------------------------------------------------------------------------------

    @abstractmethod
    def _compute(self, x: np.ndarray, z: np.ndarray) -> np.ndarray:
        """
        Kernel values between every row of x and every row of z.

        Args:
            x (np.ndarray): Matrix of shape (n, d).
            z (np.ndarray): Matrix of shape (m, d).
        Return:
            (np.ndarray): Matrix of shape (n, m).
        """
        pass

    # ------------------------------------------------------------------------------------------------------------------
    # Public Methods
    # ------------------------------------------------------------------------------------------------------------------

    def gram(self, x: np.ndarray, z: np.ndarray) -> np.ndarray:
        """
        Kernel matrix between two sets of row vectors.

        Raises:
            DimensionMismatch: When the vectors have different lengths.
        """
        x = np.atleast_2d(np.asarray(x, dtype=float))
        z = np.atleast_2d(np.asarray(z, dtype=float))
        if x.shape[1] != z.shape[1]:
            raise DimensionMismatch(f"kernel arguments have dimensions {x.shape[1]} and {z.shape[1]}")
        return self._compute(x, z)

    def evaluate(self, x: np.ndarray, z: np.ndarray) -> float:
        """
        Kernel value of two single vectors.
        """
        x = np.asarray(x, dtype=float).ravel()
        z = np.asarray(z, dtype=float).ravel()
        return float(self.gram(x[None, :], z[None, :])[0, 0])

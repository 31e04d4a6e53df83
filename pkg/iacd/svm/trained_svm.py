from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel

from iacd.common.errors import DimensionMismatch, InvalidModel
from iacd.svm.kernels.abstract_kernel import KernelKind, KernelSpec
from iacd.svm.kernels.kernel_factory import KernelFactory


@dataclass(frozen=True)
class TrainingMeta:
    """
    Solver diagnostics stored with a model.
    """
    iterations_used: int
    kkt_residual: float
    converged: bool
    dual_objective: float


@dataclass(frozen=True, eq=False)
class TrainedSVM:
    """
    Binary L2 soft-margin SVM: f(x) = sum_i dual_coefs[i] * K(support_vectors[i], x) + bias.

    Sample Usage:
    ```python
    model = train_l2svm(vectors, targets, KernelSpec(KernelKind.POLY, degree=2), C=1.0)
    model.predict(vectors[0])
    ```
    """
    support_vectors: np.ndarray
    dual_coefs: np.ndarray
    bias: float
    kernel: KernelSpec
    C: float
    training_meta: TrainingMeta

    def __post_init__(self):
        for name in ("support_vectors", "dual_coefs"):
            array = np.array(getattr(self, name), dtype=float)
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    @property
    def dimension(self) -> int:
        return int(self.support_vectors.shape[1]) if self.support_vectors.ndim == 2 else 0

    # ------------------------------------------------------------------------------------------------------------------
    # Public Methods
    # ------------------------------------------------------------------------------------------------------------------

    def decision_value(self, x: np.ndarray):
        """
        Decision function for one vector (returns a float) or a matrix of row vectors (returns an array).

        Raises:
            InvalidModel: When the model has no support vector.
            DimensionMismatch: When x does not match the support-vector dimension.
        """
        if self.support_vectors.size == 0 or len(self.dual_coefs) == 0:
            raise InvalidModel("model has no support vector")
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        rows = np.atleast_2d(x)
        if rows.shape[1] != self.dimension:
            raise DimensionMismatch(f"model expects dimension {self.dimension}, got {rows.shape[1]}")
        values = KernelFactory.create(self.kernel).gram(rows, self.support_vectors) @ self.dual_coefs + self.bias
        return float(values[0]) if single else values

    def predict(self, x: np.ndarray):
        """
        Sign of the decision value; zero maps to +1.
        """
        values = self.decision_value(x)
        if np.ndim(values) == 0:
            return 1 if values >= 0 else -1
        return np.where(values >= 0, 1, -1)

    def to_document(self) -> "TrainedSvmDocument":
        return TrainedSvmDocument(
            kernel=KernelDocument(kind=self.kernel.kind.value, degree=self.kernel.degree,
                                  gamma=self.kernel.gamma, coef0=self.kernel.coef0),
            C=self.C,
            bias=self.bias,
            support_vectors=self.support_vectors.tolist(),
            dual_coefs=self.dual_coefs.tolist(),
            iterations_used=self.training_meta.iterations_used,
            kkt_residual=self.training_meta.kkt_residual,
            converged=self.training_meta.converged,
            dual_objective=self.training_meta.dual_objective,
        )

    @staticmethod
    def from_document(document: "TrainedSvmDocument") -> "TrainedSVM":
        if not document.dual_coefs or len(document.support_vectors) != len(document.dual_coefs):
            raise InvalidModel(f"stored model has {len(document.support_vectors)} support vectors and "
                               f"{len(document.dual_coefs)} coefficients")
        kernel = KernelSpec(KernelKind(document.kernel.kind), degree=document.kernel.degree,
                            gamma=document.kernel.gamma, coef0=document.kernel.coef0)
        return TrainedSVM(
            support_vectors=np.array(document.support_vectors, dtype=float).reshape(len(document.dual_coefs), -1),
            dual_coefs=np.array(document.dual_coefs, dtype=float),
            bias=document.bias,
            kernel=kernel,
            C=document.C,
            training_meta=TrainingMeta(iterations_used=document.iterations_used, kkt_residual=document.kkt_residual,
                                       converged=document.converged, dual_objective=document.dual_objective),
        )


class KernelDocument(BaseModel):
    kind: str
    degree: int
    gamma: float
    coef0: float


class TrainedSvmDocument(BaseModel):
    """
    Persisted form of a TrainedSVM.
    """
    kernel: KernelDocument
    C: float
    bias: float
    support_vectors: list[list[float]]
    dual_coefs: list[float]
    iterations_used: int
    kkt_residual: float
    converged: bool
    dual_objective: float

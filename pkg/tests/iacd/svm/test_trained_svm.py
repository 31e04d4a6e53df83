import numpy as np
import pytest

from iacd.common.errors import DimensionMismatch, InvalidModel
from iacd.svm.kernels.abstract_kernel import KernelKind, KernelSpec
from iacd.svm.trained_svm import TrainedSVM, TrainedSvmDocument, TrainingMeta

META = TrainingMeta(iterations_used=3, kkt_residual=1e-4, converged=True, dual_objective=0.5)


def linear_model(bias: float = 0.0) -> TrainedSVM:
    return TrainedSVM(support_vectors=np.array([[1.0, 0.0], [0.0, 1.0]]), dual_coefs=np.array([1.0, -1.0]),
                      bias=bias, kernel=KernelSpec(KernelKind.LINEAR), C=1.0, training_meta=META)


# Test decision values and the sign of a linear model
def test_decision_value_and_predict():
    model = linear_model(bias=0.5)
    assert model.decision_value(np.array([2.0, 1.0])) == pytest.approx(1.5)
    np.testing.assert_allclose(model.decision_value(np.array([[2.0, 1.0], [0.0, 3.0]])), [1.5, -2.5])
    assert model.predict(np.array([0.0, 3.0])) == -1
    assert model.predict(np.array([[2.0, 1.0], [0.0, 3.0]])).tolist() == [1, -1]

# Test a zero decision value maps to +1
def test_predict_zero_is_positive():
    assert linear_model().predict(np.array([1.0, 1.0])) == 1

# Test inputs of another dimension are rejected
def test_decision_value_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        linear_model().decision_value(np.ones(3))

# Test stored arrays are read-only
def test_arrays_are_frozen():
    model = linear_model()
    with pytest.raises(ValueError):
        model.dual_coefs[0] = 5.0

# Test the persisted document restores the model
def test_document_round_trip():
    model = TrainedSVM(support_vectors=np.array([[0.1, 0.2, 0.3]]), dual_coefs=np.array([0.7]), bias=-0.2,
                       kernel=KernelSpec(KernelKind.RBF, gamma=0.25), C=8.0, training_meta=META)
    document = TrainedSvmDocument.model_validate_json(model.to_document().model_dump_json())
    restored = TrainedSVM.from_document(document)
    assert restored.kernel == model.kernel
    assert restored.training_meta == META
    np.testing.assert_array_equal(restored.support_vectors, model.support_vectors)
    x = np.array([0.3, 0.2, 0.1])
    assert restored.decision_value(x) == model.decision_value(x)

# Test a document without support vectors is invalid
def test_from_document_without_support_vectors():
    document = linear_model().to_document().model_copy(update={"support_vectors": [], "dual_coefs": []})
    with pytest.raises(InvalidModel):
        TrainedSVM.from_document(document)

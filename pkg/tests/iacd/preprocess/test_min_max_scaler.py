import numpy as np
import pytest

from iacd.common.errors import DegenerateDatabase, DimensionMismatch, InvalidModel
from iacd.preprocess.min_max_scaler import ScalerParams, apply_scaler, fit_scaler
from iacd.signature.signature import ClassLabel, Signature
from iacd.signature.signature_database import SignatureDatabase

TRAINING = np.array([
    [1.0, 7.0, 10.0, 0.0],
    [3.0, 7.0, 30.0, 5.0],
    [2.0, 7.0, 20.0, 10.0],
])


# Test training vectors land in [0, 1] and null features are removed
def test_fit_and_apply_on_training_data():
    params = fit_scaler(TRAINING)
    assert params.retained_indices == (0, 2, 3)
    assert params.minimums == (1.0, 10.0, 0.0)
    assert params.maximums == (3.0, 30.0, 10.0)
    scaled = apply_scaler(TRAINING, params)
    assert scaled.shape == (3, 3)
    assert scaled.min() == 0.0
    assert scaled.max() == 1.0
    np.testing.assert_allclose(scaled[2], [0.5, 0.5, 1.0])

# Test unseen values are clamped
def test_apply_clamps_unseen_values():
    params = fit_scaler(TRAINING)
    scaled = apply_scaler(np.array([100.0, 7.0, -1000.0, 12.0]), params)
    np.testing.assert_allclose(scaled, [1.5, -0.5, 1.2])

# Test scaling is invariant under positive affine maps of the raw data
def test_affine_invariance():
    rng = np.random.default_rng(5)
    data = rng.normal(size=(20, 6))
    scale = rng.uniform(0.5, 4.0, size=6)
    shift = rng.normal(size=6)
    original = apply_scaler(data, fit_scaler(data))
    transformed_data = data * scale + shift
    np.testing.assert_allclose(apply_scaler(transformed_data, fit_scaler(transformed_data)), original, atol=1e-9)

# Test a database can be fitted directly
def test_fit_from_database():
    signatures = [Signature(tuple(row), ClassLabel.cf(0), str(i)) for i, row in enumerate(TRAINING)]
    assert fit_scaler(SignatureDatabase(signatures)) == fit_scaler(TRAINING)

# Test all-null training data is degenerate
def test_fit_degenerate():
    with pytest.raises(DegenerateDatabase):
        fit_scaler(np.ones((4, 3)))
    with pytest.raises(DegenerateDatabase):
        fit_scaler(np.empty((0, 3)))

# Test vectors of another dimension are rejected
def test_apply_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        apply_scaler(np.zeros(3), fit_scaler(TRAINING))

# Test positions map catalogue indices to scaled columns
def test_positions():
    params = fit_scaler(TRAINING)
    assert params.positions([3, 0]) == [2, 0]
    with pytest.raises(InvalidModel):
        params.positions([1])

# Test parameters are validated
def test_scaler_params_validation():
    with pytest.raises(ValueError):
        ScalerParams(dimension=3, retained_indices=(0, 1), minimums=(0.0,), maximums=(1.0,))
    with pytest.raises(ValueError):
        ScalerParams(dimension=3, retained_indices=(1, 0), minimums=(0.0, 0.0), maximums=(1.0, 1.0))
    with pytest.raises(ValueError):
        ScalerParams(dimension=3, retained_indices=(0, 5), minimums=(0.0, 0.0), maximums=(1.0, 1.0))
    with pytest.raises(ValueError):
        ScalerParams(dimension=3, retained_indices=(0,), minimums=(1.0,), maximums=(1.0,))

import numpy as np
import pytest

from iacd.classifiers.lpd_classifier import LpdModel, train_lpd
from iacd.common.errors import SingleClass
from iacd.preprocess.min_max_scaler import apply_scaler
from iacd.signature.signature import ClassLabel


# Test the LPD picks the link feature and separates the link classes
def test_train_lpd(synthetic_database, small_config):
    model, scaler = train_lpd(synthetic_database, small_config)
    assert isinstance(model, LpdModel)
    assert model.selected_indices[0] == 0
    assert set(model.cv_accuracy_by_size) == {1, 3}
    link = synthetic_database.subset([ClassLabel.link_faulty(), ClassLabel.link_healthy()])
    decisions = model.decision_value(apply_scaler(link.matrix(), scaler), scaler)
    faulty = np.array([label == ClassLabel.link_faulty() for label in link.labels])
    assert (decisions[faulty] >= 0).all()
    assert (decisions[~faulty] < 0).all()

# Test a missing link class cannot train the LPD
def test_train_lpd_single_class(synthetic_database, small_config):
    database = synthetic_database.subset([ClassLabel.link_faulty(), ClassLabel.cf(0)])
    with pytest.raises(SingleClass):
        train_lpd(database, small_config)

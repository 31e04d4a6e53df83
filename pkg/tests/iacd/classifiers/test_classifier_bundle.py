import json
from dataclasses import replace

import numpy as np
import pytest

from iacd.classifiers.cfd_classifier import CfModuleModel
from iacd.classifiers.classifier_bundle import ClassifierBundle, train_bundle
from iacd.common.errors import DimensionMismatch, InvalidModel, NoHealthyBaseline, SchemaError
from iacd.signature.signature import ClassLabel
from iacd.signature.signature_database import SignatureDatabase
from tests.iacd.classifiers.conftest import synthetic_signatures


# Test a trained bundle holds the LPD and one module per configured class
def test_train_bundle(trained_bundle, synthetic_database):
    assert trained_bundle.fault_classes == [ClassLabel.cf(1), ClassLabel.cf(2)]
    assert trained_bundle.scaler.dimension == synthetic_database.dimension
    assert trained_bundle.label_map == {"LINK_FAULTY": "LINK_FAULTY", "LINK_HEALTHY": "LINK_HEALTHY",
                                        "cf_0": "Healthy", "cf_1": "SACK", "cf_2": "DSACK"}

# Test save then load gives identical decisions
def test_save_and_load(tmp_path, trained_bundle, synthetic_database):
    path = tmp_path / "model.json"
    trained_bundle.save(str(path))
    loaded = ClassifierBundle.load(str(path))
    scaled = trained_bundle.scale(synthetic_database.matrix())
    np.testing.assert_array_equal(loaded.lpd_decision(scaled), trained_bundle.lpd_decision(scaled))
    for name, values in trained_bundle.module_decisions(scaled).items():
        np.testing.assert_array_equal(loaded.module_decisions(scaled)[name], values)
    assert loaded.label_map == trained_bundle.label_map
    assert loaded.scaler == trained_bundle.scaler

# Test unknown fields from newer bundle versions are ignored
def test_load_ignores_unknown_fields(tmp_path, trained_bundle):
    path = tmp_path / "model.json"
    document = json.loads(trained_bundle.to_document().model_dump_json())
    document["version"] = 2
    document["calibration"] = {"platt": [1.0, 0.0]}
    path.write_text(json.dumps(document))
    assert len(ClassifierBundle.load(str(path)).cf_modules) == 2

# Test malformed and foreign bundle files
def test_load_invalid_files(tmp_path, trained_bundle):
    path = tmp_path / "model.json"
    path.write_text("{}")
    with pytest.raises(SchemaError):
        ClassifierBundle.load(str(path))
    document = json.loads(trained_bundle.to_document().model_dump_json())
    document["format"] = "something-else"
    path.write_text(json.dumps(document))
    with pytest.raises(InvalidModel):
        ClassifierBundle.load(str(path))

# Test adding a module leaves the existing bundle and modules untouched
def test_with_module(trained_bundle):
    extra = CfModuleModel(svm=trained_bundle.cf_modules[0].svm, selected_indices=(1,), cv_accuracy_by_size={},
                          fault_class=ClassLabel.cf(3))
    extended = trained_bundle.with_module(extra)
    assert extended.fault_classes == [ClassLabel.cf(1), ClassLabel.cf(2), ClassLabel.cf(3)]
    assert extended.cf_modules[0] is trained_bundle.cf_modules[0]
    assert extended.label_map["cf_3"] == "RBuf"
    assert len(trained_bundle.cf_modules) == 2
    assert "cf_3" not in trained_bundle.label_map

# Test bundle invariants
def test_bundle_invariants(trained_bundle):
    with pytest.raises(InvalidModel):
        replace(trained_bundle, cf_modules=())
    module = trained_bundle.cf_modules[0]
    with pytest.raises(InvalidModel):
        replace(trained_bundle, cf_modules=(module, module))

# Test signatures of another dimension are rejected
def test_scale_dimension_mismatch(trained_bundle):
    with pytest.raises(DimensionMismatch):
        trained_bundle.scale(np.zeros(trained_bundle.scaler.dimension + 1))

# Test a database without cf_0 fails before any module is trained
def test_train_bundle_without_healthy_baseline(mocker, small_config):
    train_lpd = mocker.patch("iacd.classifiers.classifier_bundle.train_lpd")
    signatures = [signature for signature in synthetic_signatures() if signature.label != ClassLabel.cf(0)]
    with pytest.raises(NoHealthyBaseline):
        train_bundle(SignatureDatabase(signatures), small_config)
    cf_only = [signature for signature in signatures if not signature.label.is_link]
    with pytest.raises(NoHealthyBaseline):
        train_bundle(SignatureDatabase(cf_only), small_config)
    train_lpd.assert_not_called()

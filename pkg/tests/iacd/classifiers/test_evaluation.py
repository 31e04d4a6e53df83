import json

import pytest

from iacd.classifiers.evaluation import (
    SampleOutcome,
    accuracy_table,
    collect_outcomes,
    confusion_frame,
    evaluate,
    expected_faults,
    metrics_from_outcomes,
    write_metrics,
)
from iacd.signature.signature import ClassLabel
from iacd.signature.signature_database import SignatureDatabase
from tests.iacd.classifiers.conftest import synthetic_signatures

FAULT_MODULES = [ClassLabel.cf(1), ClassLabel.cf(3), ClassLabel.cf(4)]


@pytest.fixture
def outcomes():
    link_faulty, link_healthy = ClassLabel.link_faulty(), ClassLabel.link_healthy()
    return [
        SampleOutcome("f1", link_faulty, lpd_decision_value=0.5),
        SampleOutcome("f2", link_faulty, lpd_decision_value=-0.1),
        SampleOutcome("h1", link_healthy, lpd_decision_value=-1.0),
        SampleOutcome("h2", link_healthy, lpd_decision_value=-2.0),
        SampleOutcome("c0a", ClassLabel.cf(0), module_decision_values={"cf_1": -1.0, "cf_3": -1.0, "cf_4": -1.0}),
        SampleOutcome("c0b", ClassLabel.cf(0), module_decision_values={"cf_1": 0.2, "cf_3": -1.0, "cf_4": -1.0}),
        SampleOutcome("c3a", ClassLabel.cf(3), module_decision_values={"cf_1": -1.0, "cf_3": 0.5, "cf_4": -1.0}),
        SampleOutcome("c3b", ClassLabel.cf(3), module_decision_values={"cf_1": 0.3, "cf_3": 0.5, "cf_4": -1.0}),
        SampleOutcome("c5", ClassLabel.cf(5), module_decision_values={"cf_1": -1.0, "cf_3": 1.0, "cf_4": 0.0}),
    ]


# Test the fault set each client class is expected to trigger
def test_expected_faults():
    assert expected_faults(ClassLabel.cf(0)) == frozenset()
    assert expected_faults(ClassLabel.cf(3)) == frozenset({3})
    assert expected_faults(ClassLabel.cf(5)) == frozenset({3, 4})
    assert expected_faults(ClassLabel.cf(8)) == frozenset({8})

# Test class accuracy needs the exact fault set while detection needs only the expected faults
def test_class_metrics(outcomes):
    metrics = metrics_from_outcomes(outcomes, FAULT_MODULES, dataset="unit")
    assert metrics.dataset == "unit"
    assert metrics.samples == 9
    assert metrics.class_counts == {"cf_0": 2, "cf_3": 2, "cf_5": 1, "LINK_FAULTY": 2, "LINK_HEALTHY": 2}
    assert metrics.class_accuracy == {"cf_0": 0.5, "cf_3": 0.5, "cf_5": 1.0, "LINK_FAULTY": 0.5, "LINK_HEALTHY": 1.0}
    assert metrics.class_detection_rate == {"cf_3": 1.0, "cf_5": 1.0}
    assert metrics.healthy_accuracy == 0.5

# Test LPD confusion counts over the link samples
def test_lpd_confusion(outcomes):
    lpd = metrics_from_outcomes(outcomes, FAULT_MODULES).lpd
    assert (lpd.tp, lpd.fp, lpd.tn, lpd.fn) == (1, 0, 2, 1)
    assert lpd.accuracy == 0.75
    assert lpd.false_positive_rate == 0.0
    assert lpd.true_positive_rate == 0.5

# Test module confusion counts cover healthy clients and the classes expecting the module
def test_module_confusion(outcomes):
    modules = metrics_from_outcomes(outcomes, FAULT_MODULES).cf_modules
    sack = modules["cf_1"]
    assert (sack.tp, sack.fp, sack.tn, sack.fn) == (0, 1, 1, 0)
    rbuf = modules["cf_3"]
    assert (rbuf.tp, rbuf.fp, rbuf.tn, rbuf.fn) == (3, 0, 2, 0)
    wbuf = modules["cf_4"]
    assert (wbuf.tp, wbuf.fp, wbuf.tn, wbuf.fn) == (1, 0, 2, 0)

# Test the confusion table of actual classes against predicted diagnoses
def test_confusion_frame(outcomes):
    label_map = {"cf_0": "Healthy", "cf_1": "SACK", "cf_3": "RBuf", "cf_4": "WBuf"}
    frame = confusion_frame(outcomes, label_map)
    assert frame.loc["cf_5", "RBuf+WBuf"] == 1
    assert frame.loc["cf_3", "SACK+RBuf"] == 1
    assert frame.loc["cf_0", "Healthy"] == 1
    assert frame.loc["LINK_FAULTY", "LINK_HEALTHY"] == 1
    assert int(frame.values.sum()) == len(outcomes)

# Test the accuracy table has one row per data set
def test_accuracy_table(outcomes):
    first = metrics_from_outcomes(outcomes, FAULT_MODULES, dataset="a")
    second = metrics_from_outcomes(outcomes[:4], FAULT_MODULES, dataset="b")
    table = accuracy_table([first, second], label_map={})
    assert list(table.columns) == ["Healthy", "RBuf", "R-WBuf", "LINK_FAULTY", "LINK_HEALTHY"]
    assert list(table.index) == ["a", "b"]
    assert table.loc["a", "R-WBuf"] == 100.0
    assert table.loc["b", "LINK_FAULTY"] == 50.0
    assert table.isna().loc["b", "Healthy"]

# Test metrics are written as a JSON report
def test_write_metrics(tmp_path, outcomes):
    path = tmp_path / "metrics.json"
    write_metrics([metrics_from_outcomes(outcomes, FAULT_MODULES, dataset="unit")], str(path))
    document = json.loads(path.read_text())
    assert document["datasets"][0]["lpd"]["tp"] == 1

# Test a trained bundle on fresh signatures from the same classes
def test_evaluate_trained_bundle(trained_bundle):
    database = SignatureDatabase(synthetic_signatures(seed=1))
    outcomes = collect_outcomes(trained_bundle, database)
    assert len(outcomes) == len(database)
    assert outcomes[0].lpd_decision_value is not None
    metrics = evaluate(trained_bundle, database, dataset="fresh")
    assert metrics.samples == len(database)
    assert all(accuracy >= 0.9 for accuracy in metrics.class_accuracy.values())
    assert set(metrics.cf_modules) == {"cf_1", "cf_2"}

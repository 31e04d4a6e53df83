import json
from dataclasses import replace
from unittest.mock import MagicMock

import numpy as np
import pytest

from iacd.classifiers.diagnosis import (
    CLIENT_FAULTS,
    CLIENT_HEALTHY,
    LINK_PROBLEM,
    diagnose,
    diagnose_features,
    write_report,
)
from iacd.common.errors import TracePairMismatch
from iacd.signature.signature import ClassLabel
from iacd.traces.packet_record import ConnectionKey


def mock_bundle(lpd_value: float, module_values: dict) -> MagicMock:
    bundle = MagicMock()
    bundle.scale.return_value = np.zeros(4)
    bundle.lpd_decision.return_value = lpd_value
    bundle.module_decisions.return_value = module_values
    bundle.fault_classes = [ClassLabel.parse(name) for name in module_values]
    bundle.label_map = {name: ClassLabel.parse(name).short_name for name in module_values}
    return bundle


# Test a faulty link stops the diagnosis before the CF modules
def test_link_problem_skips_cf_modules():
    bundle = mock_bundle(0.7, {"cf_3": 1.0})
    report = diagnose_features(bundle, np.zeros(4), source_id="pair-1")
    assert report.overall == LINK_PROBLEM
    assert report.link_status == "FAULTY"
    assert report.client_faults == ()
    assert not report.cf_modules_run
    assert report.source_id == "pair-1"
    bundle.module_decisions.assert_not_called()

# Test a zero LPD decision counts as a faulty link
def test_zero_lpd_decision_is_faulty():
    assert diagnose_features(mock_bundle(0.0, {"cf_1": -1.0}), np.zeros(4)).overall == LINK_PROBLEM

# Test positive modules become the client fault set in module order
def test_client_faults():
    bundle = mock_bundle(-0.4, {"cf_1": -0.2, "cf_2": -1.0, "cf_3": 0.3, "cf_4": 0.0})
    report = diagnose_features(bundle, np.zeros(4))
    assert report.overall == CLIENT_FAULTS
    assert report.link_status == "HEALTHY"
    assert report.client_faults == (ClassLabel.cf(3), ClassLabel.cf(4))
    assert report.summary() == "CLIENT_FAULTS: RBuf, WBuf"
    assert report.module_decision_values["cf_2"] == -1.0

# Test no positive module on a healthy link
def test_client_healthy():
    report = diagnose_features(mock_bundle(-1.0, {"cf_1": -0.5, "cf_2": -0.1}), np.zeros(4))
    assert report.overall == CLIENT_HEALTHY
    assert report.summary() == CLIENT_HEALTHY
    assert report.cf_modules_run

# Test run_both evaluates the CF modules behind a faulty link
def test_run_both():
    bundle = mock_bundle(2.0, {"cf_1": -0.5, "cf_2": 0.4})
    report = diagnose_features(bundle, np.zeros(4), run_both=True)
    assert report.overall == CLIENT_FAULTS
    assert report.link_status == "FAULTY"
    assert report.client_faults == (ClassLabel.cf(2),)
    quiet = diagnose_features(mock_bundle(2.0, {"cf_1": -0.5}), np.zeros(4), run_both=True)
    assert quiet.overall == LINK_PROBLEM
    assert quiet.cf_modules_run

# Test the report document is written as JSON
def test_write_report(tmp_path):
    report = diagnose_features(mock_bundle(-1.0, {"cf_3": 0.5}), np.zeros(4), source_id="pair")
    path = tmp_path / "report.json"
    write_report(report, str(path))
    document = json.loads(path.read_text())
    assert document["overall"] == CLIENT_FAULTS
    assert document["client_faults"] == ["cf_3"]
    assert document["client_fault_names"] == ["RBuf"]
    assert document["summary"] == "CLIENT_FAULTS: RBuf"

# Test a trained bundle flags a faulty-link vector
def test_diagnose_features_with_trained_bundle(trained_bundle, synthetic_database):
    faulty = synthetic_database.subset([ClassLabel.link_faulty()]).matrix()[0]
    assert diagnose_features(trained_bundle, faulty).overall == LINK_PROBLEM

# Test trace pairs are checked and the connection names the report
def test_diagnose_traces(mocker, clean_transfer):
    client, server, _ = clean_transfer
    mocker.patch("iacd.classifiers.diagnosis.extract_features", return_value=np.zeros(4))
    report = diagnose(mock_bundle(-1.0, {"cf_1": -1.0}), client, server)
    assert report.overall == CLIENT_HEALTHY
    assert report.source_id.startswith("10.0.0.2:")
    key = server.connection_key
    packets = tuple(replace(packet, src_port=1) if packet.src_port == key.src_port else replace(packet, dst_port=1)
                    for packet in server.packets)
    foreign = replace(server, packets=packets, connection_key=ConnectionKey(key.src_addr, 1, key.dst_addr, key.dst_port))
    with pytest.raises(TracePairMismatch):
        diagnose(mock_bundle(-1.0, {"cf_1": -1.0}), client, foreign)

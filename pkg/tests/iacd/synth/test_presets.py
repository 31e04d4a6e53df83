import pytest

from iacd.global_settings import MSS
from iacd.signature.signature import ClassLabel
from iacd.synth.presets import ScenarioPresetFactory, client_for_class, spread
from iacd.synth.scenario import CcProfile, ClientConfig


# Test samples spread evenly with earlier parts first
def test_spread():
    assert spread(11, 3) == [4, 4, 3]
    assert spread(3, 3) == [1, 1, 1]
    assert spread(2, 3) == [1, 1, 0]

# Test each client class maps to its misconfiguration
def test_client_for_class():
    profile = CcProfile.AIMD_STD
    assert client_for_class(0, profile) == ClientConfig()
    assert not client_for_class(1, profile).sack_enabled
    assert not client_for_class(2, profile).dsack_enabled
    assert client_for_class(3, profile, 8).read_buffer == 8 * MSS
    assert client_for_class(4, profile, 16).write_buffer == 16 * MSS
    both = client_for_class(5, profile, 4)
    assert (both.read_buffer, both.write_buffer) == (4 * MSS, 4 * MSS)
    with pytest.raises(ValueError):
        client_for_class(6, profile)

# Test the testbed preset matrices and their sizes
def test_testbed_preset_sizes():
    matrices = ScenarioPresetFactory.create("testbed")
    assert list(matrices)[:2] == ["cfd-train", "lpd-train"]
    assert len(matrices) == 2 + 2 * len(CcProfile)
    assert matrices["cfd-train"].total_samples == 66
    assert matrices["lpd-test-aimd-aggressive"].total_samples == 40
    assert matrices["cfd-test-aimd-conservative"].total_samples == 66
    lpd_train = matrices["lpd-train"]
    faulty = sum(s.samples for s in lpd_train.scenarios if s.label == ClassLabel.link_faulty())
    healthy = sum(s.samples for s in lpd_train.scenarios if s.label == ClassLabel.link_healthy())
    assert (faulty, healthy) == (100, 100)

# Test CFD corpora hold 11 samples of every client class
def test_cfd_class_counts():
    cfd = ScenarioPresetFactory.create("testbed")["cfd-train"]
    for index in range(6):
        assert sum(s.samples for s in cfd.scenarios if s.label == ClassLabel.cf(index)) == 11
    rbuf = [s for s in cfd.scenarios if s.label == ClassLabel.cf(3)]
    assert [s.samples for s in rbuf] == [4, 4, 3]
    assert [s.client.read_buffer for s in rbuf] == [4 * MSS, 8 * MSS, 16 * MSS]

# Test test corpora run on their own congestion-control profile
def test_profiles_per_matrix():
    matrices = ScenarioPresetFactory.create("testbed")
    assert {s.client.cc_profile for s in matrices["cfd-train"].scenarios} == {CcProfile.AIMD_STD}
    assert {s.client.cc_profile for s in matrices["lpd-test-aimd-conservative"].scenarios} == {
        CcProfile.AIMD_CONSERVATIVE}

# Test scenario seeds derive from the root seed and are distinct
def test_seeds():
    matrices = ScenarioPresetFactory.create("testbed", seed=3)
    seeds = [scenario.seed for matrix in matrices.values() for scenario in matrix.scenarios]
    assert len(set(seeds)) == len(seeds)
    assert matrices["cfd-train"].scenarios[0].seed == 3 << 20
    assert matrices["lpd-train"].scenarios[2].seed == (3 << 20) + (1 << 14) + (2 << 8)
    assert ScenarioPresetFactory.create("testbed", seed=3) == matrices

# Test the smoke preset is a small CFD corpus
def test_smoke_preset():
    matrices = ScenarioPresetFactory.create("smoke", transfer_size=10 ** 7)
    assert list(matrices) == ["smoke"]
    assert matrices["smoke"].total_samples == 18
    assert {s.transfer_size for s in matrices["smoke"].scenarios} == {262_144}

# Test preset names
def test_unknown_preset():
    assert ScenarioPresetFactory.is_preset("smoke")
    assert not ScenarioPresetFactory.is_preset("scenarios.json")
    with pytest.raises(ValueError):
        ScenarioPresetFactory.create("lab")

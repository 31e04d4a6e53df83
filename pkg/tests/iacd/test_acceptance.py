import json
from collections import Counter
from dataclasses import replace

import pytest

from iacd.cli import main
from iacd.classifiers.classifier_bundle import ClassifierBundle, train_bundle
from iacd.classifiers.diagnosis import diagnose
from iacd.classifiers.evaluation import evaluate
from iacd.classifiers.lpd_classifier import train_lpd
from iacd.classifiers.training_config import ModuleConfig, create_default_training_config
from iacd.global_settings import DEFAULT_SEED
from iacd.signature.signature import ClassLabel
from iacd.signature.signature_database import SignatureDatabase
from iacd.svm.kernels.abstract_kernel import KernelKind, KernelSpec
from iacd.synth.corpus_generator import generate_corpus
from iacd.synth.presets import ScenarioPresetFactory

SMOKE_TRANSFER = 131_072
# held-out corpora come from another root seed than the training corpora
TEST_SEED = DEFAULT_SEED + 1000
LPD_CANDIDATE_SIZES = (25, 75)
SHIFTED_PROFILES = ("aimd-aggressive", "aimd-conservative")


def link_matrix(path) -> None:
    path.write_text(json.dumps({"name": "links", "scenarios": [
        {"name": f"loss{rate}", "label": "LINK_FAULTY", "link": {"loss_rate": rate / 100, "reorder_rate": 0.01},
         "samples": 3, "transfer_size": SMOKE_TRANSFER, "seed": 4096 + rate}
        for rate in (3, 6, 9)
    ] + [
        {"name": "healthy", "label": "LINK_HEALTHY", "link": {"reorder_rate": 0.01}, "samples": 9,
         "transfer_size": SMOKE_TRANSFER, "seed": 8192},
    ]}))


# Test synth, train, evaluate and diagnose end to end through the command line
@pytest.mark.acceptance
def test_command_line_pipeline(tmp_path, capsys):
    corpus = tmp_path / "corpus"
    assert main(["synth", "--matrix", "smoke", "--out", str(corpus), "--transfer-size", str(SMOKE_TRANSFER)]) == 0
    matrix_path = tmp_path / "links.json"
    link_matrix(matrix_path)
    assert main(["synth", "--matrix", str(matrix_path), "--out", str(tmp_path / "links"), "--pcap"]) == 0

    cfd_db = corpus / "smoke" / "signatures.jsonl"
    lpd_db = tmp_path / "links" / "links" / "signatures.jsonl"
    assert SignatureDatabase.load(str(cfd_db)).class_counts == {f"cf_{j}": 3 for j in range(6)}
    model = tmp_path / "model.json"
    assert main(["train", "--db", str(cfd_db), "--db", str(lpd_db), "--model", str(model),
                 "--module", "all", "--features", "10"]) == 0
    bundle = ClassifierBundle.load(str(model))
    assert [str(label) for label in bundle.fault_classes] == ["cf_1", "cf_2", "cf_3", "cf_4"]

    results = tmp_path / "results"
    assert main(["evaluate", "--model", str(model), "--db", str(cfd_db), "--db", str(lpd_db),
                 "--out", str(results)]) == 0
    metrics = json.loads((results / "metrics.json").read_text())
    assert [entry["dataset"] for entry in metrics["datasets"]] == ["smoke", "links"]
    assert metrics["datasets"][1]["lpd"]["accuracy"] >= 0.8
    assert metrics["datasets"][0]["healthy_accuracy"] >= 0.5

    capsys.readouterr()
    assert main(["diagnose", "--model", str(model), "--client", str(tmp_path / "links" / "links" / "loss9-0.client.pcap"),
                 "--server", str(tmp_path / "links" / "links" / "loss9-0.server.pcap")]) == 0
    summary, _, report = capsys.readouterr().out.partition("\n")
    assert summary == "LINK_PROBLEM"
    assert json.loads(report)["link_status"] == "FAULTY"
    assert not json.loads(report)["cf_modules_run"]


def lpd_config(candidate_sizes: tuple) -> ModuleConfig:
    return ModuleConfig(kernel=KernelSpec(KernelKind.POLY, degree=2), candidate_sizes=candidate_sizes)


@pytest.fixture(scope="module")
def testbed_config():
    return create_default_training_config(lpd=lpd_config(LPD_CANDIDATE_SIZES), n_jobs=-1)


@pytest.fixture(scope="module")
def testbed_training():
    """
    The testbed CFD and LPD training corpora, on the standard profile.
    """
    matrices = ScenarioPresetFactory.create("testbed", seed=DEFAULT_SEED)
    return SignatureDatabase.concat([generate_corpus(matrices[name], n_jobs=-1)[1]
                                     for name in ("cfd-train", "lpd-train")])


@pytest.fixture(scope="module")
def testbed_held_out():
    """
    Every testbed test corpus, regenerated from another seed: name -> (samples, database).
    """
    matrices = ScenarioPresetFactory.create("testbed", seed=TEST_SEED)
    return {name: generate_corpus(matrix, n_jobs=-1) for name, matrix in matrices.items() if "-test-" in name}


@pytest.fixture(scope="module")
def testbed_bundle(testbed_training, testbed_config):
    return train_bundle(testbed_training, testbed_config)


def held_out_metrics(bundle, held_out: dict, name: str):
    return evaluate(bundle, held_out[name][1], dataset=name)


# Test the link problem detector on held-out links of the training profile
@pytest.mark.acceptance
def test_link_problem_detection(testbed_bundle, testbed_held_out):
    assert testbed_bundle.lpd.q in LPD_CANDIDATE_SIZES
    metrics = held_out_metrics(testbed_bundle, testbed_held_out, "lpd-test-aimd-std")
    assert metrics.lpd.accuracy >= 0.95

# Test the smaller LPD feature set generalizes at least as well to other congestion-control profiles
@pytest.mark.acceptance
def test_link_detection_feature_count_ordering(testbed_bundle, testbed_training, testbed_held_out, testbed_config):
    bundles = {}
    for q in LPD_CANDIDATE_SIZES:
        lpd, _ = train_lpd(testbed_training, replace(testbed_config, lpd=lpd_config((q,))), testbed_bundle.scaler)
        bundles[q] = replace(testbed_bundle, lpd=lpd)
    for profile in SHIFTED_PROFILES:
        name = f"lpd-test-{profile}"
        accuracy = {q: held_out_metrics(bundle, testbed_held_out, name).lpd.accuracy for q, bundle in bundles.items()}
        assert accuracy[25] >= accuracy[75], f"{name}: {accuracy}"

# Test every client fault module and the healthy class on held-out clients of the training profile
@pytest.mark.acceptance
def test_client_fault_detection(testbed_bundle, testbed_held_out):
    metrics = held_out_metrics(testbed_bundle, testbed_held_out, "cfd-test-aimd-std")
    assert [str(label) for label in testbed_bundle.fault_classes] == ["cf_1", "cf_2", "cf_3", "cf_4"]
    for fault in testbed_bundle.fault_classes:
        assert metrics.cf_modules[str(fault)].accuracy >= 0.90, f"{fault}: {metrics.cf_modules[str(fault)]}"
    assert metrics.healthy_accuracy >= 0.85

# Test combined read and write buffer faults fire both buffer modules
@pytest.mark.acceptance
def test_simultaneous_buffer_faults(testbed_bundle, testbed_held_out):
    samples, database = testbed_held_out["cfd-test-aimd-std"]
    metrics = evaluate(testbed_bundle, database, dataset="cfd-test-aimd-std")
    assert metrics.class_detection_rate["cf_5"] >= 0.90
    combined = [sample for sample in samples if sample.label == ClassLabel.cf(5)]
    summaries = Counter(diagnose(testbed_bundle, sample.client, sample.server).summary() for sample in combined)
    assert summaries.most_common(1)[0][0] == "CLIENT_FAULTS: RBuf, WBuf", summaries

# Test per-class accuracy drops by at most 10 points on the other congestion-control profiles
@pytest.mark.acceptance
@pytest.mark.parametrize("corpus", ["lpd", "cfd"])
def test_accuracy_across_congestion_control_profiles(testbed_bundle, testbed_held_out, corpus):
    baseline = held_out_metrics(testbed_bundle, testbed_held_out, f"{corpus}-test-aimd-std").class_accuracy
    for profile in SHIFTED_PROFILES:
        shifted = held_out_metrics(testbed_bundle, testbed_held_out, f"{corpus}-test-{profile}").class_accuracy
        for label, accuracy in baseline.items():
            assert shifted[label] >= accuracy - 0.10, f"{label} on {profile}: {shifted[label]:.2%} vs {accuracy:.2%}"

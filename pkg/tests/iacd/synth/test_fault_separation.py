import pytest

from iacd.featsel.t_test_ranking import rank_features, t_scores
from iacd.global_settings import FAULT_CLASSES
from iacd.preprocess.label_encoder import encode_labels
from iacd.signature.signature import ClassLabel
from iacd.synth.corpus_generator import generate_corpus
from iacd.synth.presets import CFD_SAMPLES_PER_CLASS, ScenarioPresetFactory

# smallest |t| the top-ranked feature must reach for a fault to be learnable
MIN_TOP_T = 2.0


@pytest.fixture(scope="module")
def cfd_training_database():
    """
    The testbed CFD training corpus at default settings: 11 signatures per client class.
    """
    _, database = generate_corpus(ScenarioPresetFactory.create("testbed")["cfd-train"], n_jobs=-1)
    return database


# Test every fault class leaves an artifact the t-test ranks above |t| = 2 against healthy clients
@pytest.mark.acceptance
@pytest.mark.parametrize("fault_index", [index for index in FAULT_CLASSES if index > 0])
def test_fault_artifacts_separate_from_healthy(cfd_training_database, fault_index):
    fault, healthy = ClassLabel.cf(fault_index), ClassLabel.cf(0)
    pair = cfd_training_database.subset([fault, healthy])
    assert pair.class_counts == {str(healthy): CFD_SAMPLES_PER_CLASS, str(fault): CFD_SAMPLES_PER_CLASS}
    vectors, targets = encode_labels(pair, fault, healthy)
    ranking = rank_features(t_scores(vectors, targets))
    top_name = pair.feature_names[ranking.indices[0]]
    assert ranking.scores[0] >= MIN_TOP_T, f"{fault}: best feature {top_name} has |t| = {ranking.scores[0]:.3f}"

import json
import os

import pytest

from iacd.common.errors import NoScenarios
from iacd.global_settings import MSS
from iacd.signature.signature import ClassLabel
from iacd.signature.signature_database import SignatureDatabase
from iacd.synth.corpus_generator import (
    CorpusEntry,
    CorpusManifest,
    generate_corpus,
    sample_seed,
    simulate_sample,
    write_corpus,
)
from iacd.synth.scenario import ClientConfig, LinkConfig, Scenario, ScenarioMatrix
from iacd.traces.canonical_trace_reader import CanonicalTraceReader
from iacd.traces.pcap_trace_reader import PcapTraceReader
from iacd.traces.packet_record import CapturePoint

TRANSFER = 16 * MSS


@pytest.fixture(scope="module")
def matrix():
    return ScenarioMatrix(name="mini", scenarios=(
        Scenario(name="healthy", label=ClassLabel.cf(0), samples=2, transfer_size=TRANSFER, seed=256),
        Scenario(name="nosack", label=ClassLabel.cf(1), link=LinkConfig(loss_rate=0.05),
                 client=ClientConfig(sack_enabled=False), samples=1, transfer_size=TRANSFER, seed=512),
    ))


@pytest.fixture(scope="module")
def corpus(matrix):
    return generate_corpus(matrix)


# Test sample seeds combine the scenario seed and the sample index
def test_sample_seed(matrix):
    assert sample_seed(matrix.scenarios[0], 0) == 256
    assert sample_seed(matrix.scenarios[0], 3) == 259

# Test every sample becomes a labeled signature in matrix order
def test_generate_corpus(corpus):
    samples, database = corpus
    assert [sample.source_id for sample in samples] == ["healthy#0", "healthy#1", "nosack#0"]
    assert [signature.source_id for signature in database.signatures] == ["healthy#0", "healthy#1", "nosack#0"]
    assert database.class_counts == {"cf_0": 2, "cf_1": 1}
    assert database.dimension == 280
    assert all(sample.event_log.completed for sample in samples)

# Test a sample can be regenerated on its own
def test_simulate_sample_reproduces_corpus(matrix, corpus):
    samples, _ = corpus
    again = simulate_sample(matrix.scenarios[0], 1)
    assert again.client == samples[1].client
    assert again.event_log == samples[1].event_log

# Test the corpus does not depend on the number of workers
def test_generate_corpus_parallel(matrix, corpus):
    _, database = corpus
    _, parallel_database = generate_corpus(matrix, n_jobs=2)
    assert parallel_database.signatures == database.signatures

# Test an empty matrix is rejected
def test_generate_corpus_without_scenarios():
    with pytest.raises(NoScenarios):
        generate_corpus(ScenarioMatrix(scenarios=(), name="empty"))

# Test traces and the database are written into the output directory
def test_write_corpus(tmp_path, corpus):
    samples, database = corpus
    out_dir = tmp_path / "mini"
    database_path = write_corpus(samples, database, str(out_dir), pcap=True)
    assert database_path == os.path.join(str(out_dir), "signatures.jsonl")
    assert SignatureDatabase.load(database_path).signatures == database.signatures
    client_trace = CanonicalTraceReader(str(out_dir / "healthy-0.client.trace")).read_trace()
    assert client_trace == samples[0].client
    server_pcap = PcapTraceReader(str(out_dir / "nosack-0.server.pcap"), capture_point=CapturePoint.SERVER)
    assert server_pcap.read_trace() == samples[2].server

# Test the manifest lists each corpus
def test_manifest(tmp_path):
    manifest = CorpusManifest(source="smoke", seed=7, transfer_size=TRANSFER, corpora=[
        CorpusEntry(name="smoke", directory="smoke", database="smoke/signatures.jsonl", samples=18,
                    class_counts={"cf_0": 3})])
    path = tmp_path / "manifest.json"
    manifest.save(str(path))
    document = json.loads(path.read_text())
    assert document["format"] == "iacd-corpus-manifest"
    assert document["corpora"][0]["samples"] == 18
    assert CorpusManifest.model_validate_json(path.read_text()) == manifest

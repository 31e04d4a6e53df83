import os
from dataclasses import dataclass
from typing import Optional

from joblib import Parallel, delayed
from loguru import logger
from pydantic import BaseModel

from iacd.signature.signature import ClassLabel, build_signature
from iacd.signature.signature_database import SignatureDatabase, assemble_database
from iacd.synth.scenario import Scenario, ScenarioMatrix
from iacd.synth.tcp_simulator import EventLog, simulate_connection
from iacd.traces.packet_record import TraceFile
from iacd.traces.trace_writers import write_canonical, write_pcap

DATABASE_FILE_NAME = "signatures.jsonl"
MANIFEST_FILE_NAME = "manifest.json"
MANIFEST_FORMAT = "iacd-corpus-manifest"


@dataclass(frozen=True)
class GeneratedSample:
    """
    One simulated transfer of a scenario: both traces plus the ground-truth event log.
    """
    scenario_name: str
    index: int
    seed: int
    label: ClassLabel
    client: TraceFile
    server: TraceFile
    event_log: EventLog

    @property
    def source_id(self) -> str:
        return f"{self.scenario_name}#{self.index}"


def sample_seed(scenario: Scenario, index: int) -> int:
    """
    Per-sample seed: scenario seed XOR sample index.
    """
    return scenario.seed ^ index


def simulate_sample(scenario: Scenario, index: int) -> GeneratedSample:
    """
    Simulate sample `index` of a scenario.

    Raises:
        InfeasibleScenario: When the scenario cannot complete a transfer.
    """
    seed = sample_seed(scenario, index)
    client, server, event_log = simulate_connection(scenario.link, scenario.client, scenario.transfer_size, seed)
    logger.debug(f"{scenario.name}#{index} (seed {seed}): {len(client)} client / {len(server)} server packets, "
                 f"{event_log.losses_injected} losses, {event_log.retransmissions} retransmissions")
    return GeneratedSample(scenario_name=scenario.name, index=index, seed=seed, label=scenario.label,
                           client=client, server=server, event_log=event_log)


def generate_corpus(matrix: ScenarioMatrix, n_jobs: int = 1) -> tuple:
    """
    Simulate every sample of a matrix and turn each trace pair into a labeled signature.

    Samples are independent and seeded up front, so the result does not depend on n_jobs.

    Args:
        matrix (ScenarioMatrix): Scenarios to run.
        n_jobs (int): Parallel simulation workers.
    Return:
        (tuple): (list of GeneratedSample in matrix order, SignatureDatabase)
    Raises:
        NoScenarios: When the matrix is empty.
    """
    matrix.require_scenarios()
    jobs = [(scenario, index) for scenario in matrix.scenarios for index in range(scenario.samples)]
    samples = Parallel(n_jobs=n_jobs)(delayed(simulate_sample)(scenario, index) for scenario, index in jobs)
    signatures = [build_signature(sample.client, sample.server, sample.label, source_id=sample.source_id)
                  for sample in samples]
    database = assemble_database(signatures)

    total_losses = sum(sample.event_log.losses_injected for sample in samples)
    total_retransmissions = sum(sample.event_log.retransmissions for sample in samples)
    logger.info(
        f"\n"
        f"==================================================================\n"
        f"Generated corpus {matrix.name or '(unnamed)'} \n"
        f"    Scenarios: {len(matrix.scenarios)}\n"
        f"    Samples: {len(samples)}\n"
        f"    Class counts: {database.class_counts}\n"
        f"    Losses injected: {total_losses}\n"
        f"    Retransmissions: {total_retransmissions}\n"
        f"=================================================================="
        f"\n"
    )
    return samples, database


def write_corpus(samples: list, database: SignatureDatabase, out_dir: str, pcap: bool = False) -> str:
    """
    Write the trace pairs of a corpus and its signature database into out_dir.

    Traces are named `<scenario>-<index>.client.trace` and `<scenario>-<index>.server.trace`
    (plus `.pcap` twins when requested).

    Return:
        (str): Path of the written signature database.
    """
    os.makedirs(out_dir, exist_ok=True)
    for sample in samples:
        stem = os.path.join(out_dir, f"{sample.scenario_name}-{sample.index}")
        write_canonical(sample.client, f"{stem}.client.trace")
        write_canonical(sample.server, f"{stem}.server.trace")
        if pcap:
            write_pcap(sample.client, f"{stem}.client.pcap")
            write_pcap(sample.server, f"{stem}.server.pcap")
    database_path = os.path.join(out_dir, DATABASE_FILE_NAME)
    database.save(database_path)
    logger.info(f"Wrote {len(samples)} trace pairs to {out_dir}")
    return database_path


class CorpusEntry(BaseModel):
    name: str
    directory: str
    database: str
    samples: int
    class_counts: dict[str, int]


class CorpusManifest(BaseModel):
    """
    Index of the corpora written by one synth run.
    """
    format: str = MANIFEST_FORMAT
    source: str
    seed: int
    transfer_size: Optional[int] = None
    corpora: list[CorpusEntry]

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(self.model_dump_json(indent=2) + "\n")

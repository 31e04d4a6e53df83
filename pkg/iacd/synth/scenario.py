from dataclasses import dataclass, field
from enum import Enum

from loguru import logger
from pydantic import BaseModel, ValidationError

from iacd.common.errors import InvalidConfiguration, NoScenarios, SchemaError
from iacd.global_settings import (
    DEFAULT_SEED,
    DEFAULT_TRANSFER_SIZE,
    HEALTHY_BANDWIDTH_BPS,
    HEALTHY_ONE_WAY_DELAY_MS,
    HEALTHY_READ_BUFFER,
    HEALTHY_WRITE_BUFFER,
)
from iacd.signature.signature import ClassLabel


class CcProfile(str, Enum):
    """
    Simplified AIMD congestion-control families standing in for different TCP stacks.
    """
    AIMD_STD = "AIMD_STD"
    AIMD_AGGRESSIVE = "AIMD_AGGRESSIVE"
    AIMD_CONSERVATIVE = "AIMD_CONSERVATIVE"


@dataclass(frozen=True)
class CcParameters:
    initial_window_segments: int
    beta: float
    additive_increase_segments: int


CC_PARAMETERS = {
    CcProfile.AIMD_STD: CcParameters(initial_window_segments=10, beta=0.7, additive_increase_segments=1),
    CcProfile.AIMD_AGGRESSIVE: CcParameters(initial_window_segments=10, beta=0.8, additive_increase_segments=2),
    CcProfile.AIMD_CONSERVATIVE: CcParameters(initial_window_segments=10, beta=0.5, additive_increase_segments=1),
}


@dataclass(frozen=True)
class LinkConfig:
    """
    Access link between server and client: bandwidth in bit/s, one-way delay in ms and per data
    packet loss and reordering probabilities.
    """
    bandwidth_bps: float = HEALTHY_BANDWIDTH_BPS
    one_way_delay_ms: float = HEALTHY_ONE_WAY_DELAY_MS
    loss_rate: float = 0.0
    reorder_rate: float = 0.0

    def __post_init__(self):
        if not self.bandwidth_bps > 0:
            raise InvalidConfiguration(f"bandwidth must be > 0, got {self.bandwidth_bps}")
        if self.one_way_delay_ms < 0:
            raise InvalidConfiguration(f"one-way delay must be >= 0, got {self.one_way_delay_ms}")
        if not 0 <= self.loss_rate < 1:
            raise InvalidConfiguration(f"loss rate must be in [0, 1), got {self.loss_rate}")
        if not 0 <= self.reorder_rate < 1:
            raise InvalidConfiguration(f"reorder rate must be in [0, 1), got {self.reorder_rate}")


def create_default_link_config() -> LinkConfig:
    """
    Healthy testbed link: 80 Mb/s, 10 ms, no loss, no reordering.
    """
    return LinkConfig()


@dataclass(frozen=True)
class ClientConfig:
    """
    Client TCP settings. read_buffer bounds the advertised window, write_buffer the bytes the
    connection keeps unacknowledged.
    """
    sack_enabled: bool = True
    dsack_enabled: bool = True
    read_buffer: int = HEALTHY_READ_BUFFER
    write_buffer: int = HEALTHY_WRITE_BUFFER
    cc_profile: CcProfile = CcProfile.AIMD_STD

    def __post_init__(self):
        if not isinstance(self.cc_profile, CcProfile):
            object.__setattr__(self, "cc_profile", CcProfile(self.cc_profile))
        if self.read_buffer <= 0 or self.write_buffer <= 0:
            raise InvalidConfiguration(f"buffers must be > 0, got read={self.read_buffer} write={self.write_buffer}")


def create_default_client_config() -> ClientConfig:
    """
    Healthy client: SACK and D-SACK on, buffers above the healthy link's bandwidth-delay product.
    """
    return ClientConfig()


@dataclass(frozen=True)
class Scenario:
    """
    One row of a scenario matrix: `samples` transfers of one link/client configuration.
    """
    name: str
    label: ClassLabel
    link: LinkConfig = field(default_factory=create_default_link_config)
    client: ClientConfig = field(default_factory=create_default_client_config)
    samples: int = 1
    transfer_size: int = DEFAULT_TRANSFER_SIZE
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.samples < 1:
            raise InvalidConfiguration(f"scenario {self.name} needs samples >= 1, got {self.samples}")
        if self.transfer_size < 1:
            raise InvalidConfiguration(f"scenario {self.name} needs a positive transfer size")
        if self.seed < 0:
            raise InvalidConfiguration(f"scenario {self.name} needs a nonnegative seed, got {self.seed}")


# ----------------------------------------------------------------------------------------------------------------------
# Scenario matrix file
# ----------------------------------------------------------------------------------------------------------------------

class LinkDocument(BaseModel):
    bandwidth_bps: float = HEALTHY_BANDWIDTH_BPS
    one_way_delay_ms: float = HEALTHY_ONE_WAY_DELAY_MS
    loss_rate: float = 0.0
    reorder_rate: float = 0.0


class ClientDocument(BaseModel):
    sack_enabled: bool = True
    dsack_enabled: bool = True
    read_buffer: int = HEALTHY_READ_BUFFER
    write_buffer: int = HEALTHY_WRITE_BUFFER
    cc_profile: CcProfile = CcProfile.AIMD_STD


class ScenarioDocument(BaseModel):
    name: str
    label: str
    link: LinkDocument = LinkDocument()
    client: ClientDocument = ClientDocument()
    samples: int = 1
    transfer_size: int = DEFAULT_TRANSFER_SIZE
    seed: int = DEFAULT_SEED


class ScenarioMatrixDocument(BaseModel):
    name: str = ""
    scenarios: list[ScenarioDocument]


@dataclass(frozen=True)
class ScenarioMatrix:
    """
    Named list of scenarios generated together into one corpus.

    Sample Usage:
    ```python
    matrix = ScenarioMatrix.load("scenarios.json")
    samples, database = generate_corpus(matrix)
    ```
    """
    scenarios: tuple
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        names = [scenario.name for scenario in self.scenarios]
        if len(set(names)) != len(names):
            raise InvalidConfiguration(f"scenario names must be unique in matrix {self.name!r}")

    @property
    def total_samples(self) -> int:
        return sum(scenario.samples for scenario in self.scenarios)

    def require_scenarios(self) -> None:
        """
        Raises:
            NoScenarios: When the matrix lists no scenario.
        """
        if not self.scenarios:
            raise NoScenarios(f"no scenarios in matrix {self.name!r}")

    def to_document(self) -> ScenarioMatrixDocument:
        return ScenarioMatrixDocument(name=self.name, scenarios=[
            ScenarioDocument(
                name=scenario.name,
                label=str(scenario.label),
                link=LinkDocument(**vars(scenario.link)),
                client=ClientDocument(**vars(scenario.client)),
                samples=scenario.samples,
                transfer_size=scenario.transfer_size,
                seed=scenario.seed,
            ) for scenario in self.scenarios])

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(self.to_document().model_dump_json(indent=2) + "\n")

    # ------------------------------------------------------------------------------------------------------------------
    # Static Methods
    # ------------------------------------------------------------------------------------------------------------------

    @staticmethod
    def from_document(document: ScenarioMatrixDocument) -> "ScenarioMatrix":
        scenarios = []
        for entry in document.scenarios:
            try:
                label = ClassLabel.parse(entry.label)
            except ValueError as error:
                raise InvalidConfiguration(f"scenario {entry.name}: {error}")
            scenarios.append(Scenario(
                name=entry.name,
                label=label,
                link=LinkConfig(**entry.link.model_dump()),
                client=ClientConfig(**entry.client.model_dump()),
                samples=entry.samples,
                transfer_size=entry.transfer_size,
                seed=entry.seed,
            ))
        return ScenarioMatrix(scenarios=tuple(scenarios), name=document.name)

    @staticmethod
    def load(path: str) -> "ScenarioMatrix":
        """
        Read a scenario matrix file.

        Raises:
            SchemaError: The file is not a valid scenario matrix document.
            InvalidConfiguration: A scenario violates its invariants.
        """
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
        try:
            document = ScenarioMatrixDocument.model_validate_json(text)
        except ValidationError as error:
            raise SchemaError(1, f"invalid scenario matrix {path}: {error.errors()[0]['msg']}")
        matrix = ScenarioMatrix.from_document(document)
        logger.debug(f"Loaded matrix {matrix.name!r} with {len(matrix.scenarios)} scenarios from {path}")
        return matrix

from dataclasses import dataclass
from typing import Optional

from loguru import logger

from iacd.common.errors import TracePairMismatch
from iacd.global_settings import FAULT_CLASSES
from iacd.signature.direction_stats import compute_direction_stats
from iacd.traces.directions import split_directions
from iacd.traces.packet_record import CapturePoint, TraceFile

LINK_FAULTY = "LINK_FAULTY"
LINK_HEALTHY = "LINK_HEALTHY"
CLIENT_FAULT = "CF"


@dataclass(frozen=True, order=True)
class ClassLabel:
    """
    Class of a signature: a link class or client fault class cf_j (cf_0 is a healthy client).

    Sample Usage:
    ```python
    ClassLabel.parse("cf_3") == ClassLabel.cf(3)
    str(ClassLabel.link_faulty())  # "LINK_FAULTY"
    ```
    """
    kind: str
    index: int = 0

    def __post_init__(self):
        if self.kind not in (LINK_FAULTY, LINK_HEALTHY, CLIENT_FAULT):
            raise ValueError(f"Unsupported label kind: {self.kind}")
        if self.index < 0:
            raise ValueError(f"Client fault index must be >= 0, got {self.index}")

    def __str__(self):
        return f"cf_{self.index}" if self.kind == CLIENT_FAULT else self.kind

    @property
    def is_link(self) -> bool:
        return self.kind != CLIENT_FAULT

    @property
    def short_name(self) -> str:
        """
        Human name of a client class (e.g. RBuf), the label text otherwise.
        """
        if self.kind == CLIENT_FAULT and self.index in FAULT_CLASSES:
            return FAULT_CLASSES[self.index][0]
        return str(self)

    # ------------------------------------------------------------------------------------------------------------------
    # Static Methods
    # ------------------------------------------------------------------------------------------------------------------

    @staticmethod
    def link_faulty() -> "ClassLabel":
        return ClassLabel(LINK_FAULTY)

    @staticmethod
    def link_healthy() -> "ClassLabel":
        return ClassLabel(LINK_HEALTHY)

    @staticmethod
    def cf(index: int) -> "ClassLabel":
        return ClassLabel(CLIENT_FAULT, index)

    @staticmethod
    def parse(text: str) -> "ClassLabel":
        """
        Parse the text form of a label.

        Raises:
            ValueError: On an unknown label.
        """
        text = text.strip()
        if text in (LINK_FAULTY, LINK_HEALTHY):
            return ClassLabel(text)
        prefix, _, number = text.partition("_")
        if prefix.lower() == "cf" and number.isdigit():
            return ClassLabel.cf(int(number))
        raise ValueError(f"Unsupported class label: {text}")


@dataclass(frozen=True)
class Signature:
    """
    Feature vector of a trace pair (client forward, client reverse, server forward, server
    reverse statistics) together with its class label.
    """
    features: tuple
    label: ClassLabel
    source_id: str

    @property
    def dimension(self) -> int:
        return len(self.features)


def build_signature(client: TraceFile, server: TraceFile, label: ClassLabel,
                    source_id: Optional[str] = None) -> Signature:
    """
    Turn a client/server trace pair of one transfer into a 280-dimensional signature.

    Args:
        client (TraceFile): Trace captured at the client.
        server (TraceFile): Trace captured at the server.
        label (ClassLabel): Class of the pair.
        source_id (str): Identifier stored with the signature; derived from the connection when None.
    Return:
        (Signature): Labeled signature.
    Raises:
        TracePairMismatch: When the traces belong to different connections.
    """
    check_trace_pair(client, server)
    if source_id is None:
        source_id = connection_source_id(client)
    return Signature(features=extract_features(client, server), label=label, source_id=source_id)


def extract_features(client: TraceFile, server: TraceFile) -> tuple:
    """
    Unlabeled feature vector of a trace pair: client forward, client reverse, server forward, server reverse.
    """
    features = []
    for trace in (client, server):
        forward, reverse = split_directions(trace)
        features.extend(compute_direction_stats(forward, reverse).values)
        features.extend(compute_direction_stats(reverse, forward).values)
    return tuple(features)


def connection_source_id(trace: TraceFile) -> str:
    key = trace.connection_key
    return f"{key.src_addr}:{key.src_port}-{key.dst_addr}:{key.dst_port}"


def check_trace_pair(client: TraceFile, server: TraceFile) -> None:
    """
    Raises:
        TracePairMismatch: When the traces belong to different connections.
    """
    if client.connection_key != server.connection_key:
        raise TracePairMismatch(
            f"client trace {tuple(client.connection_key)} and server trace {tuple(server.connection_key)} "
            f"describe different connections")
    if client.capture_point != CapturePoint.CLIENT or server.capture_point != CapturePoint.SERVER:
        logger.warning(f"Unexpected capture points {client.capture_point.value}/{server.capture_point.value} "
                       f"for a client/server pair")

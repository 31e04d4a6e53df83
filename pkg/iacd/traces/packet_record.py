from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from ipaddress import AddressValueError, IPv4Address
from typing import NamedTuple, Optional

from iacd.common.errors import EmptyTrace, SchemaError

# canonical order of TCP flags in the text format
FLAG_ORDER = ("S", "F", "R", "P", "U", "A")
FLAG_NAMES = {"S": "SYN", "F": "FIN", "R": "RST", "P": "PSH", "U": "URG", "A": "ACK"}

SYN = "SYN"
FIN = "FIN"
RST = "RST"
PSH = "PSH"
URG = "URG"
ACK = "ACK"


class CapturePoint(str, Enum):
    """
    Endpoint at which a trace was captured.
    """
    CLIENT = "CLIENT"
    SERVER = "SERVER"


class ConnectionKey(NamedTuple):
    """
    TCP 4-tuple oriented from the connection initiator.
    """
    src_addr: str
    src_port: int
    dst_addr: str
    dst_port: int

    def matches(self, src_addr: str, src_port: int, dst_addr: str, dst_port: int) -> bool:
        """
        Check whether a packet belongs to this connection in either direction.
        """
        forward = (src_addr, src_port, dst_addr, dst_port) == tuple(self)
        reverse = (dst_addr, dst_port, src_addr, src_port) == tuple(self)
        return forward or reverse

    def reversed(self) -> "ConnectionKey":
        return ConnectionKey(self.dst_addr, self.dst_port, self.src_addr, self.src_port)


@dataclass(frozen=True)
class TcpOptions:
    """
    Decoded handshake options and the D-SACK marker of one segment.
    """
    mss: Optional[int] = None
    wscale: Optional[int] = None
    sack_permitted: bool = False
    dsack_flag: bool = False


@dataclass(frozen=True)
class PacketRecord:
    """
    One TCP segment as seen at a capture point. Timestamps are integer microseconds and the
    window is the advertised window in bytes after window scaling.
    """
    timestamp: int
    src_addr: str
    dst_addr: str
    src_port: int
    dst_port: int
    seq: int
    ack: int
    flags: frozenset
    payload_len: int
    window: int
    sack_blocks: tuple = ()
    options: TcpOptions = field(default_factory=TcpOptions)

    def __post_init__(self):
        _check_ipv4(self.src_addr)
        _check_ipv4(self.dst_addr)
        for left, right in self.sack_blocks:
            if not left < right:
                raise ValueError(f"SACK block ({left}, {right}) has left edge >= right edge")
        if self.payload_len < 0:
            raise ValueError(f"Negative payload length {self.payload_len}")

    def has(self, flag: str) -> bool:
        return flag in self.flags

    @property
    def is_data(self) -> bool:
        return self.payload_len > 0

    @property
    def is_pure_ack(self) -> bool:
        return (self.payload_len == 0 and ACK in self.flags
                and not self.flags & {SYN, FIN, RST})

    @property
    def endpoint(self) -> tuple:
        return self.src_addr, self.src_port


@lru_cache(maxsize=256)
def _check_ipv4(address: str):
    # dotted-quad only, so the text format round-trips
    try:
        if str(IPv4Address(address)) != address:
            raise AddressValueError(f"{address!r} is not in dotted-quad form")
    except AddressValueError as error:
        raise ValueError(f"Invalid IPv4 address {address!r}: {error}")


def flags_to_text(flags: frozenset) -> str:
    """
    Render flags in canonical form, e.g. SYN+ACK -> "S.A", no flag -> "-".
    """
    letters = [letter for letter in FLAG_ORDER if FLAG_NAMES[letter] in flags]
    return ".".join(letters) if letters else "-"


def flags_from_text(text: str) -> frozenset:
    """
    Parse a canonical flag string back into a flag set.

    Raises:
        ValueError: On an unknown flag letter.
    """
    if text == "-":
        return frozenset()
    flags = set()
    for letter in text.split("."):
        if letter not in FLAG_NAMES:
            raise ValueError(f"Unknown TCP flag letter: {letter!r}")
        flags.add(FLAG_NAMES[letter])
    return frozenset(flags)


@dataclass(frozen=True)
class TraceFile:
    """
    Timestamp-ordered packets of a single TCP connection captured at one endpoint.
    """
    capture_point: CapturePoint
    packets: tuple
    connection_key: ConnectionKey

    def __post_init__(self):
        if not self.packets:
            raise EmptyTrace(f"{self.capture_point.value} trace holds no packet")
        previous = None
        for index, packet in enumerate(self.packets):
            if not self.connection_key.matches(packet.src_addr, packet.src_port, packet.dst_addr, packet.dst_port):
                raise SchemaError(index + 1, f"packet does not belong to connection {tuple(self.connection_key)}")
            if previous is not None and packet.timestamp < previous:
                raise SchemaError(index + 1, "timestamps must be nondecreasing")
            previous = packet.timestamp

    def __len__(self):
        return len(self.packets)


def initiator_key(packets) -> ConnectionKey:
    """
    Orient a connection key from the initiator: the sender of the first bare SYN, or the sender
    of the first packet when the handshake was not captured.

    Args:
        packets: Packets of one connection in capture order.
    Return:
        (ConnectionKey): Key whose source side is the initiator.
    """
    first = packets[0]
    for packet in packets:
        if packet.has(SYN) and not packet.has(ACK):
            first = packet
            break
    return ConnectionKey(first.src_addr, first.src_port, first.dst_addr, first.dst_port)

from typing import Optional

from iacd.common.errors import EmptyTrace, SchemaError
from iacd.traces.abstract_trace_reader import AbstractTraceReader, RawCapture
from iacd.traces.packet_record import (
    CapturePoint,
    ConnectionKey,
    PacketRecord,
    TcpOptions,
    TraceFile,
    flags_from_text,
    flags_to_text,
    initiator_key,
)

HEADER_PREFIX = "#iacd-trace v1"
FIELDS = ("ts_us", "src", "dst", "sport", "dport", "seq", "ack", "flags", "payload", "win", "sack", "opts")


def serialize_canonical(trace: TraceFile) -> str:
    """
    Render a trace in the canonical line-delimited text format.

    Args:
        trace (TraceFile): Trace to render.
    Return:
        (str): Header line plus one tab-separated record per packet, newline terminated.
    """
    lines = [f"{HEADER_PREFIX} capture_point={trace.capture_point.value}"]
    for packet in trace.packets:
        lines.append("\t".join((
            str(packet.timestamp),
            packet.src_addr,
            packet.dst_addr,
            str(packet.src_port),
            str(packet.dst_port),
            str(packet.seq),
            str(packet.ack),
            flags_to_text(packet.flags),
            str(packet.payload_len),
            str(packet.window),
            _sack_to_text(packet.sack_blocks),
            _options_to_text(packet.options),
        )))
    return "\n".join(lines) + "\n"


def parse_canonical(text: str, connection: Optional[ConnectionKey] = None) -> TraceFile:
    """
    Parse the canonical text format into a trace; inverse of serialize_canonical.

    Args:
        text (str): Content of a canonical trace file.
        connection (ConnectionKey): Optional explicit key; otherwise oriented from the initiator.
    Return:
        (TraceFile): Parsed trace.
    Raises:
        SchemaError: On a malformed header or record, with its line number.
        EmptyTrace: When the header is followed by no record.
    """
    lines = text.splitlines()
    if not lines or not lines[0].startswith(HEADER_PREFIX):
        raise SchemaError(1, f"expected header starting with {HEADER_PREFIX!r}")
    capture_point = _parse_header(lines[0])

    packets = []
    record_lines = []
    for line_number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        packets.append(_parse_record(line, line_number))
        record_lines.append(line_number)
    if not packets:
        raise EmptyTrace("canonical trace has a header but no packet record")

    key = connection or initiator_key(packets)
    try:
        return TraceFile(capture_point=capture_point, packets=tuple(packets), connection_key=key)
    except SchemaError as error:
        # TraceFile counts packets, not file lines
        raise SchemaError(record_lines[error.line_number - 1], error.message)


class CanonicalTraceReader(AbstractTraceReader):
    """
    Reader for traces stored in the canonical text format.

    Sample Usage:
    ```python
    trace = CanonicalTraceReader("path/to/client.trace").read_trace()
    ```
    """

    # ------------------------------------------------------------------------------------------------------------------
    # Abstract Methods Implementation
    # ------------------------------------------------------------------------------------------------------------------

    def load_file(self) -> RawCapture:
        """
        [Implementation of AbstractTraceReader]
        Load the bytes of the canonical trace file.

        Return:
            (RawCapture): Loaded bytes
        """
        with open(self.path_to_file, "rb") as f:
            return RawCapture(content=f.read(), source=self.path_to_file, file_format="canonical")

    def parse(self, raw_capture: RawCapture) -> TraceFile:
        """
        [Implementation of AbstractTraceReader]
        Decode the loaded bytes as UTF-8 and parse them.

        Arg:
            raw_capture (RawCapture): Loaded bytes.
        Return:
            (TraceFile): Parsed trace.
        """
        return parse_canonical(raw_capture.content.decode("utf-8"), connection=self.connection)


# ----------------------------------------------------------------------------------------------------------------------
# Field codecs
# ----------------------------------------------------------------------------------------------------------------------

def _sack_to_text(blocks: tuple) -> str:
    if not blocks:
        return "-"
    return ";".join(f"{left}-{right}" for left, right in blocks)


def _options_to_text(options: TcpOptions) -> str:
    parts = []
    if options.mss is not None:
        parts.append(f"mss={options.mss}")
    if options.wscale is not None:
        parts.append(f"ws={options.wscale}")
    if options.sack_permitted:
        parts.append("sackok=1")
    if options.dsack_flag:
        parts.append("dsack=1")
    return ",".join(parts) if parts else "-"


def _parse_header(line: str) -> CapturePoint:
    for token in line[len(HEADER_PREFIX):].split():
        key, _, value = token.partition("=")
        if key == "capture_point":
            try:
                return CapturePoint(value)
            except ValueError:
                raise SchemaError(1, f"unknown capture point {value!r}")
    raise SchemaError(1, "header lacks capture_point")


def _parse_int(value: str, name: str, line_number: int, upper: Optional[int] = None) -> int:
    if not value.isdigit():
        raise SchemaError(line_number, f"field {name} must be a base-10 integer, got {value!r}")
    number = int(value)
    if upper is not None and number > upper:
        raise SchemaError(line_number, f"field {name}={number} exceeds {upper}")
    return number


def _parse_sack(value: str, line_number: int) -> tuple:
    if value == "-":
        return ()
    blocks = []
    for block in value.split(";"):
        left, sep, right = block.partition("-")
        if not sep:
            raise SchemaError(line_number, f"malformed SACK block {block!r}")
        blocks.append((_parse_int(left, "sack", line_number, 0xFFFFFFFF),
                       _parse_int(right, "sack", line_number, 0xFFFFFFFF)))
    return tuple(blocks)


def _parse_options(value: str, line_number: int) -> TcpOptions:
    if value == "-":
        return TcpOptions()
    fields = {}
    for item in value.split(","):
        key, sep, raw = item.partition("=")
        if not sep or key not in ("mss", "ws", "sackok", "dsack"):
            raise SchemaError(line_number, f"malformed option {item!r}")
        fields[key] = _parse_int(raw, key, line_number)
    return TcpOptions(
        mss=fields.get("mss"),
        wscale=fields.get("ws"),
        sack_permitted=bool(fields.get("sackok", 0)),
        dsack_flag=bool(fields.get("dsack", 0)),
    )


def _parse_record(line: str, line_number: int) -> PacketRecord:
    values = line.split("\t")
    if len(values) != len(FIELDS):
        raise SchemaError(line_number, f"expected {len(FIELDS)} tab-separated fields, got {len(values)}")
    record = dict(zip(FIELDS, values))
    try:
        flags = flags_from_text(record["flags"])
    except ValueError as error:
        raise SchemaError(line_number, str(error))
    try:
        return PacketRecord(
            timestamp=_parse_int(record["ts_us"], "ts_us", line_number),
            src_addr=record["src"],
            dst_addr=record["dst"],
            src_port=_parse_int(record["sport"], "sport", line_number, 0xFFFF),
            dst_port=_parse_int(record["dport"], "dport", line_number, 0xFFFF),
            seq=_parse_int(record["seq"], "seq", line_number, 0xFFFFFFFF),
            ack=_parse_int(record["ack"], "ack", line_number, 0xFFFFFFFF),
            flags=flags,
            payload_len=_parse_int(record["payload"], "payload", line_number),
            window=_parse_int(record["win"], "win", line_number),
            sack_blocks=_parse_sack(record["sack"], line_number),
            options=_parse_options(record["opts"], line_number),
        )
    except ValueError as error:
        if isinstance(error, SchemaError):
            raise
        raise SchemaError(line_number, str(error))

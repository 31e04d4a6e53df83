import socket
from collections import Counter
from dataclasses import replace
from typing import Optional

import dpkt
from loguru import logger

from iacd.common.errors import CorruptCapture, EmptyTrace, TruncatedRecord, UnsupportedNetwork
from iacd.traces.abstract_trace_reader import AbstractTraceReader, RawCapture
from iacd.traces.packet_record import (
    ACK,
    FIN,
    PSH,
    RST,
    SYN,
    URG,
    CapturePoint,
    ConnectionKey,
    PacketRecord,
    TcpOptions,
    TraceFile,
    initiator_key,
)

# magic -> (little endian, nanosecond timestamps) as read through dpkt's big-endian header
PCAP_MAGICS = {
    dpkt.pcap.TCPDUMP_MAGIC: (False, False),
    dpkt.pcap.PMUDPCT_MAGIC: (True, False),
    dpkt.pcap.TCPDUMP_MAGIC_NANO: (False, True),
    dpkt.pcap.PMUDPCT_MAGIC_NANO: (True, True),
}
LINKTYPE_ETHERNET = dpkt.pcap.DLT_EN10MB

TCP_FLAG_BITS = (
    (dpkt.tcp.TH_SYN, SYN),
    (dpkt.tcp.TH_FIN, FIN),
    (dpkt.tcp.TH_RST, RST),
    (dpkt.tcp.TH_PUSH, PSH),
    (dpkt.tcp.TH_URG, URG),
    (dpkt.tcp.TH_ACK, ACK),
)


def parse_pcap(raw: bytes, capture_point: CapturePoint = CapturePoint.CLIENT,
               connection: Optional[ConnectionKey] = None) -> TraceFile:
    """
    Decode a classic pcap capture (Ethernet, IPv4, TCP) into a single-connection trace.

    Non-TCP frames are skipped. When several TCP connections are present the one with the most
    packets is kept unless an explicit connection is given.

    Args:
        raw (bytes): Entire capture file.
        capture_point (CapturePoint): Where the capture was taken (pcap does not record it).
        connection (ConnectionKey): Optional connection to select, in either orientation.
    Return:
        (TraceFile): Decoded trace with windows scaled by the negotiated window scale.
    Raises:
        CorruptCapture: Malformed global header or unsupported link type.
        TruncatedRecord: A record runs past the end of the data.
        UnsupportedNetwork: An IPv6 frame was found.
        EmptyTrace: No TCP packet of the selected connection.
    """
    segments = [_decode_frame(frame) for frame in _iter_frames(raw)]
    segments = [segment for segment in segments if segment is not None]
    if not segments:
        raise EmptyTrace("capture contains no TCP packet")

    selected = _select_connection(segments, connection)
    packets = _mark_dsack(_apply_window_scaling(selected))
    key = connection or initiator_key(packets)
    return TraceFile(capture_point=capture_point, packets=tuple(packets), connection_key=key)


class PcapTraceReader(AbstractTraceReader):
    """
    Reader for classic pcap captures.

    Sample Usage:
    ```python
    trace = PcapTraceReader("path/to/server.pcap", capture_point=CapturePoint.SERVER).read_trace()
    ```
    """

    # ------------------------------------------------------------------------------------------------------------------
    # Abstract Methods Implementation
    # ------------------------------------------------------------------------------------------------------------------

    def load_file(self) -> RawCapture:
        """
        [Implementation of AbstractTraceReader]
        Load the bytes of the capture file.

        Return:
            (RawCapture): Loaded capture
        """
        with open(self.path_to_file, "rb") as f:
            return RawCapture(content=f.read(), source=self.path_to_file, file_format="pcap")

    def parse(self, raw_capture: RawCapture) -> TraceFile:
        """
        [Implementation of AbstractTraceReader]
        Decode the loaded capture.

        Arg:
            raw_capture (RawCapture): Loaded capture.
        Return:
            (TraceFile): Decoded trace.
        """
        return parse_pcap(raw_capture.content, capture_point=self.capture_point or CapturePoint.CLIENT,
                          connection=self.connection)


# ----------------------------------------------------------------------------------------------------------------------
# Private helpers
# ----------------------------------------------------------------------------------------------------------------------

def _iter_frames(raw: bytes):
    """
    Walk the pcap record headers and yield (timestamp_us, frame bytes).
    """
    file_header_len = dpkt.pcap.FileHdr.__hdr_len__
    if len(raw) < file_header_len:
        raise CorruptCapture(f"capture is {len(raw)} bytes, shorter than a pcap global header")
    try:
        magic = dpkt.pcap.FileHdr(raw[:file_header_len]).magic
    except dpkt.UnpackError as error:
        raise CorruptCapture(f"unreadable pcap global header: {error}")
    if magic not in PCAP_MAGICS:
        raise CorruptCapture(f"unknown pcap magic 0x{magic:08x}")
    little_endian, nanoseconds = PCAP_MAGICS[magic]

    file_header_cls = dpkt.pcap.LEFileHdr if little_endian else dpkt.pcap.FileHdr
    record_header_cls = dpkt.pcap.LEPktHdr if little_endian else dpkt.pcap.PktHdr
    file_header = file_header_cls(raw[:file_header_len])
    if file_header.linktype != LINKTYPE_ETHERNET:
        raise CorruptCapture(f"unsupported link type {file_header.linktype}, expected Ethernet")

    record_header_len = record_header_cls.__hdr_len__
    offset = file_header_len
    index = 0
    while offset < len(raw):
        if offset + record_header_len > len(raw):
            raise TruncatedRecord(index - 1)
        header = record_header_cls(raw[offset:offset + record_header_len])
        start = offset + record_header_len
        if start + header.caplen > len(raw):
            raise TruncatedRecord(index - 1)
        fraction = header.tv_usec // 1000 if nanoseconds else header.tv_usec
        yield header.tv_sec * 1_000_000 + fraction, raw[start:start + header.caplen]
        offset = start + header.caplen
        index += 1


def _decode_frame(frame: tuple) -> Optional[dict]:
    """
    Decode one Ethernet frame into raw TCP fields, or None for non-TCP frames.
    """
    timestamp, buf = frame
    try:
        eth = dpkt.ethernet.Ethernet(buf)
    except (dpkt.UnpackError, dpkt.NeedData):
        return None
    ip = eth.data
    if isinstance(ip, dpkt.ip6.IP6):
        raise UnsupportedNetwork("IPv6 frames are not supported")
    if not isinstance(ip, dpkt.ip.IP) or not isinstance(ip.data, dpkt.tcp.TCP):
        return None
    tcp = ip.data

    flags = frozenset(name for bit, name in TCP_FLAG_BITS if tcp.flags & bit)
    mss, wscale, sack_permitted, sack_blocks = None, None, False, []
    try:
        options = dpkt.tcp.parse_opts(bytes(tcp.opts))
    except (dpkt.UnpackError, dpkt.NeedData):
        options = []
    for kind, data in options:
        if kind == dpkt.tcp.TCP_OPT_MSS and len(data) == 2:
            mss = int.from_bytes(data, "big")
        elif kind == dpkt.tcp.TCP_OPT_WSCALE and len(data) == 1:
            wscale = data[0]
        elif kind == dpkt.tcp.TCP_OPT_SACKOK:
            sack_permitted = True
        elif kind == dpkt.tcp.TCP_OPT_SACK:
            for pos in range(0, len(data) - 7, 8):
                left = int.from_bytes(data[pos:pos + 4], "big")
                right = int.from_bytes(data[pos + 4:pos + 8], "big")
                if _seq_before(left, right):
                    sack_blocks.append((left, right))

    # payload from the IP length so snaplen-truncated captures keep their sizes
    header_len = ip.hl * 4 + tcp.off * 4
    payload_len = max(0, ip.len - header_len) if ip.len else len(tcp.data)
    return {
        "timestamp": timestamp,
        "src_addr": socket.inet_ntoa(ip.src),
        "dst_addr": socket.inet_ntoa(ip.dst),
        "src_port": tcp.sport,
        "dst_port": tcp.dport,
        "seq": tcp.seq,
        "ack": tcp.ack,
        "flags": flags,
        "payload_len": payload_len,
        "raw_window": tcp.win,
        "sack_blocks": tuple(sack_blocks),
        "mss": mss,
        "wscale": wscale,
        "sack_permitted": sack_permitted,
    }


def _select_connection(segments: list, connection: Optional[ConnectionKey]) -> list:
    def key_of(segment):
        ends = sorted([(segment["src_addr"], segment["src_port"]), (segment["dst_addr"], segment["dst_port"])])
        return tuple(ends)

    if connection is not None:
        wanted = tuple(sorted([(connection.src_addr, connection.src_port),
                               (connection.dst_addr, connection.dst_port)]))
    else:
        counts = Counter(key_of(segment) for segment in segments)
        if len(counts) > 1:
            logger.warning(f"Capture holds {len(counts)} TCP connections; keeping the busiest one")
        first_seen = {}
        for position, segment in enumerate(segments):
            first_seen.setdefault(key_of(segment), position)
        wanted = max(counts, key=lambda key: (counts[key], -first_seen[key]))
    selected = [segment for segment in segments if key_of(segment) == wanted]
    if not selected:
        raise EmptyTrace(f"capture holds no packet of connection {tuple(connection)}")
    return selected


def _apply_window_scaling(segments: list) -> list:
    """
    Turn raw window fields into byte windows: a shift applies to non-SYN segments once both
    endpoints offered window scaling in their SYNs.
    """
    offered = {}
    for segment in segments:
        if SYN in segment["flags"] and segment["wscale"] is not None:
            offered.setdefault((segment["src_addr"], segment["src_port"]), segment["wscale"])
    scaling_on = len(offered) == 2

    packets = []
    for segment in segments:
        shift = 0
        if scaling_on and SYN not in segment["flags"]:
            shift = offered[(segment["src_addr"], segment["src_port"])]
        packets.append(_to_record(segment, segment["raw_window"] << shift))
    return packets


def _to_record(segment: dict, window: int) -> PacketRecord:
    return PacketRecord(
        timestamp=segment["timestamp"],
        src_addr=segment["src_addr"],
        dst_addr=segment["dst_addr"],
        src_port=segment["src_port"],
        dst_port=segment["dst_port"],
        seq=segment["seq"],
        ack=segment["ack"],
        flags=segment["flags"],
        payload_len=segment["payload_len"],
        window=window,
        sack_blocks=segment["sack_blocks"],
        options=TcpOptions(
            mss=segment["mss"],
            wscale=segment["wscale"],
            sack_permitted=segment["sack_permitted"],
        ),
    )


def _mark_dsack(packets: list) -> list:
    """
    Flag segments whose first SACK block reports a duplicate: the block lies below the
    cumulative ACK, or inside the second block.
    """
    marked = []
    for packet in packets:
        if packet.sack_blocks and ACK in packet.flags and is_dsack(packet.sack_blocks, packet.ack):
            packet = replace(packet, options=replace(packet.options, dsack_flag=True))
        marked.append(packet)
    return marked


def is_dsack(sack_blocks: tuple, ack: int) -> bool:
    """
    Whether the first SACK block is a D-SACK block.
    """
    left, right = sack_blocks[0]
    if not _seq_before(ack, right):
        return True
    if len(sack_blocks) > 1:
        second_left, second_right = sack_blocks[1]
        return not _seq_before(left, second_left) and not _seq_before(second_right, right)
    return False


def _seq_before(a: int, b: int) -> bool:
    """
    Modular 32-bit sequence comparison: a < b.
    """
    return ((a - b) & 0xFFFFFFFF) > 0x7FFFFFFF

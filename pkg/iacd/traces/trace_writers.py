import socket
import struct

import dpkt
from loguru import logger

from iacd.traces.canonical_trace_reader import serialize_canonical
from iacd.traces.packet_record import ACK, FIN, PSH, RST, SYN, URG, PacketRecord, TraceFile

FLAG_BITS = {
    SYN: dpkt.tcp.TH_SYN,
    FIN: dpkt.tcp.TH_FIN,
    RST: dpkt.tcp.TH_RST,
    PSH: dpkt.tcp.TH_PUSH,
    URG: dpkt.tcp.TH_URG,
    ACK: dpkt.tcp.TH_ACK,
}
# frames are written header-only; the IP length still accounts for the payload
PCAP_SNAPLEN = 128
CLIENT_MAC = b"\x02\x00\x00\x00\x00\x02"
SERVER_MAC = b"\x02\x00\x00\x00\x00\x01"


def write_canonical(trace: TraceFile, path: str) -> None:
    """
    Write a trace to a file in the canonical text format.

    Args:
        trace (TraceFile): Trace to write.
        path (str): Destination file.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(serialize_canonical(trace))
    logger.debug(f"Wrote {len(trace)} packets to {path}")


def write_pcap(trace: TraceFile, path: str) -> None:
    """
    Write a trace to a classic little-endian pcap file with header-only Ethernet frames.

    Args:
        trace (TraceFile): Trace to write.
        path (str): Destination file.
    """
    with open(path, "wb") as f:
        f.write(serialize_pcap(trace))
    logger.debug(f"Wrote {len(trace)} frames to {path}")


def serialize_pcap(trace: TraceFile) -> bytes:
    """
    Encode a trace as classic pcap bytes. Advertised windows are shifted back by the window
    scale negotiated in the handshake so that parse_pcap restores them.

    Args:
        trace (TraceFile): Trace to encode.
    Return:
        (bytes): Complete capture file.
    """
    shifts = _negotiated_shifts(trace.packets)
    initiator = (trace.connection_key.src_addr, trace.connection_key.src_port)
    chunks = [bytes(dpkt.pcap.LEFileHdr(snaplen=PCAP_SNAPLEN, linktype=dpkt.pcap.DLT_EN10MB))]
    for packet in trace.packets:
        shift = 0 if SYN in packet.flags else shifts.get(packet.endpoint, 0)
        frame = _encode_frame(packet, packet.window >> shift, packet.endpoint == initiator)
        wire_len = len(frame) + packet.payload_len
        chunks.append(bytes(dpkt.pcap.LEPktHdr(
            tv_sec=packet.timestamp // 1_000_000,
            tv_usec=packet.timestamp % 1_000_000,
            caplen=len(frame),
            len=wire_len,
        )))
        chunks.append(frame)
    return b"".join(chunks)


def _negotiated_shifts(packets) -> dict:
    offered = {}
    for packet in packets:
        if SYN in packet.flags and packet.options.wscale is not None:
            offered.setdefault(packet.endpoint, packet.options.wscale)
    return offered if len(offered) == 2 else {}


def _encode_options(packet: PacketRecord) -> bytes:
    opts = b""
    if packet.options.mss is not None:
        opts += struct.pack(">BBH", dpkt.tcp.TCP_OPT_MSS, 4, packet.options.mss)
    if packet.options.wscale is not None:
        opts += struct.pack(">BBBB", dpkt.tcp.TCP_OPT_NOP, dpkt.tcp.TCP_OPT_WSCALE, 3, packet.options.wscale)
    if packet.options.sack_permitted:
        opts += struct.pack(">BBBB", dpkt.tcp.TCP_OPT_NOP, dpkt.tcp.TCP_OPT_NOP, dpkt.tcp.TCP_OPT_SACKOK, 2)
    if packet.sack_blocks:
        opts += struct.pack(">BBBB", dpkt.tcp.TCP_OPT_NOP, dpkt.tcp.TCP_OPT_NOP,
                            dpkt.tcp.TCP_OPT_SACK, 2 + 8 * len(packet.sack_blocks))
        for left, right in packet.sack_blocks:
            opts += struct.pack(">II", left, right)
    return opts


def _encode_frame(packet: PacketRecord, raw_window: int, from_initiator: bool) -> bytes:
    opts = _encode_options(packet)
    tcp = dpkt.tcp.TCP(
        sport=packet.src_port,
        dport=packet.dst_port,
        seq=packet.seq,
        ack=packet.ack,
        win=min(raw_window, 0xFFFF),
        opts=opts,
    )
    tcp.off = (dpkt.tcp.TCP.__hdr_len__ + len(opts)) // 4
    tcp.flags = sum(bit for name, bit in FLAG_BITS.items() if name in packet.flags)

    tcp_bytes = bytes(tcp)
    ip = dpkt.ip.IP(
        src=socket.inet_aton(packet.src_addr),
        dst=socket.inet_aton(packet.dst_addr),
        p=dpkt.ip.IP_PROTO_TCP,
        ttl=64,
        data=tcp_bytes,
    )
    ip.len = dpkt.ip.IP.__hdr_len__ + len(tcp_bytes) + packet.payload_len

    src_mac, dst_mac = (CLIENT_MAC, SERVER_MAC) if from_initiator else (SERVER_MAC, CLIENT_MAC)
    eth = dpkt.ethernet.Ethernet(src=src_mac, dst=dst_mac, type=dpkt.ethernet.ETH_TYPE_IP, data=ip)
    return bytes(eth)

from iacd.traces.packet_record import TraceFile


def split_directions(trace: TraceFile) -> tuple:
    """
    Partition a trace into packets sent by the connection initiator (forward) and by its peer
    (reverse), preserving capture order.

    Args:
        trace (TraceFile): Trace to split.
    Return:
        (tuple): (forward packets, reverse packets) as lists.
    """
    initiator = (trace.connection_key.src_addr, trace.connection_key.src_port)
    forward, reverse = [], []
    for packet in trace.packets:
        (forward if packet.endpoint == initiator else reverse).append(packet)
    return forward, reverse

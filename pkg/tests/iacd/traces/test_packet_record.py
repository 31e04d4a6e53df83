import pytest

from iacd.common.errors import EmptyTrace, SchemaError
from iacd.traces.packet_record import (
    ACK,
    FIN,
    PSH,
    SYN,
    CapturePoint,
    ConnectionKey,
    PacketRecord,
    TraceFile,
    flags_from_text,
    flags_to_text,
    initiator_key,
)

CLIENT = ("10.0.0.2", 50000)
SERVER = ("10.0.0.1", 80)
KEY = ConnectionKey(CLIENT[0], CLIENT[1], SERVER[0], SERVER[1])


def packet(timestamp, sender, flags, seq=1, ack=0, payload_len=0, **kwargs):
    receiver = SERVER if sender == CLIENT else CLIENT
    return PacketRecord(timestamp=timestamp, src_addr=sender[0], dst_addr=receiver[0], src_port=sender[1],
                        dst_port=receiver[1], seq=seq, ack=ack, flags=frozenset(flags), payload_len=payload_len,
                        window=65535, **kwargs)


# Test flags render in canonical order and parse back
def test_flags_text_round_trip():
    assert flags_to_text(frozenset({ACK, SYN})) == "S.A"
    assert flags_to_text(frozenset({ACK, PSH, FIN})) == "F.P.A"
    assert flags_to_text(frozenset()) == "-"
    assert flags_from_text("S.A") == frozenset({SYN, ACK})
    assert flags_from_text("-") == frozenset()

# Test unknown flag letters are rejected
def test_flags_from_text_unknown_letter():
    with pytest.raises(ValueError):
        flags_from_text("S.X")

# Test a SACK block must have left edge below right edge
def test_packet_record_rejects_inverted_sack_block():
    with pytest.raises(ValueError):
        packet(0, SERVER, {ACK}, sack_blocks=((100, 100),))

# Test addresses must be dotted-quad IPv4
@pytest.mark.parametrize("address", ["999.1.1.1", "not-an-ip", "10.0.0", "10.0.0.01", "::1"])
def test_packet_record_rejects_invalid_address(address):
    with pytest.raises(ValueError):
        packet(0, (address, 50000), {SYN})
    with pytest.raises(ValueError):
        PacketRecord(timestamp=0, src_addr=CLIENT[0], dst_addr=address, src_port=CLIENT[1], dst_port=80, seq=0,
                     ack=0, flags=frozenset({SYN}), payload_len=0, window=0)

# Test pure ACK and data properties
def test_packet_record_properties():
    assert packet(0, CLIENT, {ACK}).is_pure_ack
    assert not packet(0, CLIENT, {SYN}).is_pure_ack
    data = packet(0, SERVER, {ACK, PSH}, payload_len=100)
    assert data.is_data
    assert not data.is_pure_ack
    assert data.endpoint == SERVER

# Test connection keys match both orientations
def test_connection_key_matches_both_directions():
    assert KEY.matches(*CLIENT, *SERVER)
    assert KEY.matches(*SERVER, *CLIENT)
    assert not KEY.matches("10.0.0.3", 50000, *SERVER)
    assert KEY.reversed() == ConnectionKey(SERVER[0], SERVER[1], CLIENT[0], CLIENT[1])

# Test a trace without packets is rejected
def test_trace_file_empty():
    with pytest.raises(EmptyTrace):
        TraceFile(capture_point=CapturePoint.CLIENT, packets=(), connection_key=KEY)

# Test packets of another connection are rejected with their position
def test_trace_file_foreign_packet():
    foreign = PacketRecord(timestamp=5, src_addr="10.0.0.9", dst_addr=SERVER[0], src_port=1, dst_port=80, seq=0,
                           ack=0, flags=frozenset({SYN}), payload_len=0, window=0)
    with pytest.raises(SchemaError) as error:
        TraceFile(capture_point=CapturePoint.CLIENT, packets=(packet(0, CLIENT, {SYN}), foreign), connection_key=KEY)
    assert error.value.line_number == 2

# Test decreasing timestamps are rejected
def test_trace_file_decreasing_timestamps():
    with pytest.raises(SchemaError):
        TraceFile(capture_point=CapturePoint.CLIENT, packets=(packet(10, CLIENT, {SYN}), packet(5, SERVER, {SYN, ACK})),
                  connection_key=KEY)

# Test the initiator is the sender of the bare SYN even when it is not the first packet
def test_initiator_key_prefers_bare_syn():
    packets = [packet(0, SERVER, {ACK}), packet(1, CLIENT, {SYN}), packet(2, SERVER, {SYN, ACK})]
    assert initiator_key(packets) == KEY

# Test the first sender is the initiator when no handshake was captured
def test_initiator_key_without_handshake():
    packets = [packet(0, SERVER, {ACK}, payload_len=10), packet(1, CLIENT, {ACK})]
    assert initiator_key(packets) == KEY.reversed()

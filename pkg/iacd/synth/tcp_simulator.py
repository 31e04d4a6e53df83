import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
import simpy
from loguru import logger

from iacd.common.errors import InfeasibleScenario, InvalidConfiguration
from iacd.global_settings import (
    CLIENT_ADDR,
    DEFAULT_SEED,
    DEFAULT_TRANSFER_SIZE,
    DELAYED_ACK_TIMEOUT_US,
    DUPACK_THRESHOLD,
    HEADER_BYTES,
    INITIAL_RTO_US,
    MAX_DUPACK_THRESHOLD,
    MAX_RTO_US,
    MAX_SACK_BLOCKS,
    MAX_VIRTUAL_TIME_US,
    MIN_RTO_US,
    MSS,
    REORDER_EXTRA_DELAY_US,
    SERVER_ADDR,
    SERVER_PORT,
)
from iacd.synth.scenario import CC_PARAMETERS, ClientConfig, LinkConfig
from iacd.traces.packet_record import (
    ACK,
    FIN,
    PSH,
    SYN,
    CapturePoint,
    ConnectionKey,
    PacketRecord,
    TcpOptions,
    TraceFile,
)

SEQ_MASK = 0xFFFFFFFF
MAX_RAW_WINDOW = 0xFFFF
SERVER_RECEIVE_WINDOW = 262_144
SERVER_WINDOW_SCALE = 7

# independent random streams of one simulation
LOSS_STREAM = 0
REORDER_STREAM = 1
HANDSHAKE_STREAM = 2


@dataclass
class EventLog:
    """
    Ground-truth counters of one simulated transfer. Loss, reordering and retransmissions concern
    server-to-client data packets.
    """
    losses_injected: int = 0
    reorders_injected: int = 0
    data_packets_sent: int = 0
    retransmissions: int = 0
    fast_retransmit_events: int = 0
    timeouts: int = 0
    spurious_retransmissions_detected: int = 0
    dsack_blocks_sent: int = 0
    sender_stalls: int = 0
    client_packets_sent: int = 0
    server_packets_sent: int = 0
    completed: bool = False
    virtual_duration_us: int = 0


def simulate_connection(link: LinkConfig, client: ClientConfig, transfer_size: int = DEFAULT_TRANSFER_SIZE,
                        seed: int = DEFAULT_SEED) -> tuple:
    """
    Simulate one server-to-client bulk transfer and capture it at both endpoints.

    Args:
        link (LinkConfig): Access link conditions.
        client (ClientConfig): Client TCP options, buffers and congestion-control profile.
        transfer_size (int): Bytes sent by the server, at least one MSS.
        seed (int): Seed of the loss, reordering and handshake random streams.
    Return:
        (tuple): (client TraceFile, server TraceFile, EventLog)
    Raises:
        InfeasibleScenario: When a buffer is below one MSS or the transfer does not complete in time.
    """
    if transfer_size < MSS:
        raise InvalidConfiguration(f"transfer size must be at least one segment ({MSS} bytes), got {transfer_size}")
    if client.read_buffer < MSS or client.write_buffer < MSS:
        raise InfeasibleScenario(f"buffers below one segment cannot make progress: read={client.read_buffer}, "
                                 f"write={client.write_buffer}")
    return TcpSimulation(link, client, transfer_size, seed).run()


class TcpSimulation:
    """
    Discrete-event model of a server sending `transfer_size` bytes to a client over one access link.

    Both directions of the link serialize packets FIFO at the link bandwidth and then add the
    one-way delay; loss and reordering hit server data packets only. Virtual time is in microseconds.

    Sample Usage:
    ```python
    client_trace, server_trace, events = TcpSimulation(LinkConfig(loss_rate=0.05), ClientConfig(), 1_048_576, 7).run()
    ```
    """

    def __init__(self, link: LinkConfig, client: ClientConfig, transfer_size: int, seed: int):
        self.env = simpy.Environment()
        self.log = EventLog()
        self.done = self.env.event()
        self.link_config = link
        self.client_config = client

        handshake_rng = np.random.default_rng([seed, HANDSHAKE_STREAM])
        client_isn, server_isn = (int(value) for value in handshake_rng.integers(0, 2 ** 31, size=2))
        client_port = int(handshake_rng.integers(49152, 65536))
        self.connection_key = ConnectionKey(CLIENT_ADDR, client_port, SERVER_ADDR, SERVER_PORT)
        self.client_trace = []
        self.server_trace = []

        delay_us = int(round(link.one_way_delay_ms * 1000))
        self.client = _ClientEndpoint(self, client, client_isn, client_port)
        self.server = _ServerEndpoint(self, client, transfer_size, server_isn, client_port)
        self.downlink = _Link(self.env, link.bandwidth_bps, delay_us, self._deliver_to_client, self.log,
                              loss_rate=link.loss_rate, reorder_rate=link.reorder_rate,
                              loss_rng=np.random.default_rng([seed, LOSS_STREAM]),
                              reorder_rng=np.random.default_rng([seed, REORDER_STREAM]))
        self.uplink = _Link(self.env, link.bandwidth_bps, delay_us, self._deliver_to_server, self.log)

    # ------------------------------------------------------------------------------------------------------------------
    # Public Methods
    # ------------------------------------------------------------------------------------------------------------------

    def run(self) -> tuple:
        """
        Run until the connection closes or the virtual-time limit is reached.

        Return:
            (tuple): (client TraceFile, server TraceFile, EventLog)
        Raises:
            InfeasibleScenario: When the transfer does not complete within the time limit.
        """
        self.client.open()
        deadline = self.env.timeout(MAX_VIRTUAL_TIME_US)
        self.env.run(until=self.env.any_of([self.done, deadline]))
        if not self.done.triggered:
            raise InfeasibleScenario(
                f"transfer incomplete after {MAX_VIRTUAL_TIME_US / 1e6:.0f} s of virtual time: "
                f"{self.server.snd_una} of {self.server.transfer_size} bytes acknowledged")
        self.log.completed = True
        self.log.virtual_duration_us = int(self.env.now)
        logger.debug(f"Simulated {self.server.transfer_size} bytes over {self.link_config} for {self.client_config}: "
                     f"{self.log}")
        return (TraceFile(CapturePoint.CLIENT, tuple(self.client_trace), self.connection_key),
                TraceFile(CapturePoint.SERVER, tuple(self.server_trace), self.connection_key),
                self.log)

    def now(self) -> int:
        return int(self.env.now)

    def schedule(self, delay_us: float, callback: Callable) -> None:
        """
        Call `callback()` after delay_us of virtual time.
        """
        event = self.env.timeout(max(0, int(round(delay_us))))
        event.callbacks.append(lambda _event: callback())

    def send_from_client(self, packet: PacketRecord) -> None:
        self.client_trace.append(packet)
        self.log.client_packets_sent += 1
        self.uplink.send(packet)

    def send_from_server(self, packet: PacketRecord) -> None:
        self.server_trace.append(packet)
        self.log.server_packets_sent += 1
        self.downlink.send(packet)

    def finish(self) -> None:
        if not self.done.triggered:
            self.done.succeed()

    # ------------------------------------------------------------------------------------------------------------------
    # Private Methods
    # ------------------------------------------------------------------------------------------------------------------

    def _deliver_to_client(self, packet: PacketRecord) -> None:
        packet = replace(packet, timestamp=self.now())
        self.client_trace.append(packet)
        self.client.receive(packet)

    def _deliver_to_server(self, packet: PacketRecord) -> None:
        packet = replace(packet, timestamp=self.now())
        self.server_trace.append(packet)
        self.server.receive(packet)


class _Link:
    """
    One direction of the access link: FIFO serialization at the bandwidth, then propagation delay.
    """

    def __init__(self, env: simpy.Environment, bandwidth_bps: float, delay_us: int, deliver: Callable,
                 log: EventLog, loss_rate: float = 0.0, reorder_rate: float = 0.0,
                 loss_rng: Optional[np.random.Generator] = None, reorder_rng: Optional[np.random.Generator] = None):
        self.env = env
        self.bytes_per_us = bandwidth_bps / 8e6
        self.delay_us = delay_us
        self.deliver = deliver
        self.log = log
        self.loss_rate = loss_rate
        self.reorder_rate = reorder_rate
        self.loss_rng = loss_rng
        self.reorder_rng = reorder_rng
        self.busy_until = 0

    def drain_rate(self) -> float:
        return self.bytes_per_us

    def send(self, packet: PacketRecord) -> None:
        start = max(int(self.env.now), self.busy_until)
        self.busy_until = start + max(1, int(round((packet.payload_len + HEADER_BYTES) / self.bytes_per_us)))
        arrival = self.busy_until + self.delay_us

        if packet.is_data and self.loss_rng is not None:
            lost = self.loss_rng.random() < self.loss_rate
            reordered = self.reorder_rng.random() < self.reorder_rate
            if lost:
                self.log.losses_injected += 1
                return
            if reordered:
                self.log.reorders_injected += 1
                arrival += REORDER_EXTRA_DELAY_US

        event = self.env.timeout(arrival - int(self.env.now))
        event.callbacks.append(lambda _event: self.deliver(packet))


class _ClientEndpoint:
    """
    Receiving side: cumulative ACKs with SACK/D-SACK blocks, delayed ACKs and a read buffer that the
    application drains at the link rate.
    """

    def __init__(self, simulation: TcpSimulation, config: ClientConfig, isn: int, port: int):
        self.sim = simulation
        self.config = config
        self.isn = isn
        self.port = port
        self.window_shift = _window_shift(config.read_buffer)
        self.sack_ok = False
        self.server_isn = 0
        self.rcv_nxt = 0
        # out-of-order blocks [left, right), most recently changed first
        self.ooo = []
        self.undrained = 0.0
        self.drained_at = 0
        self.unacked_segments = 0
        self.delack_generation = 0
        self.delack_armed = False
        self.update_generation = 0
        self.fin_received = False
        self.seq_offset = 1

    def open(self) -> None:
        window = min(self.config.read_buffer, MAX_RAW_WINDOW)
        self.seq_offset = 0
        self._emit(frozenset({SYN}), window=window, ack=0,
                   options=TcpOptions(mss=MSS, wscale=self.window_shift, sack_permitted=self.config.sack_enabled))
        self.seq_offset = 1

    def receive(self, packet: PacketRecord) -> None:
        if SYN in packet.flags:
            self.server_isn = packet.seq
            self.sack_ok = self.config.sack_enabled and packet.options.sack_permitted
            self._send_ack()
        elif FIN in packet.flags:
            self.fin_received = True
            self.seq_offset = 1
            self._emit(frozenset({FIN, ACK}), window=self._advertised_window())
            self.seq_offset = 2
        elif packet.is_data:
            self._on_data(packet)
        elif self.fin_received:
            self.sim.finish()

    # ------------------------------------------------------------------------------------------------------------------
    # Private Methods
    # ------------------------------------------------------------------------------------------------------------------

    def _relative(self, seq: int) -> int:
        return (seq - self.server_isn - 1) & SEQ_MASK

    def _absolute(self, offset: int) -> int:
        return (self.server_isn + 1 + offset) & SEQ_MASK

    def _on_data(self, packet: PacketRecord) -> None:
        self._drain()
        start = self._relative(packet.seq)
        end = start + packet.payload_len
        had_holes = bool(self.ooo)

        duplicate = None
        if start < self.rcv_nxt:
            duplicate = (start, min(end, self.rcv_nxt))
        else:
            for left, right in self.ooo:
                if start < right and left < end:
                    duplicate = (max(start, left), min(end, right))
                    break

        out_of_order = start > self.rcv_nxt
        if end > self.rcv_nxt:
            if out_of_order:
                self._add_ooo(start, end)
            else:
                self._advance(end)

        if duplicate is None and not out_of_order and not had_holes:
            self.unacked_segments += 1
            if self.unacked_segments >= 2 or packet.has(PSH) and end >= self.sim.server.transfer_size:
                self._send_ack()
            elif not self.delack_armed:
                self._arm_delayed_ack()
            return
        self._send_ack(duplicate=duplicate)

    def _advance(self, end: int) -> None:
        new_nxt = end
        remaining = []
        for left, right in self.ooo:
            if left <= new_nxt:
                new_nxt = max(new_nxt, right)
            else:
                remaining.append([left, right])
        # a block absorbed later may make an earlier skipped block contiguous
        changed = True
        while changed:
            changed = False
            for block in list(remaining):
                if block[0] <= new_nxt:
                    new_nxt = max(new_nxt, block[1])
                    remaining.remove(block)
                    changed = True
        self.undrained += new_nxt - self.rcv_nxt
        self.rcv_nxt = new_nxt
        self.ooo = remaining

    def _add_ooo(self, start: int, end: int) -> list:
        merged = [start, end]
        kept = []
        for left, right in self.ooo:
            if left <= merged[1] and merged[0] <= right:
                merged = [min(left, merged[0]), max(right, merged[1])]
            else:
                kept.append([left, right])
        self.ooo = [merged] + kept
        return merged

    def _drain(self) -> None:
        now = self.sim.now()
        self.undrained = max(0.0, self.undrained - (now - self.drained_at) * self.sim.downlink.drain_rate())
        self.drained_at = now

    def _advertised_window(self) -> int:
        self._drain()
        ooo_bytes = sum(right - left for left, right in self.ooo)
        window = int(self.config.read_buffer - self.undrained - ooo_bytes)
        window = min(max(window, 0), MAX_RAW_WINDOW << self.window_shift)
        return (window >> self.window_shift) << self.window_shift

    def _sack_blocks(self, duplicate: Optional[tuple]) -> tuple:
        """
        D-SACK block first when one applies, then out-of-order blocks by recency. The block holding
        the latest arrival is always first among them, so it follows an above-ack D-SACK block.
        """
        if not self.sack_ok:
            return ()
        blocks = []
        if duplicate is not None and self.config.dsack_enabled:
            blocks.append(tuple(duplicate))
        blocks.extend(tuple(block) for block in self.ooo)
        return tuple((self._absolute(left), self._absolute(right)) for left, right in blocks[:MAX_SACK_BLOCKS])

    def _send_ack(self, duplicate: Optional[tuple] = None) -> None:
        blocks = self._sack_blocks(duplicate)
        dsack = bool(blocks) and duplicate is not None and self.config.dsack_enabled
        if dsack:
            self.sim.log.dsack_blocks_sent += 1
        window = self._advertised_window()
        self._emit(frozenset({ACK}), window=window, sack_blocks=blocks, options=TcpOptions(dsack_flag=dsack))
        self.unacked_segments = 0
        self.delack_generation += 1
        self.delack_armed = False
        if window < MSS and window < self.config.read_buffer:
            self._arm_window_update(window)

    def _arm_delayed_ack(self) -> None:
        self.delack_generation += 1
        generation = self.delack_generation
        self.delack_armed = True

        def fire():
            if generation == self.delack_generation and self.unacked_segments:
                self._send_ack()

        self.sim.schedule(DELAYED_ACK_TIMEOUT_US, fire)

    def _arm_window_update(self, advertised: int) -> None:
        self.update_generation += 1
        generation = self.update_generation
        drain_us = math.ceil(self.undrained / self.sim.downlink.drain_rate()) + 1

        def fire():
            if generation == self.update_generation and not self.fin_received \
                    and self._advertised_window() > advertised:
                self._send_ack()

        self.sim.schedule(drain_us, fire)

    def _emit(self, flags: frozenset, window: int, ack: Optional[int] = None, sack_blocks: tuple = (),
              options: TcpOptions = TcpOptions()) -> None:
        if ack is None:
            ack = self._absolute(self.rcv_nxt + (1 if self.fin_received else 0))
        self.sim.send_from_client(PacketRecord(
            timestamp=self.sim.now(),
            src_addr=CLIENT_ADDR,
            dst_addr=SERVER_ADDR,
            src_port=self.port,
            dst_port=SERVER_PORT,
            seq=(self.isn + self.seq_offset) & SEQ_MASK,
            ack=ack,
            flags=flags,
            payload_len=0,
            window=window,
            sack_blocks=sack_blocks,
            options=options,
        ))


class _ServerEndpoint:
    """
    Sending side: AIMD congestion window, RFC 6298 retransmission timer, fast retransmit with SACK
    scoreboard recovery (go-back-N without SACK) and D-SACK based undo.
    """

    def __init__(self, simulation: TcpSimulation, config: ClientConfig, transfer_size: int, isn: int,
                 client_port: int):
        self.sim = simulation
        self.config = config
        self.params = CC_PARAMETERS[config.cc_profile]
        self.transfer_size = transfer_size
        self.isn = isn
        self.client_port = client_port
        self.client_isn = 0

        self.established = False
        self.fin_sent = False
        self.sack_ok = False
        self.synack_sent_at = 0
        self.rwnd = 0

        self.snd_una = 0
        self.snd_nxt = 0
        self.snd_max = 0
        self.cwnd = float(self.params.initial_window_segments * MSS)
        self.ssthresh = math.inf
        self.cwnd_limited = False
        self.stalled = False
        # sacked blocks [left, right) above snd_una, sorted
        self.sacked = []

        self.dupacks = 0
        self.dupthresh = DUPACK_THRESHOLD
        self.in_recovery = False
        self.recovery_kind = None
        self.recover = -1
        self.lost_boundary = 0
        self.rtx_next = 0
        self.prior_cwnd = None
        self.prior_ssthresh = None
        self.undo_done = True

        self.srtt = None
        self.rttvar = None
        self.rto = float(INITIAL_RTO_US)
        self.rto_generation = 0
        self.rto_armed = False
        # segment end -> (start, sent_at, retransmitted)
        self.sent_segments = {}

    def receive(self, packet: PacketRecord) -> None:
        if SYN in packet.flags:
            self._on_syn(packet)
            return
        self.rwnd = packet.window
        if FIN in packet.flags:
            self._emit(frozenset({ACK}), seq_offset=self.transfer_size + 2, ack=(packet.seq + 1) & SEQ_MASK)
            return
        if not self.established:
            self.established = True
            self._update_rtt(self.sim.now() - self.synack_sent_at)
            self._try_send()
            return
        if self.fin_sent:
            return

        ack = (packet.ack - self.isn - 1) & SEQ_MASK
        blocks = packet.sack_blocks
        if packet.options.dsack_flag:
            self._on_dsack()
            blocks = blocks[1:]
        for left, right in blocks:
            self._mark_sacked((left - self.isn - 1) & SEQ_MASK, (right - self.isn - 1) & SEQ_MASK)

        if ack > self.snd_una:
            self._on_new_ack(ack)
        elif ack == self.snd_una and not packet.options.dsack_flag and self.snd_max > self.snd_una:
            self._on_dupack()
        if self.in_recovery and self.sack_ok and self.recovery_kind == "fast" and self.sacked:
            self.lost_boundary = max(self.lost_boundary, self.sacked[-1][1])
        self._try_send()

    # ------------------------------------------------------------------------------------------------------------------
    # Private Methods: handshake and ACK processing
    # ------------------------------------------------------------------------------------------------------------------

    def _on_syn(self, packet: PacketRecord) -> None:
        self.client_isn = packet.seq
        self.sack_ok = packet.options.sack_permitted
        self.rwnd = packet.window
        self.synack_sent_at = self.sim.now()
        self._emit(frozenset({SYN, ACK}), seq_offset=0, ack=(packet.seq + 1) & SEQ_MASK,
                   window=min(SERVER_RECEIVE_WINDOW, MAX_RAW_WINDOW),
                   options=TcpOptions(mss=MSS, wscale=SERVER_WINDOW_SCALE, sack_permitted=self.sack_ok))

    def _on_new_ack(self, ack: int) -> None:
        acked = ack - self.snd_una
        covered = [end for end in self.sent_segments if end <= ack]
        if covered:
            _, sent_at, retransmitted = self.sent_segments[max(covered)]
            if not retransmitted:
                self._update_rtt(self.sim.now() - sent_at)
            for end in covered:
                del self.sent_segments[end]

        self.snd_una = ack
        self.snd_nxt = max(self.snd_nxt, ack)
        self.sacked = [[max(left, ack), right] for left, right in self.sacked if right > ack]
        self.dupacks = 0

        if self.in_recovery:
            if self.snd_una >= self.recover:
                self.in_recovery = False
            else:
                self.rtx_next = max(self.rtx_next, self.snd_una)
        # the window stays put during fast recovery and slow-starts again after a timeout
        if self.cwnd_limited and not (self.in_recovery and self.recovery_kind == "fast"):
            if self.cwnd < self.ssthresh:
                self.cwnd += min(acked, 2 * MSS)
            else:
                self.cwnd += self.params.additive_increase_segments * MSS * acked / self.cwnd

        if self.snd_una < self.snd_max:
            self._arm_rto()
        else:
            self.rto_generation += 1
            self.rto_armed = False

    def _on_dupack(self) -> None:
        self.dupacks += 1
        if self.in_recovery or self.dupacks < self.dupthresh or self.snd_una <= self.recover:
            return
        self.sim.log.fast_retransmit_events += 1
        self._reduce_window()
        self.cwnd = max(self.ssthresh, float(MSS))
        self._enter_recovery("fast")

    def _on_rto(self, generation: int) -> None:
        if generation != self.rto_generation or self.snd_una >= self.snd_max or self.fin_sent:
            return
        self.sim.log.timeouts += 1
        self._reduce_window()
        self.cwnd = float(MSS)
        self.rto = min(self.rto * 2, float(MAX_RTO_US))
        self.dupacks = 0
        self.rto_armed = False
        self._enter_recovery("timeout")
        self._try_send()

    def _on_dsack(self) -> None:
        self.sim.log.spurious_retransmissions_detected += 1
        if not self.undo_done and self.prior_cwnd is not None:
            self.cwnd = max(self.cwnd, self.prior_cwnd)
            self.ssthresh = max(self.ssthresh, self.prior_ssthresh)
            self.undo_done = True
            self.dupthresh = min(self.dupthresh + 3, MAX_DUPACK_THRESHOLD)

    def _reduce_window(self) -> None:
        self.prior_cwnd, self.prior_ssthresh = self.cwnd, self.ssthresh
        self.ssthresh = max(self.cwnd * self.params.beta, 2.0 * MSS)
        self.undo_done = False

    def _enter_recovery(self, kind: str) -> None:
        self.in_recovery = True
        self.recovery_kind = kind
        self.recover = self.snd_max
        if self.sack_ok:
            self.rtx_next = self.snd_una
            if kind == "fast":
                highest_sacked = self.sacked[-1][1] if self.sacked else 0
                self.lost_boundary = max(highest_sacked, self.snd_una + 1)
            else:
                self.lost_boundary = self.snd_max
        else:
            self.snd_nxt = self.snd_una

    def _mark_sacked(self, left: int, right: int) -> None:
        left = max(left, self.snd_una)
        if right <= left or right > self.snd_max:
            return
        merged = [left, right]
        kept = []
        for block in self.sacked:
            if block[0] <= merged[1] and merged[0] <= block[1]:
                merged = [min(block[0], merged[0]), max(block[1], merged[1])]
            else:
                kept.append(block)
        self.sacked = sorted(kept + [merged])

    def _update_rtt(self, sample: float) -> None:
        if self.srtt is None:
            self.srtt, self.rttvar = float(sample), sample / 2.0
        else:
            self.rttvar = 0.75 * self.rttvar + 0.25 * abs(self.srtt - sample)
            self.srtt = 0.875 * self.srtt + 0.125 * sample
        self.rto = min(max(float(MIN_RTO_US), self.srtt + max(1.0, 4 * self.rttvar)), float(MAX_RTO_US))

    def _arm_rto(self) -> None:
        self.rto_generation += 1
        generation = self.rto_generation
        self.rto_armed = True
        self.sim.schedule(self.rto, lambda: self._on_rto(generation))

    # ------------------------------------------------------------------------------------------------------------------
    # Private Methods: transmission
    # ------------------------------------------------------------------------------------------------------------------

    def _sacked_bytes(self, lower: int, upper: int) -> int:
        return sum(max(0, min(right, upper) - max(left, lower)) for left, right in self.sacked)

    def _pipe(self) -> int:
        if not self.sack_ok:
            return self.snd_nxt - self.snd_una
        pipe = self.snd_max - self.snd_una - self._sacked_bytes(self.snd_una, self.snd_max)
        if self.in_recovery:
            lower = max(self.rtx_next, self.snd_una)
            if self.lost_boundary > lower:
                pipe -= (self.lost_boundary - lower) - self._sacked_bytes(lower, self.lost_boundary)
        return max(pipe, 0)

    def _next_hole(self) -> Optional[tuple]:
        start = max(self.rtx_next, self.snd_una)
        for left, right in self.sacked:
            if left <= start < right:
                start = right
        upper = min(self.lost_boundary, self.snd_max)
        if start >= upper:
            return None
        end = min(start + MSS, upper, self._next_write_boundary(start))
        for left, _ in self.sacked:
            if left > start:
                end = min(end, left)
                break
        return start, end

    def _next_write_boundary(self, offset: int) -> int:
        return min((offset // self.config.write_buffer + 1) * self.config.write_buffer, self.transfer_size)

    def _try_send(self) -> None:
        if not self.established or self.fin_sent:
            return
        self.cwnd_limited = False
        while True:
            if self.in_recovery and self.sack_ok:
                hole = self._next_hole()
                if hole is not None:
                    start, end = hole
                    if self._pipe() + (end - start) > self.cwnd:
                        self.cwnd_limited = True
                        break
                    self._transmit(start, end)
                    self.rtx_next = end
                    continue

            if self.snd_nxt >= self.transfer_size:
                break
            room = self.snd_una + min(self.config.write_buffer, self.rwnd) - self.snd_nxt
            length = min(MSS, self.transfer_size - self.snd_nxt, self._next_write_boundary(self.snd_nxt) - self.snd_nxt,
                         room)
            full = length == min(MSS, self._next_write_boundary(self.snd_nxt) - self.snd_nxt)
            if length <= 0 or not (full or self.snd_nxt == self.snd_una):
                if not self.stalled:
                    self.stalled = True
                    self.sim.log.sender_stalls += 1
                break
            if self._pipe() + length > self.cwnd:
                self.cwnd_limited = True
                break
            self._transmit(self.snd_nxt, self.snd_nxt + length)
            self.snd_nxt += length
            self.snd_max = max(self.snd_max, self.snd_nxt)
            self.stalled = False

        if self.snd_una >= self.transfer_size and not self.fin_sent:
            self.fin_sent = True
            self.rto_generation += 1
            self._emit(frozenset({FIN, ACK}), seq_offset=self.transfer_size + 1)

    def _transmit(self, start: int, end: int) -> None:
        retransmission = start < self.snd_max
        log = self.sim.log
        log.data_packets_sent += 1
        if retransmission:
            log.retransmissions += 1
            for segment_end, (segment_start, sent_at, _) in list(self.sent_segments.items()):
                if segment_start < end and start < segment_end:
                    self.sent_segments[segment_end] = (segment_start, sent_at, True)
        self.sent_segments[end] = (start, self.sim.now(), retransmission)

        flags = {ACK}
        if end == self._next_write_boundary(start):
            flags.add(PSH)
        self._emit(frozenset(flags), seq_offset=1 + start, payload_len=end - start)
        if not self.rto_armed:
            self._arm_rto()

    def _emit(self, flags: frozenset, seq_offset: int, ack: Optional[int] = None, payload_len: int = 0,
              window: int = SERVER_RECEIVE_WINDOW, options: TcpOptions = TcpOptions()) -> None:
        if ack is None:
            ack = (self.client_isn + 1) & SEQ_MASK
        self.sim.send_from_server(PacketRecord(
            timestamp=self.sim.now(),
            src_addr=SERVER_ADDR,
            dst_addr=CLIENT_ADDR,
            src_port=SERVER_PORT,
            dst_port=self.client_port,
            seq=(self.isn + seq_offset) & SEQ_MASK,
            ack=ack,
            flags=flags,
            payload_len=payload_len,
            window=window,
            options=options,
        ))


def _window_shift(buffer_bytes: int) -> int:
    """
    Smallest window scale shift that lets the raw 16-bit window field cover the buffer.
    """
    shift = 0
    while (buffer_bytes >> shift) > MAX_RAW_WINDOW and shift < 14:
        shift += 1
    return shift

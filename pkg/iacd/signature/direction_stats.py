import heapq
from bisect import bisect_left, bisect_right
from collections import Counter
from dataclasses import dataclass
from typing import Optional

import numpy as np

from iacd.global_settings import DEFAULT_STALL_THRESHOLD_US, HEADER_BYTES, MSS
from iacd.signature.catalogue import STAT_INDEX, STAT_NAMES
from iacd.traces.packet_record import ACK, FIN, PSH, RST, SYN, URG, PacketRecord

SEQ_MODULUS = 1 << 32
US_PER_MS = 1000.0


@dataclass(frozen=True)
class DirectionStats:
    """
    The 70 per-direction statistics, in catalogue order. Times are milliseconds, rates are
    bytes per second, everything else is a count, a size in bytes or a 0/1 flag.
    """
    values: tuple

    def __post_init__(self):
        if len(self.values) != len(STAT_NAMES):
            raise ValueError(f"DirectionStats needs {len(STAT_NAMES)} values, got {len(self.values)}")

    def __getitem__(self, name: str) -> float:
        return self.values[STAT_INDEX[name]]

    def as_dict(self) -> dict:
        return dict(zip(STAT_NAMES, self.values))

    @staticmethod
    def zeros() -> "DirectionStats":
        return DirectionStats(values=(0.0,) * len(STAT_NAMES))

    @staticmethod
    def from_mapping(stats: dict) -> "DirectionStats":
        missing = [name for name in STAT_NAMES if name not in stats]
        if missing:
            raise ValueError(f"Missing statistics: {missing}")
        return DirectionStats(values=tuple(float(stats[name]) for name in STAT_NAMES))


def compute_direction_stats(packets: list, opposite: list) -> DirectionStats:
    """
    Compute the catalogue statistics of one traffic direction of a connection.

    RTT samples match each data segment to the first opposite-direction ACK covering it;
    retransmitted segments and the segments they overlap are excluded (Karn's rule).

    Args:
        packets (list): PacketRecords sent in this direction, in capture order.
        opposite (list): PacketRecords of the opposite direction, used for ACK matching.
    Return:
        (DirectionStats): Computed statistics; all zeros for an empty direction.
    """
    if not packets:
        return DirectionStats.zeros()
    return DirectionStatsCalculator(packets, opposite).calculate()


class _IntervalSet:
    """
    Disjoint, sorted half-open integer intervals.
    """

    def __init__(self):
        self.starts = []
        self.ends = []

    def overlap(self, start: int, end: int) -> int:
        total = 0
        i = bisect_right(self.ends, start)
        while i < len(self.starts) and self.starts[i] < end:
            total += min(end, self.ends[i]) - max(start, self.starts[i])
            i += 1
        return total

    def add(self, start: int, end: int) -> None:
        i = bisect_left(self.ends, start)
        j = bisect_right(self.starts, end)
        if i < j:
            start = min(start, self.starts[i])
            end = max(end, self.ends[j - 1])
        self.starts[i:j] = [start]
        self.ends[i:j] = [end]


@dataclass
class _PendingSegment:
    start: int
    end: int
    sent_at: int
    full_size: bool
    valid: bool


class DirectionStatsCalculator:
    """
    Single pass over the time-merged packets of both directions, tcptrace style.
    """

    def __init__(self, packets: list, opposite: list):
        self.packets = packets
        self.opposite = opposite
        self.base = packets[0].seq
        self.data_start = 1 if packets[0].has(SYN) else 0
        self.mss = next((p.options.mss for p in packets if p.has(SYN) and p.options.mss), MSS)
        self.stats = dict.fromkeys(STAT_NAMES, 0.0)

        # this direction
        self.seen = _IntervalSet()
        self.control_offsets = set()
        self.high_end = 0
        self.high_data_end = 0
        self.retransmissions_by_start = Counter()
        self.pending = []
        self.pending_syn: Optional[tuple] = None
        self.prev_ack: Optional[int] = None
        self.dup_run = 0
        self.data_acked = False

        # opposite direction as seen from here
        self.high_ack = 0
        self.acked_any = False
        self.opposite_dupacks = 0
        self.opposite_window: Optional[int] = None
        self.opposite_sacked = 0
        self.opposite_base: Optional[int] = None
        self.opposite_high_end = 0
        self.last_opposite_ts: Optional[int] = None
        self.last_opposite_data_ts: Optional[int] = None
        self.zero_window_since: Optional[int] = None

        # recovery episodes
        self.in_recovery = False
        self.recovery_point = 0
        self.recovery_starts = set()

        # samples
        self.segment_sizes = []
        self.windows = []
        self.outstanding = []
        self.rtts = []
        self.full_size_rtts = []
        self.response_latencies = []
        self.ack_latencies = []
        self.data_timestamps = []
        self.data_payloads = []
        self.in_flight = []
        self.rwin_limited = 0

    # ------------------------------------------------------------------------------------------------------------------
    # Public Methods
    # ------------------------------------------------------------------------------------------------------------------

    def calculate(self) -> DirectionStats:
        """
        Walk both directions in timestamp order and aggregate the statistics.

        Return:
            (DirectionStats): Computed statistics.
        """
        own = ((p.timestamp, 0, i, p) for i, p in enumerate(self.packets))
        other = ((p.timestamp, 1, i, p) for i, p in enumerate(self.opposite))
        start_ts = self.packets[0].timestamp
        if self.opposite:
            start_ts = min(start_ts, self.opposite[0].timestamp)
        end_ts = start_ts
        for timestamp, side, _, packet in heapq.merge(own, other, key=lambda event: event[0]):
            if side == 0:
                self._on_packet(packet)
            else:
                self._on_opposite(packet)
            self.outstanding.append(max(0, self.high_data_end - self.high_ack) if self.high_data_end else 0)
            end_ts = timestamp
        if self.zero_window_since is not None:
            self.stats["zero_window_stall_time"] += (end_ts - self.zero_window_since) / US_PER_MS
        self._finish(start_ts)
        return DirectionStats.from_mapping(self.stats)

    # ------------------------------------------------------------------------------------------------------------------
    # Private Methods
    # ------------------------------------------------------------------------------------------------------------------

    def _offset(self, value: int, base: int) -> int:
        delta = (value - base) % SEQ_MODULUS
        return delta - SEQ_MODULUS if delta >= SEQ_MODULUS // 2 else delta

    def _on_packet(self, packet: PacketRecord) -> None:
        s = self.stats
        s["total_packets"] += 1
        s["total_bytes"] += packet.payload_len
        s["pure_acks"] += packet.is_pure_ack
        s["pushed_packets"] += packet.has(PSH)
        s["urgent_packets"] += packet.has(URG)
        s["syn_count"] += packet.has(SYN)
        s["fin_count"] += packet.has(FIN)
        s["rst_count"] += packet.has(RST)
        s["sack_blocks_sent"] += len(packet.sack_blocks)
        s["dsack_blocks_sent"] += packet.options.dsack_flag
        self.windows.append(packet.window)
        if self.last_opposite_ts is not None:
            self.response_latencies.append(packet.timestamp - self.last_opposite_ts)

        start = self._offset(packet.seq, self.base)
        if packet.has(SYN):
            s["sack_permitted"] = max(s["sack_permitted"], float(packet.options.sack_permitted))
            if packet.options.wscale is not None:
                s["window_scale"] = packet.options.wscale
            if packet.options.mss is not None:
                s["mss_requested"] = packet.options.mss
            self.control_offsets.add(start)
            if self.pending_syn is None:
                self.pending_syn = (start + 1, packet.timestamp)
            start += 1

        if packet.is_data:
            self._on_data(packet, start)
        elif self._is_keepalive(packet, start):
            s["keepalive_packets"] += 1

        end = start + packet.payload_len
        if packet.has(FIN):
            self.control_offsets.add(end)
            end += 1
        self.high_end = max(self.high_end, end)
        if packet.has(ACK):
            self._on_own_ack(packet)

    def _on_data(self, packet: PacketRecord, start: int) -> None:
        s = self.stats
        end = start + packet.payload_len
        s["data_packets"] += 1
        s["data_bytes"] += packet.payload_len + HEADER_BYTES
        self.segment_sizes.append(packet.payload_len)
        self.data_timestamps.append(packet.timestamp)
        self.data_payloads.append((packet.payload_len, packet.has(PSH) or packet.has(FIN)))

        overlap = self.seen.overlap(start, end)
        if overlap > 0:
            s["retransmitted_packets"] += 1
            s["retransmitted_bytes"] += packet.payload_len
            self.retransmissions_by_start[start] += 1
            for segment in self.pending:
                segment.valid = segment.valid and not (segment.start < end and start < segment.end)
            self._track_recovery(start)
        elif start < self.high_data_end:
            s["out_of_order_packets"] += 1
        if self.acked_any and end <= self.high_ack:
            s["duplicate_packets"] += 1

        self.seen.add(start, end)
        self.high_data_end = max(self.high_data_end, end)
        self.pending.append(_PendingSegment(start=start, end=end, sent_at=packet.timestamp,
                                            full_size=packet.payload_len >= self.mss, valid=overlap == 0))
        if not self.data_acked:
            s["initial_window_bytes"] += packet.payload_len
            s["initial_window_packets"] += 1
        if self.opposite_window is not None:
            if self.high_data_end - self.high_ack >= self.opposite_window - self.mss:
                self.rwin_limited += 1
            if self.opposite_window == 0 and packet.payload_len <= 1:
                s["persist_events"] += 1
        self.in_flight.append(max(0, self.high_data_end - self.high_ack - self.opposite_sacked))

    def _track_recovery(self, start: int) -> None:
        """
        A retransmission opening a recovery episode without three duplicate ACKs, or repeating a
        segment already resent in the episode, is counted as a timeout.
        """
        if not self.in_recovery:
            if self.opposite_dupacks < 3:
                self.stats["inferred_timeouts"] += 1
            self.in_recovery = True
            self.recovery_point = self.high_end
            self.recovery_starts = set()
        elif start in self.recovery_starts:
            self.stats["inferred_timeouts"] += 1
            self.recovery_point = self.high_end
            self.recovery_starts = set()
        self.recovery_starts.add(start)

    def _is_keepalive(self, packet: PacketRecord, start: int) -> bool:
        if packet.flags & {SYN, FIN, RST} or packet.payload_len > 1:
            return False
        return self.high_end > 0 and start == self.high_end - 1

    def _on_own_ack(self, packet: PacketRecord) -> None:
        if self.prev_ack is None or packet.ack != self.prev_ack:
            if self.prev_ack is not None and self.last_opposite_data_ts is not None:
                self.ack_latencies.append(packet.timestamp - self.last_opposite_data_ts)
            self.dup_run = 0
        elif packet.is_pure_ack and self._opposite_has_outstanding(packet.ack):
            self.stats["duplicate_acks"] += 1
            self.dup_run += 1
            if self.dup_run == 3:
                self.stats["triple_dupack_events"] += 1
        self.prev_ack = packet.ack

    def _opposite_has_outstanding(self, ack: int) -> bool:
        if self.opposite_base is None:
            return False
        return self._offset(ack, self.opposite_base) < self.opposite_high_end

    def _on_opposite(self, packet: PacketRecord) -> None:
        self.last_opposite_ts = packet.timestamp
        if self.opposite_base is None:
            self.opposite_base = packet.seq
        opposite_end = (self._offset(packet.seq, self.opposite_base) + packet.payload_len
                        + packet.has(SYN) + packet.has(FIN))
        self.opposite_high_end = max(self.opposite_high_end, opposite_end)
        if packet.is_data:
            self.last_opposite_data_ts = packet.timestamp

        if packet.has(ACK):
            acked = self._offset(packet.ack, self.base)
            if not self.acked_any or acked > self.high_ack:
                self._on_ack_advance(packet, acked)
            elif acked == self.high_ack and packet.is_pure_ack:
                self.opposite_dupacks += 1
            self.opposite_sacked = self._sacked_above_ack(packet)

        if packet.window == 0 and not packet.has(RST):
            if self.zero_window_since is None:
                self.zero_window_since = packet.timestamp
        elif self.zero_window_since is not None:
            self.stats["zero_window_stall_time"] += (packet.timestamp - self.zero_window_since) / US_PER_MS
            self.zero_window_since = None
        self.opposite_window = packet.window

    def _on_ack_advance(self, packet: PacketRecord, acked: int) -> None:
        self.high_ack = acked
        self.acked_any = True
        self.opposite_dupacks = 0
        if acked > self.data_start and self.seen.starts:
            self.data_acked = True
        if self.pending_syn is not None and acked >= self.pending_syn[0] and not self.stats["handshake_rtt"]:
            self.stats["handshake_rtt"] = (packet.timestamp - self.pending_syn[1]) / US_PER_MS
        remaining = []
        for segment in self.pending:
            if segment.end > acked:
                remaining.append(segment)
            elif segment.valid:
                sample = (packet.timestamp - segment.sent_at) / US_PER_MS
                self.rtts.append(sample)
                if segment.full_size:
                    self.full_size_rtts.append(sample)
        self.pending = remaining
        if self.in_recovery and acked >= self.recovery_point:
            self.in_recovery = False

    def _sacked_above_ack(self, packet: PacketRecord) -> int:
        blocks = packet.sack_blocks[1:] if packet.options.dsack_flag else packet.sack_blocks
        total = 0
        for left, right in blocks:
            left_offset = max(self._offset(left, self.base), self.high_ack)
            total += max(0, self._offset(right, self.base) - left_offset)
        return total

    def _finish(self, start_ts: int) -> None:
        s = self.stats
        s["unique_bytes"] = sum(e - b for b, e in zip(self.seen.starts, self.seen.ends))
        if self.retransmissions_by_start:
            s["max_segment_retransmissions"] = max(self.retransmissions_by_start.values())
        if self.acked_any and self.high_ack > 0:
            control_below = sum(1 for offset in self.control_offsets if 0 <= offset < self.high_ack)
            s["missed_bytes"] = max(0, self.high_ack - self.seen.overlap(0, self.high_ack) - control_below)
        s["truncated_packets"] = sum(1 for payload, pushed in self.data_payloads[:-1]
                                     if payload < self.mss and not pushed)

        _describe(s, self.segment_sizes, maximum="max_segment_size",
                  minimum="min_segment_size", mean="mean_segment_size", stddev="stddev_segment_size")
        payloads = [p.payload_len for p in self.packets]
        nonzero = [p for p in payloads if p > 0]
        s["max_payload"] = max(payloads)
        s["min_nonzero_payload"] = min(nonzero) if nonzero else 0
        _describe(s, self.windows, maximum="max_window", minimum="min_window", mean="mean_window")
        s["zero_window_count"] = sum(1 for p in self.packets if p.window == 0 and not p.has(RST))
        _describe(s, self.outstanding, maximum="max_outstanding", minimum="min_outstanding",
                  mean="mean_outstanding", stddev="stddev_outstanding")
        _describe(s, self.rtts, maximum="rtt_max", minimum="rtt_min", mean="rtt_mean",
                  stddev="rtt_stddev")
        s["rtt_samples"] = len(self.rtts)
        _describe(s, self.full_size_rtts, maximum="full_size_rtt_max",
                  minimum="full_size_rtt_min", mean="full_size_rtt_mean")
        s["full_size_rtt_samples"] = len(self.full_size_rtts)
        if self.response_latencies:
            s["min_ttl_proxy"] = min(self.response_latencies) / US_PER_MS
            s["max_ttl_proxy"] = max(self.response_latencies) / US_PER_MS

        timestamps = np.array([p.timestamp for p in self.packets], dtype=np.int64)
        gaps = np.diff(timestamps) / US_PER_MS
        elapsed_us = int(timestamps[-1] - timestamps[0])
        s["elapsed_time"] = elapsed_us / US_PER_MS
        if gaps.size:
            s["max_idle_gap"] = float(gaps.max())
            s["mean_inter_packet_gap"] = float(gaps.mean())
            s["stddev_inter_packet_gap"] = float(gaps.std())
        if elapsed_us > 0:
            s["throughput"] = s["total_bytes"] / (elapsed_us / 1e6)
            s["goodput"] = s["unique_bytes"] / (elapsed_us / 1e6)
        if self.ack_latencies:
            s["mean_ack_latency"] = float(np.mean(self.ack_latencies)) / US_PER_MS

        if self.data_timestamps:
            s["data_transmit_span"] = (self.data_timestamps[-1] - self.data_timestamps[0]) / US_PER_MS
            s["time_to_first_byte"] = (self.data_timestamps[0] - start_ts) / US_PER_MS
            s["time_to_last_byte"] = (self.data_timestamps[-1] - start_ts) / US_PER_MS
            s["rwin_limited_fraction"] = self.rwin_limited / len(self.data_timestamps)
            s["max_in_flight"] = max(self.in_flight)
            threshold = 2 * np.mean(self.rtts) * US_PER_MS if self.rtts else DEFAULT_STALL_THRESHOLD_US
            data_gaps = np.diff(np.array(self.data_timestamps, dtype=np.int64))
            s["sender_stall_count"] = int(np.count_nonzero(data_gaps > threshold))


def _describe(stats: dict, samples: list, maximum: str, minimum: str, mean: str, stddev: Optional[str] = None) -> None:
    """
    Fill max/min/mean (and optionally population stddev) entries; no sample leaves zeros.
    """
    if not samples:
        return
    values = np.asarray(samples, dtype=float)
    stats[maximum] = float(values.max())
    stats[minimum] = float(values.min())
    stats[mean] = float(np.clip(values.mean(), values.min(), values.max()))
    if stddev is not None:
        stats[stddev] = float(values.std())

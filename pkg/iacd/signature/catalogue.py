from iacd.global_settings import CATALOGUE_VERSION, STATS_PER_DIRECTION

# (group, statistic names) in catalogue order; docs/feature_catalogue.md documents each entry
STAT_GROUPS = (
    ("volume", (
        "total_packets",
        "total_bytes",
        "unique_bytes",
        "data_packets",
        "data_bytes",
        "retransmitted_packets",
        "retransmitted_bytes",
        "pure_acks",
        "pushed_packets",
        "urgent_packets",
    )),
    ("flags", (
        "syn_count",
        "fin_count",
        "rst_count",
        "sack_permitted",
        "window_scale",
        "mss_requested",
        "min_ttl_proxy",
        "max_ttl_proxy",
    )),
    ("segment_size", (
        "max_segment_size",
        "min_segment_size",
        "mean_segment_size",
        "stddev_segment_size",
        "max_payload",
        "min_nonzero_payload",
    )),
    ("window", (
        "max_window",
        "min_window",
        "mean_window",
        "zero_window_count",
        "max_outstanding",
        "min_outstanding",
        "mean_outstanding",
        "stddev_outstanding",
    )),
    ("rtt", (
        "rtt_min",
        "rtt_max",
        "rtt_mean",
        "rtt_stddev",
        "rtt_samples",
        "handshake_rtt",
        "full_size_rtt_min",
        "full_size_rtt_max",
        "full_size_rtt_mean",
        "full_size_rtt_samples",
    )),
    ("loss", (
        "duplicate_acks",
        "triple_dupack_events",
        "sack_blocks_sent",
        "dsack_blocks_sent",
        "out_of_order_packets",
        "inferred_timeouts",
        "max_segment_retransmissions",
        "missed_bytes",
        "truncated_packets",
        "duplicate_packets",
    )),
    ("timing", (
        "elapsed_time",
        "max_idle_gap",
        "throughput",
        "goodput",
        "initial_window_bytes",
        "initial_window_packets",
        "data_transmit_span",
        "mean_ack_latency",
        "mean_inter_packet_gap",
        "stddev_inter_packet_gap",
    )),
    ("stall", (
        "rwin_limited_fraction",
        "max_in_flight",
        "sender_stall_count",
        "zero_window_stall_time",
        "persist_events",
        "keepalive_packets",
        "time_to_first_byte",
        "time_to_last_byte",
    )),
)

STAT_NAMES = tuple(name for _, names in STAT_GROUPS for name in names)
STAT_INDEX = {name: index for index, name in enumerate(STAT_NAMES)}

# signature layout: client trace then server trace, forward direction then reverse
SIGNATURE_BLOCKS = (("client", "fwd"), ("client", "rev"), ("server", "fwd"), ("server", "rev"))

assert len(STAT_NAMES) == STATS_PER_DIRECTION, "catalogue must list 70 statistics per direction"


def feature_names() -> list:
    """
    Names of the signature features in index order, e.g. ``client.fwd.total_packets``.

    Return:
        (list): 280 feature names.
    """
    return [f"{capture}.{direction}.{stat}" for capture, direction in SIGNATURE_BLOCKS for stat in STAT_NAMES]


def feature_index(name: str) -> int:
    """
    Signature index of a feature name.

    Raises:
        ValueError: If the name is not in the catalogue.
    """
    capture, _, rest = name.partition(".")
    direction, _, stat = rest.partition(".")
    if (capture, direction) not in SIGNATURE_BLOCKS or stat not in STAT_INDEX:
        raise ValueError(f"Unknown feature name: {name} (catalogue {CATALOGUE_VERSION})")
    return SIGNATURE_BLOCKS.index((capture, direction)) * STATS_PER_DIRECTION + STAT_INDEX[stat]

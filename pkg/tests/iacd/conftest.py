import pytest

from iacd.global_settings import MSS
from iacd.synth.scenario import ClientConfig, LinkConfig
from iacd.synth.tcp_simulator import simulate_connection

SMALL_TRANSFER = 64 * MSS


@pytest.fixture(scope="session")
def clean_transfer():
    """
    (client trace, server trace, event log) of a short transfer over the healthy link.
    """
    return simulate_connection(LinkConfig(), ClientConfig(), transfer_size=SMALL_TRANSFER, seed=11)


@pytest.fixture(scope="session")
def lossy_transfer():
    """
    (client trace, server trace, event log) of a transfer with 5% loss and some reordering.
    """
    return simulate_connection(LinkConfig(loss_rate=0.05, reorder_rate=0.02), ClientConfig(),
                               transfer_size=200 * MSS, seed=3)

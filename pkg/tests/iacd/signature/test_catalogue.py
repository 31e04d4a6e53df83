import pytest

from iacd.global_settings import SIGNATURE_DIMENSION, STATS_PER_DIRECTION
from iacd.signature.catalogue import STAT_NAMES, feature_index, feature_names


# Test the catalogue lists 70 distinct statistics
def test_stat_names_unique():
    assert len(STAT_NAMES) == STATS_PER_DIRECTION
    assert len(set(STAT_NAMES)) == STATS_PER_DIRECTION

# Test feature names follow the client/server then forward/reverse layout
def test_feature_names_layout():
    names = feature_names()
    assert len(names) == SIGNATURE_DIMENSION
    assert len(set(names)) == SIGNATURE_DIMENSION
    assert names[0] == "client.fwd.total_packets"
    assert names[STATS_PER_DIRECTION] == "client.rev.total_packets"
    assert names[2 * STATS_PER_DIRECTION] == "server.fwd.total_packets"
    assert names[-1] == f"server.rev.{STAT_NAMES[-1]}"

# Test feature_index inverts feature_names
def test_feature_index_round_trip():
    for index, name in enumerate(feature_names()):
        assert feature_index(name) == index

# Test unknown feature names are rejected
@pytest.mark.parametrize("name", ["router.fwd.total_packets", "client.up.total_packets", "client.fwd.nothing"])
def test_feature_index_unknown(name):
    with pytest.raises(ValueError):
        feature_index(name)

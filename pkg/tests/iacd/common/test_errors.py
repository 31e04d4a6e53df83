import pytest

from iacd.common.errors import (
    EmptyTrace,
    IacdError,
    InfeasibleScenario,
    SchemaError,
    SingleClass,
    TruncatedRecord,
)


# Test schema errors carry their line number in the message
def test_schema_error():
    error = SchemaError(7, "expected 12 fields, got 4")
    assert error.line_number == 7
    assert str(error) == "line 7: expected 12 fields, got 4"

# Test truncated records report the last good index
def test_truncated_record():
    error = TruncatedRecord(41)
    assert error.last_good_index == 41
    assert "41" in str(error)
    assert str(TruncatedRecord(-1, "cut short")) == "cut short"

# Test domain errors are caught as IacdError and ValueError
@pytest.mark.parametrize("error_class", [EmptyTrace, SingleClass, InfeasibleScenario])
def test_error_hierarchy(error_class):
    with pytest.raises(IacdError):
        raise error_class("boom")
    assert issubclass(error_class, ValueError)

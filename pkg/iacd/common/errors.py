class IacdError(Exception):
    """
    Base class for every domain error raised by the iacd package.
    """


# ----------------------------------------------------------------------------------------------------------------------
# Trace errors
# ----------------------------------------------------------------------------------------------------------------------

class CorruptCapture(IacdError, ValueError):
    """Malformed pcap global header."""


class TruncatedRecord(IacdError, ValueError):
    """
    A pcap record ends before its declared capture length.
    """

    def __init__(self, last_good_index: int, message: str = ""):
        """
        Args:
            last_good_index (int): Index of the last fully decoded record, -1 if none.
            message (str): Optional detail.
        """
        self.last_good_index = last_good_index
        super().__init__(message or f"Truncated pcap record after record index {last_good_index}")


class UnsupportedNetwork(IacdError, ValueError):
    """Capture uses a network layer the parser does not handle (e.g. IPv6)."""


class SchemaError(IacdError, ValueError):
    """
    A canonical trace line does not match the record schema.
    """

    def __init__(self, line_number: int, message: str):
        """
        Args:
            line_number (int): 1-based line number of the offending line.
            message (str): What is wrong with the line.
        """
        self.line_number = line_number
        self.message = message
        super().__init__(f"line {line_number}: {message}")


class EmptyTrace(IacdError, ValueError):
    """A trace holds no packet."""


class TracePairMismatch(IacdError, ValueError):
    """Client and server traces do not describe the same connection."""


# ----------------------------------------------------------------------------------------------------------------------
# Signature database and preprocessing errors
# ----------------------------------------------------------------------------------------------------------------------

class DimensionMismatch(IacdError, ValueError):
    """Feature vectors of different lengths were combined."""


class CatalogueMismatch(IacdError, ValueError):
    """Databases following different catalogue versions or feature names were combined."""


class EmptyDatabase(IacdError, ValueError):
    """A signature database with no signature."""


class LabelLeak(IacdError, ValueError):
    """A label outside the two classes of a binary problem was found."""


class DegenerateDatabase(IacdError, ValueError):
    """Every feature is null over the training data."""


# ----------------------------------------------------------------------------------------------------------------------
# Learning errors
# ----------------------------------------------------------------------------------------------------------------------

class InsufficientSamples(IacdError, ValueError):
    """A class has fewer samples than the statistic requires."""


class FoldError(IacdError, ValueError):
    """Stratified folds cannot be built for the requested fold count."""


class SingleClass(IacdError, ValueError):
    """Binary training data contains one class only."""


class InvalidModel(IacdError, ValueError):
    """A trained model violates its own invariants."""


class NoHealthyBaseline(IacdError, ValueError):
    """CF training data lacks the healthy client class cf_0."""


# ----------------------------------------------------------------------------------------------------------------------
# Simulation and configuration errors
# ----------------------------------------------------------------------------------------------------------------------

class InfeasibleScenario(IacdError, ValueError):
    """A simulated transfer cannot make progress."""


class InvalidConfiguration(IacdError, ValueError):
    """A configuration object violates its invariants."""


class NoScenarios(IacdError, ValueError):
    """A scenario matrix lists no scenario."""

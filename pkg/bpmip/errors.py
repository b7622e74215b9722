"""
Exception hierarchy for bpmip.

Library code raises these; the command-line layer turns them into exit code 2.
"""

from typing import Optional


class BpmipError(Exception):
    """Base class of every error raised by bpmip."""


class NetworkError(BpmipError):
    pass


class NetworkParseError(NetworkError):
    """The network file is not well-formed."""


class NetworkShapeError(NetworkError):
    """A layer's dimensions do not chain with its neighbours."""

    def __init__(self, message: str, layer: Optional[int] = None):
        super().__init__(message)
        self.layer = layer


class NetworkValueError(NetworkError):
    """A weight or bias is not finite."""


class DimensionError(BpmipError):
    """A vector does not have the length the network expects."""


class ConfigurationError(BpmipError):
    pass


class MissingBoundsError(BpmipError):
    """Concrete bounds for a referenced layer have not been computed yet."""


class OracleCapError(BpmipError):
    """Exhaustive enumeration would exceed the ReLU count cap."""


class QueryError(BpmipError):
    """A query or dataset file is malformed."""

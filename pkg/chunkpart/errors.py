"""Exception types raised by chunkpart."""


class ChunkPartError(Exception):
    """Base class for every error raised on purpose by this package."""


class DomainError(ChunkPartError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class ParseError(DomainError):
    """A line of a text edge list could not be read."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class FormatError(DomainError):
    """A binary file has a wrong magic, version or length."""


class GraphTooLargeError(DomainError):
    """The baseline greedy ordering refuses graphs above its edge cap."""

    def __init__(self, edge_count: int, cap: int):
        super().__init__(
            f"baseline greedy ordering is capped at {cap} edges, graph has {edge_count} "
            f"(raise CHUNKPART_BASELINE_CAP to override)"
        )
        self.edge_count = edge_count
        self.cap = cap


class ConfigurationError(ChunkPartError):
    """Settings or parameters are unusable before any work starts."""

"""Exception hierarchy for the design-space exploration engine.

Every error raised by the library derives from :class:`FogforgeError`, so
callers (CLI, HTTP API) can map failures to exit codes / status codes in one
place. Validation-style errors carry enough context to name the violated
constraint.
"""
from __future__ import annotations


class FogforgeError(Exception):
    """Base class for all library errors."""


class SchemaError(FogforgeError):
    """A model document is malformed (missing or wrongly-typed field)."""


class ValidationError(FogforgeError):
    """A well-formed document violates a model invariant.

    Attributes:
        invariant: short name of the violated invariant.
    """

    def __init__(self, invariant: str, message: str) -> None:
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


class DisconnectedGraph(ValidationError):
    """The infrastructure graph is not connected."""

    def __init__(self, message: str) -> None:
        super().__init__("connected-graph", message)


class CyclicSoftwareGraph(ValidationError):
    """The software connection graph contains a cycle."""

    def __init__(self, message: str) -> None:
        super().__init__("acyclic-software", message)


class MissingRate(ValidationError):
    """A source component lacks an output rate."""

    def __init__(self, message: str) -> None:
        super().__init__("source-output-rate", message)


class EmptySpace(FogforgeError):
    """A candidate set is empty, so the design space contains no options."""


class EmptyCandidates(EmptySpace):
    """Best-practice filtering removed every candidate for a service."""

    def __init__(self, service: str, message: str) -> None:
        super().__init__(message)
        self.service = service


class EmptyInput(FogforgeError):
    """An operation requiring a non-empty input received none."""


class UnknownPathClass(FogforgeError):
    """An application path declares a class no rule knows about."""


class Unreachable(FogforgeError):
    """No route exists between two hosts in the infrastructure graph."""


class UnknownOption(FogforgeError):
    """A referenced design option is not present in the run artifacts."""


class EmulationError(FogforgeError):
    """Base class for virtual-testbed failures."""


class CalibrationUnstable(EmulationError):
    """Repeated calibration measurements deviated by more than 10 %."""


class Starvation(EmulationError):
    """An application path recorded zero samples after warmup."""

    def __init__(self, path_id: str, message: str) -> None:
        super().__init__(message)
        self.path_id = path_id


class ResourceExhausted(EmulationError):
    """Configured service footprints exceed a virtual node's memory cap."""

    def __init__(self, node_id: str, message: str) -> None:
        super().__init__(message)
        self.node_id = node_id

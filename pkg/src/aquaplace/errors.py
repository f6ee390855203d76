"""Exception hierarchy shared across the package."""

from __future__ import annotations


class AquaplaceError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(AquaplaceError):
    """A document does not conform to its file schema; names the offending field."""


class NetworkError(AquaplaceError):
    """Invalid network structure."""


class DuplicateIdError(NetworkError):
    """A node or edge id occurs more than once."""


class DanglingEndpointError(NetworkError):
    """An edge references a node id that does not exist."""


class DisconnectedNetworkError(NetworkError):
    """The network graph is not connected."""


class NoSourceError(NetworkError):
    """The network has no source node."""


class ModelError(AquaplaceError):
    """Invalid quadratic-model construction or evaluation."""


class SolverError(AquaplaceError):
    """A solver refused its input or failed."""


class SessionError(AquaplaceError):
    """Invalid installation-session operation."""


class MarkConflictError(SessionError):
    """A node was marked with a status that contradicts its current one."""


class InstallLimitError(SessionError):
    """Installing one more sensor would exceed the session's sensor budget."""


class ReplanInFlightError(SessionError):
    """A session already has a replan job running."""


class PenaltyWeightError(SessionError):
    """A replan solution violated its pins or forbids; the weight is too small."""

"""Exception hierarchy shared by every module."""
from __future__ import annotations

__all__ = [
    "HZMarketError",
    "InstanceError",
    "DimensionError",
    "PriceError",
    "UtilityShapeError",
    "BundleError",
    "GraphError",
    "InvariantViolation",
]


class HZMarketError(Exception):
    """Root of every error raised on purpose by :mod:`hz_market`."""


class InstanceError(HZMarketError, ValueError):
    """Malformed instance or equilibrium file."""


class DimensionError(HZMarketError, ValueError):
    """Vectors or matrices whose shape disagrees with the market size."""


class PriceError(HZMarketError, ValueError):
    """Prices outside the range an operation accepts."""


class UtilityShapeError(HZMarketError, ValueError):
    """Utilities that do not have the shape a solver requires."""


class BundleError(HZMarketError, ValueError):
    """A bundle handed to a classifier that is not an optimal bundle."""


class GraphError(HZMarketError, ValueError):
    """Vertex sets or edges that do not fit the bipartite graph."""


class InvariantViolation(HZMarketError, AssertionError):
    """An internal guarantee failed; always a bug, never bad input."""

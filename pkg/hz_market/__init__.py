"""Exact and numeric equilibria for one-sided matching markets.

Agents spend one unit of fake money on a probability share of goods; the
package computes, verifies and searches for competitive equilibria with
equal incomes.
"""
from __future__ import annotations

from .errors import (
    DimensionError,
    HZMarketError,
    InstanceError,
    InvariantViolation,
    PriceError,
    UtilityShapeError,
)
from .model import Allocation, EquilibriumPoint, MarketInstance, PriceVector

__all__ = [
    "Allocation",
    "DimensionError",
    "EquilibriumPoint",
    "HZMarketError",
    "InstanceError",
    "InvariantViolation",
    "MarketInstance",
    "PriceError",
    "PriceVector",
    "UtilityShapeError",
]

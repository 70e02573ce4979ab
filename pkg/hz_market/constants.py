"""Tunable defaults and fixed fixtures."""
from __future__ import annotations

from typing import TypedDict, Union

__all__ = [
    "DEFAULT_NEG_INFINITY",
    "MIN_NEG_INFINITY",
    "DEFAULT_TOL",
    "DEFAULT_DAMPING",
    "DEFAULT_RESTARTS",
    "DEFAULT_MAX_STEPS",
    "DEFAULT_FIXPOINT_TOL",
    "DOMAIN_TOL",
    "LOG_ENV_VAR",
    "EXAMPLE_ONE_UTILITIES",
    "EXAMPLE_ONE_PRICES",
    "EXAMPLE_TWO_UTILITIES",
    "EXAMPLE_TWO_PRICES",
    "TABLE_ONE_ROWS",
    "InstanceJSON",
    "EquilibriumJSON",
]

# Stand-in for an unacceptable good; any value of at least 20 works for the
# irrational four-agent market.
DEFAULT_NEG_INFINITY = 100
MIN_NEG_INFINITY = 20

DEFAULT_TOL = 1e-9
DEFAULT_DAMPING = 0.1
DEFAULT_RESTARTS = 32
DEFAULT_MAX_STEPS = 2000
DEFAULT_FIXPOINT_TOL = 1e-10
DOMAIN_TOL = 1e-12

LOG_ENV_VAR = "HZ_LOG"

# Single-agent bundle fixtures: utilities and prices of a two-good market.
EXAMPLE_ONE_UTILITIES = (10, 2)
EXAMPLE_ONE_PRICES = ("2", "1/10")
EXAMPLE_TWO_UTILITIES = (10, 2)
EXAMPLE_TWO_PRICES = ("2", "1/5")

# None marks an unacceptable good.
TABLE_ONE_ROWS: tuple[tuple[int | None, ...], ...] = (
    (10, 20, None, 40),
    (10, 15, None, 40),
    (10, None, 30, None),
    (None, 20, 30, None),
)

JSONScalar = Union[int, float, str]


class _InstanceBase(TypedDict):
    n: int
    utilities: list[list[JSONScalar]]


class InstanceJSON(_InstanceBase, total=False):
    neg_infinity: JSONScalar


class EquilibriumJSON(TypedDict):
    prices: list[JSONScalar]
    allocation: list[list[JSONScalar]]

"""Built-in markets: the two-good demand fixtures and a four-agent market
whose only equilibria have irrational prices."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np
import sympy as sp

from .constants import (
    DEFAULT_NEG_INFINITY,
    EXAMPLE_ONE_PRICES,
    EXAMPLE_ONE_UTILITIES,
    EXAMPLE_TWO_PRICES,
    EXAMPLE_TWO_UTILITIES,
    MIN_NEG_INFINITY,
    TABLE_ONE_ROWS,
)
from .errors import InstanceError, InvariantViolation
from .model import (
    Allocation,
    EquilibriumPoint,
    MarketInstance,
    PriceVector,
    Rat,
    Scalar,
    parse_scalar,
)
from .verify import EquilibriumReport, verify_equilibrium

__all__ = [
    "ClosedFormEquilibrium",
    "DisconnectednessWitness",
    "example_one_fixture",
    "example_two_fixture",
    "table1_instance",
    "closed_form_equilibrium",
    "closed_form_point",
    "exact_prices",
    "disconnectedness_witness",
]

logger = logging.getLogger(__name__)

Which = Literal[1, 2]

# (a, b, c) of a*y**2 + b*y + c = 0 for each equilibrium.
_QUADRATICS: dict[int, tuple[int, int, int]] = {1: (4, -1, -1), 2: (7, -1, -4)}


def example_one_fixture() -> tuple[tuple[Scalar, ...], PriceVector]:
    return tuple(parse_scalar(v) for v in EXAMPLE_ONE_UTILITIES), PriceVector.of(EXAMPLE_ONE_PRICES)


def example_two_fixture() -> tuple[tuple[Scalar, ...], PriceVector]:
    return tuple(parse_scalar(v) for v in EXAMPLE_TWO_UTILITIES), PriceVector.of(EXAMPLE_TWO_PRICES)


def table1_instance(neg_infinity: Scalar = DEFAULT_NEG_INFINITY) -> MarketInstance:
    """Four agents, four goods; unacceptable goods carry utility ``-neg_infinity``."""

    if neg_infinity < MIN_NEG_INFINITY:
        raise InstanceError(
            f"neg_infinity must be at least {MIN_NEG_INFINITY} to keep unacceptable goods out, "
            f"got {neg_infinity}"
        )
    m = parse_scalar(neg_infinity)
    rows = tuple(tuple(-m if v is None else Rat(v) for v in row) for row in TABLE_ONE_ROWS)
    return MarketInstance(rows, neg_infinity=m)


@dataclass(frozen=True)
class ClosedFormEquilibrium:
    which: int
    y: float
    r: tuple[float, float, float, float]
    prices: tuple[float, float, float, float]
    allocation: Allocation

    @property
    def point(self) -> EquilibriumPoint:
        return EquilibriumPoint(PriceVector(self.prices), self.allocation)


def _positive_root(a: int, b: int, c: int) -> float:
    # q-form avoids cancellation between -b and the square root.
    q = -0.5 * (b + np.copysign(np.sqrt(b * b - 4.0 * a * c), b))
    roots = (q / a, c / q)
    return float(max(roots))


def exact_prices(which: Which) -> tuple[sp.Expr, ...]:
    """Closed-form prices as sympy surds."""

    if which == 1:
        s = sp.sqrt(17)
        return (sp.Integer(0), (23 - s) / 32, (9 + s) / 8, (69 - 3 * s) / 32)
    if which == 2:
        s = sp.sqrt(113)
        return (sp.Integer(0), (41 - s) / 98, (15 + s) / 14, (246 - 6 * s) / 98)
    raise ValueError(f"which must be 1 or 2, got {which!r}")


def closed_form_equilibrium(which: Which) -> ClosedFormEquilibrium:
    """Prices from the positive root ``y`` and shares from the spending balances.

    An agent mixing a good ``r_c`` below price 1 with one ``r_d`` above spends
    exactly its budget when it holds them in proportion ``r_d : r_c``; the
    remaining shares follow from clearing.
    """

    if which not in _QUADRATICS:
        raise ValueError(f"which must be 1 or 2, got {which!r}")
    y = _positive_root(*_QUADRATICS[which])
    r1, r2, r3 = 1.0, y * y, y
    r4 = 2.0 - 3.0 * y * y if which == 1 else 5.0 - 6.0 * y * y
    prices = (0.0, 1.0 - r2, 1.0 + r3, 1.0 + r4)

    x = [[0.0] * 4 for _ in range(4)]
    x[2][0], x[2][2] = r3 / (r1 + r3), r1 / (r1 + r3)
    x[3][1], x[3][2] = r3 / (r2 + r3), r2 / (r2 + r3)
    if which == 1:
        x[1][0], x[1][3] = r4 / (r1 + r4), r1 / (r1 + r4)
        x[0][3] = 1.0 - x[1][3]
        x[0][1] = 1.0 - x[3][1]
        x[0][0] = 1.0 - x[0][1] - x[0][3]
    else:
        x[0][1], x[0][3] = r4 / (r2 + r4), r2 / (r2 + r4)
        x[1][3] = 1.0 - x[0][3]
        x[1][1] = 1.0 - x[0][1] - x[3][1]
        x[1][0] = 1.0 - x[1][1] - x[1][3]
    allocation = Allocation(tuple(tuple(row) for row in x))
    return ClosedFormEquilibrium(which, y, (r1, r2, r3, r4), prices, allocation)


def closed_form_point(which: Which) -> EquilibriumPoint:
    return closed_form_equilibrium(which).point


@dataclass(frozen=True)
class DisconnectednessWitness:
    distance: float
    midpoint: EquilibriumReport
    endpoints: tuple[EquilibriumReport, EquilibriumReport]


def disconnectedness_witness(tol: float = 1e-9, midpoint_tol: float = 1e-3) -> DisconnectednessWitness:
    """Distance between the two closed-form price vectors and the verdict halfway.

    The two points are far apart and their midpoint is no equilibrium, so
    the equilibrium set of the four-agent market is not convex.
    """

    inst = table1_instance()
    first, second = closed_form_equilibrium(1), closed_form_equilibrium(2)
    distance = max(abs(a - b) for a, b in zip(first.prices, second.prices))
    mid_prices = tuple((a + b) / 2 for a, b in zip(first.prices, second.prices))
    mid_shares = tuple(
        tuple((a + b) / 2 for a, b in zip(ra, rb))
        for ra, rb in zip(first.allocation.shares, second.allocation.shares)
    )
    midpoint = verify_equilibrium(
        inst, EquilibriumPoint(PriceVector(mid_prices), Allocation(mid_shares)), midpoint_tol
    )
    endpoints = (
        verify_equilibrium(inst, first.point, tol),
        verify_equilibrium(inst, second.point, tol),
    )
    if distance <= 0.1:
        raise InvariantViolation(f"equilibrium prices only {distance:.3g} apart")
    if midpoint.verdict:
        raise InvariantViolation("midpoint of the two equilibria passed verification")
    logger.info(
        "[examples] price distance %.6f; endpoint verdicts %s, %s",
        distance,
        endpoints[0].verdict,
        endpoints[1].verdict,
    )
    return DisconnectednessWitness(float(distance), midpoint, endpoints)

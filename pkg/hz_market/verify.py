"""Equilibrium checks.

A point is an equilibrium when every good is fully allocated, every agent
holds one unit, nobody overspends and every agent's bundle is optimal.
Failures are reported in an :class:`EquilibriumReport`, never raised.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, Optional

from .bundle import BestResponse, best_response, optimality_gap
from .constants import DEFAULT_TOL, EXAMPLE_ONE_PRICES, EXAMPLE_ONE_UTILITIES, EXAMPLE_TWO_PRICES
from .errors import DimensionError, InvariantViolation, PriceError
from .model import (
    Allocation,
    EquilibriumPoint,
    MarketInstance,
    PriceVector,
    Rat,
    Scalar,
    coerce,
    is_exact_scalar,
    parse_scalar,
    scale_prices,
)

__all__ = [
    "EquilibriumReport",
    "WGSReport",
    "verify_equilibrium",
    "check_scale_invariance",
    "is_fractional_perfect_matching",
    "demonstrate_wgs_violation",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EquilibriumReport:
    clearing_residuals: tuple[Scalar, ...]
    size_residuals: tuple[Scalar, ...]
    cost_overshoot: Scalar
    optimality_gaps: tuple[Scalar, ...]
    min_price: Scalar
    negative_share: Scalar
    tolerance: Scalar
    verdict: bool

    @property
    def max_residual(self) -> float:
        parts = [
            *self.clearing_residuals,
            *self.size_residuals,
            self.cost_overshoot,
            *self.optimality_gaps,
            self.negative_share,
            max(-self.min_price, 0),
        ]
        return float(max(parts))

    def as_dict(self) -> dict[str, Any]:
        return {
            "verdict": self.verdict,
            "tolerance": float(self.tolerance),
            "max_residual": self.max_residual,
            "clearing_residuals": [float(v) for v in self.clearing_residuals],
            "size_residuals": [float(v) for v in self.size_residuals],
            "cost_overshoot": float(self.cost_overshoot),
            "optimality_gaps": [float(v) for v in self.optimality_gaps],
            "min_price": float(self.min_price),
            "negative_share": float(self.negative_share),
        }


@dataclass(frozen=True)
class WGSReport:
    before: BestResponse
    after: BestResponse
    raised_good: int
    watched_good: int

    @property
    def demand_drop(self) -> Scalar:
        return self.before.bundle[self.watched_good] - self.after.bundle[self.watched_good]


def verify_equilibrium(
    inst: MarketInstance, point: EquilibriumPoint, tol: Optional[float] = None
) -> EquilibriumReport:
    """Check all equilibrium conditions; exact points default to zero tolerance."""

    n = inst.n
    if point.n != n:
        raise DimensionError(f"instance has {n} agents but the point has {point.n} goods")
    exact = inst.exact and point.exact
    if tol is None:
        eps: Scalar = Rat(0) if exact else DEFAULT_TOL
    else:
        eps = Rat(0) if exact and tol == 0 else tol
    zero = coerce(0, exact)
    x = [[coerce(v, exact) for v in row] for row in point.allocation.shares]
    p = [coerce(v, exact) for v in point.prices.prices]
    u = [[coerce(v, exact) for v in row] for row in inst.utilities]

    clearing = tuple(abs(sum((x[i][j] for i in range(n)), zero) - 1) for j in range(n))
    sizes = tuple(abs(sum(row, zero) - 1) for row in x)
    overshoot = max(
        [sum((a * b for a, b in zip(row, p)), zero) - 1 for row in x] + [zero]
    )
    gaps: list[Scalar] = []
    for i in range(n):
        try:
            gaps.append(optimality_gap(u[i], p, x[i], tol=None if tol is None else float(tol)))
        except PriceError:
            gaps.append(math.inf)
    min_price = min(p)
    negative = max([-v for row in x for v in row] + [zero])

    verdict = (
        all(r <= eps for r in clearing)
        and all(r <= eps for r in sizes)
        and overshoot <= eps
        and all(gp <= eps for gp in gaps)
        and min_price >= -eps
        and negative <= eps
    )
    report = EquilibriumReport(
        clearing, sizes, overshoot, tuple(gaps), min_price, negative, eps, bool(verdict)
    )
    logger.info("[verify] verdict=%s max residual=%.3g tol=%s", report.verdict, report.max_residual, eps)
    return report


def check_scale_invariance(
    inst: MarketInstance, point: EquilibriumPoint, r: Scalar, tol: Optional[float] = None
) -> bool:
    """Verdict for the same allocation at prices ``r * (p - 1) + 1``."""

    scaled = EquilibriumPoint(scale_prices(point.prices, r), point.allocation)
    return verify_equilibrium(inst, scaled, tol).verdict


def is_fractional_perfect_matching(x: Allocation, tol: Optional[float] = None) -> bool:
    """Nonnegative square matrix whose rows and columns all sum to one."""

    n = x.n
    if len(x.shares[0]) != n:
        return False
    eps = 0 if x.exact and not tol else (DEFAULT_TOL if tol is None else tol)
    rows_ok = all(abs(sum(row) - 1) <= eps for row in x.shares)
    cols_ok = all(abs(c - 1) <= eps for c in x.column_sums())
    return rows_ok and cols_ok and all(v >= -eps for row in x.shares for v in row)


def demonstrate_wgs_violation() -> WGSReport:
    """Raising the cheap good's price lowers demand for the expensive one.

    At prices (2, 1/10) the agent buys 9/19 of the expensive good; at
    (2, 1/5) only 4/9, although its own price did not move.
    """

    u = [parse_scalar(v) for v in EXAMPLE_ONE_UTILITIES]
    before = best_response(u, PriceVector.of(EXAMPLE_ONE_PRICES))
    after = best_response(u, PriceVector.of(EXAMPLE_TWO_PRICES))
    report = WGSReport(before, after, raised_good=1, watched_good=0)
    if not (is_exact_scalar(report.demand_drop) and report.demand_drop > 0):
        raise InvariantViolation("raising a substitute's price did not lower demand")
    logger.info(
        "[verify] demand for good 0 fell from %s to %s",
        before.bundle[0],
        after.bundle[0],
    )
    return report

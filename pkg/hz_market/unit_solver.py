"""Exact equilibria for 0/1 and bivalued utilities."""
from __future__ import annotations

import logging
from dataclasses import dataclass

from .bipartite import CoverDecomposition, maximum_matching, minimum_vertex_cover, unit_graph
from .dpsv import FreezeRecord, simplified_dpsv
from .errors import InvariantViolation, UtilityShapeError
from .model import Allocation, EquilibriumPoint, MarketInstance, PriceVector, Rat

__all__ = ["UnitSolution", "unit_solution", "solve_unit", "bivalued_to_unit", "solve_bivalued"]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class UnitSolution:
    point: EquilibriumPoint
    matching: dict[int, int]
    decomposition: CoverDecomposition | None
    freezes: tuple[FreezeRecord, ...]

    @property
    def perfect(self) -> bool:
        return self.decomposition is None


def unit_solution(inst: MarketInstance) -> UnitSolution:
    """Solve a 0/1 market and keep the intermediate structure."""

    g = unit_graph(inst)
    n = inst.n
    zero = Rat(0)
    matching = maximum_matching(g)
    x = [[zero] * n for _ in range(n)]

    if len(matching) == n:
        for i, j in matching.items():
            x[i][j] = Rat(1)
        logger.info("[unit-solver] perfect matching of size %d; all prices 0", n)
        point = EquilibriumPoint(PriceVector((zero,) * n), Allocation(tuple(map(tuple, x))))
        return UnitSolution(point, matching, None, ())

    cover = minimum_vertex_cover(g)
    a1, a2, g1, g2 = cover.agents_free, cover.agents_cover, cover.goods_cover, cover.goods_free
    logger.info(
        "[unit-solver] matching %d < %d; cover goods=%d agents=%d", len(matching), n, len(g1), len(a2)
    )
    if len(a1) - len(g1) != len(g2) - len(a2):
        raise InvariantViolation("free agents and free goods do not balance")
    if not g2:
        raise InvariantViolation("no zero-priced goods although no perfect matching exists")

    nu = maximum_matching(g.restrict(a2, g2))
    if set(nu) != set(a2):
        raise InvariantViolation("cover agents are not all matched to free goods")
    prices = [zero] * n
    for i, j in nu.items():
        x[i][j] = Rat(1)

    result = simplified_dpsv(g, a1, g1)
    for j, price in result.prices.items():
        prices[j] = price
    for (i, j), share in result.shares.items():
        x[i][j] = share
    if len(result.freezes) > n:
        raise InvariantViolation(f"{len(result.freezes)} freezes exceed {n} goods")

    # Zero-priced leftovers top up the free agents in index order.
    leftovers = [j for j in sorted(g2) if j not in set(nu.values())]
    supply = {j: Rat(1) for j in leftovers}
    pos = 0
    for i in sorted(a1):
        need = 1 - sum(x[i])
        while need > 0:
            if pos >= len(leftovers):
                raise InvariantViolation(f"free goods run out before agent {i} is filled")
            j = leftovers[pos]
            take = min(need, supply[j])
            x[i][j] += take
            supply[j] -= take
            need -= take
            if supply[j] == 0:
                pos += 1
    if any(v != 0 for v in supply.values()):
        raise InvariantViolation("free goods left over after every agent is filled")

    point = EquilibriumPoint(PriceVector(tuple(prices)), Allocation(tuple(map(tuple, x))))
    return UnitSolution(point, matching, cover, result.freezes)


def solve_unit(inst: MarketInstance) -> EquilibriumPoint:
    return unit_solution(inst).point


def bivalued_to_unit(inst: MarketInstance) -> MarketInstance:
    """Map each row's two values ``a < b`` to 0 and 1; constant rows become 0."""

    rows = []
    for i, row in enumerate(inst.utilities):
        values = sorted(set(row))
        if len(values) > 2:
            raise UtilityShapeError(
                f"agent {i} has {len(values)} distinct utilities; at most two are supported"
            )
        top = values[-1] if len(values) == 2 else None
        rows.append(tuple(Rat(1) if v == top else Rat(0) for v in row))
    return MarketInstance(tuple(rows))


def solve_bivalued(inst: MarketInstance) -> EquilibriumPoint:
    """Equilibrium of a market whose rows each take at most two values.

    Shifting a row by its low value and scaling by the gap leaves every
    agent's optimal bundles unchanged, so the unit solution is returned as is.
    """

    return solve_unit(bivalued_to_unit(inst))

"""Uniform price raising on the tight part of a unit market.

Every active good starts at price 1 and all active prices rise together.
A set of goods freezes when its price times its size reaches the number of
still-unserved agents who want it; the agents in its neighbourhood then
spend their whole budget on it.
"""
from __future__ import annotations

import logging
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from math import gcd
from typing import Iterable

from .bipartite import BipartiteGraph
from .errors import InvariantViolation
from .flownet import FlowNetwork
from .model import Rat

__all__ = ["FreezeRecord", "DPSVResult", "candidate_ratios", "min_ratio_tight_set", "simplified_dpsv"]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FreezeRecord:
    goods: frozenset[int]
    price: Rat
    agents: frozenset[int]
    money: dict[tuple[int, int], Rat] = field(default_factory=dict)


@dataclass(frozen=True)
class DPSVResult:
    prices: dict[int, Rat]
    money: dict[tuple[int, int], Rat]
    shares: dict[tuple[int, int], Rat]
    freezes: tuple[FreezeRecord, ...]


def candidate_ratios(max_num: int, max_den: int) -> list[tuple[int, int]]:
    """Reduced fractions ``a/b`` with ``1 <= a <= max_num``, ``1 <= b <= max_den``, ascending."""

    pairs = {
        (a // gcd(a, b), b // gcd(a, b))
        for a in range(1, max_num + 1)
        for b in range(1, max_den + 1)
    }
    # Distinct fractions with bounded denominators differ by at least
    # 1/(max_den**2), far above float resolution.
    return sorted(pairs, key=lambda ab: ab[0] / ab[1])


def _tight_goods(
    g: BipartiteGraph, active: frozenset[int], remaining: frozenset[int], a: int, b: int
) -> frozenset[int]:
    """Largest goods set S maximising ``(a/b)|S| - |N(S)|``, from one max flow."""

    net = FlowNetwork()
    for j in sorted(active):
        net.add_arc("s", ("g", j), a)
        for i in g.good_adj[j]:
            if i in remaining:
                net.add_arc(("g", j), ("a", i), None)
    for i in sorted(remaining):
        net.add_arc(("a", i), "t", b)
    net.max_flow()
    side = net.min_cut_source_side(maximal=True)
    return frozenset(node[1] for node in side if isinstance(node, tuple) and node[0] == "g")


def min_ratio_tight_set(
    g: BipartiteGraph,
    active: Iterable[int],
    remaining: Iterable[int],
    *,
    candidates: list[tuple[int, int]] | None = None,
    floor: Rat | None = None,
) -> tuple[Rat, frozenset[int]]:
    """Minimum of ``|N(S) ∩ remaining| / |S|`` over non-empty ``S ⊆ active``.

    Returns the ratio and the largest set attaining it.  The search is a
    binary search over candidate fractions; at ratio ``r`` the largest
    maximiser of ``r|S| - |N(S)|`` is non-empty exactly when ``r`` is at
    least the minimum.  ``floor`` excludes candidates at or below a known
    strict lower bound.
    """

    act = frozenset(active)
    rem = frozenset(remaining)
    if not act:
        raise InvariantViolation("no active goods left to freeze")
    for j in act:
        if not any(i in rem for i in g.good_adj[j]):
            raise InvariantViolation(f"active good {j} has no remaining buyer")
    if candidates is None:
        candidates = candidate_ratios(len(rem), len(act))
    keys = [a / b for a, b in candidates]
    full = len(g.agents_of(act) & rem)
    eps = 0.25 / max(b for _, b in candidates) ** 2
    lo = 0 if floor is None else bisect_right(keys, float(floor) + eps)
    hi = bisect_left(keys, full / len(act) + eps) - 1
    if hi < lo or abs(keys[hi] - full / len(act)) > eps:
        raise InvariantViolation(f"ratio {full}/{len(act)} is not among the candidates")

    # Invariant: candidate ``hi`` is feasible, every candidate below ``lo`` is not.
    while lo < hi:
        mid = (lo + hi) // 2
        a, b = candidates[mid]
        if _tight_goods(g, act, rem, a, b):
            hi = mid
        else:
            lo = mid + 1
    a, b = candidates[lo]
    ratio = Rat(a, b)
    tight = _tight_goods(g, act, rem, a, b)
    if not tight or Rat(len(g.agents_of(tight) & rem), len(tight)) != ratio:
        raise InvariantViolation(f"ratio search ended on {ratio} without a tight set")
    return ratio, tight


def _spend(
    g: BipartiteGraph, goods: frozenset[int], agents: frozenset[int], price: Rat
) -> dict[tuple[int, int], Rat]:
    """Route every agent's unit budget onto ``goods`` so each earns ``price``."""

    a, b = price.p, price.q
    net = FlowNetwork()
    for i in sorted(agents):
        net.add_arc("s", ("a", i), b)
        for j in g.agent_adj[i]:
            if j in goods:
                net.add_arc(("a", i), ("g", j), None)
    for j in sorted(goods):
        net.add_arc(("g", j), "t", a)
    result = net.max_flow()
    if result.value != b * len(agents) or result.value != a * len(goods):
        raise InvariantViolation(f"money of {sorted(agents)} cannot clear goods {sorted(goods)}")
    money: dict[tuple[int, int], Rat] = {}
    for (u, v), f in result.flows.items():
        if f and u != "s" and v != "t":
            money[(u[1], v[1])] = Rat(f, b)
    return money


def simplified_dpsv(g: BipartiteGraph, agents: Iterable[int], goods: Iterable[int]) -> DPSVResult:
    """Freeze the goods of ``goods`` in rounds, serving the agents of ``agents``.

    Requires every good to have a buyer and every goods subset to have at
    least as many buyers as members, so the first freeze happens at price 1
    or above.
    """

    active = frozenset(goods)
    remaining = frozenset(agents)
    prices: dict[int, Rat] = {}
    money: dict[tuple[int, int], Rat] = {}
    freezes: list[FreezeRecord] = []
    if not active:
        return DPSVResult({}, {}, {}, ())
    candidates = candidate_ratios(len(remaining), len(active))
    floor: Rat | None = None
    while active:
        ratio, tight = min_ratio_tight_set(g, active, remaining, candidates=candidates, floor=floor)
        if floor is None and ratio < 1:
            raise InvariantViolation(f"first freeze at {ratio} is below 1")
        if floor is not None and ratio <= floor:
            raise InvariantViolation(f"freeze prices must rise, got {ratio} after {floor}")
        served = g.agents_of(tight) & remaining
        spent = _spend(g, tight, served, ratio)
        for i in served:
            if any(j in prices for j in g.agent_adj[i]):
                raise InvariantViolation(f"agent {i} wants a good frozen in an earlier round")
        for j in tight:
            prices[j] = ratio
        money.update(spent)
        freezes.append(FreezeRecord(tight, ratio, served, spent))
        logger.info(
            "[dpsv] froze %d goods at price %s serving %d agents", len(tight), ratio, len(served)
        )
        active -= tight
        remaining -= served
        floor = ratio
    shares = {(i, j): m / prices[j] for (i, j), m in money.items()}
    return DPSVResult(prices, money, shares, tuple(freezes))

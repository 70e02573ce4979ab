"""Agent/good bipartite graphs, maximum matchings and minimum vertex covers."""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple

from .errors import GraphError, InvariantViolation, UtilityShapeError
from .model import MarketInstance

__all__ = [
    "Side",
    "Vertex",
    "BipartiteGraph",
    "CoverDecomposition",
    "unit_graph",
    "neighborhood",
    "maximum_matching",
    "minimum_vertex_cover",
]

logger = logging.getLogger(__name__)

_UNREACHED = 1 << 62


class Side(str, Enum):
    AGENT = "agent"
    GOOD = "good"


class Vertex(NamedTuple):
    side: Side
    index: int


@dataclass(frozen=True)
class BipartiteGraph:
    """Edges ``(agent, good)`` over ``n_agents`` agents and ``n_goods`` goods."""

    n_agents: int
    n_goods: int
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        object.__setattr__(self, "edges", frozenset(self.edges))
        for a, g in self.edges:
            if not (0 <= a < self.n_agents and 0 <= g < self.n_goods):
                raise GraphError(
                    f"edge ({a}, {g}) outside {self.n_agents} agents x {self.n_goods} goods"
                )

    @cached_property
    def agent_adj(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n_agents)]
        for a, g in self.edges:
            adj[a].append(g)
        return tuple(tuple(sorted(row)) for row in adj)

    @cached_property
    def good_adj(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n_goods)]
        for a, g in self.edges:
            adj[g].append(a)
        return tuple(tuple(sorted(row)) for row in adj)

    def restrict(self, agents: Iterable[int], goods: Iterable[int]) -> "BipartiteGraph":
        """Induced subgraph on the given vertices, keeping the index space."""

        keep_a, keep_g = set(agents), set(goods)
        return BipartiteGraph(
            self.n_agents,
            self.n_goods,
            frozenset((a, g) for a, g in self.edges if a in keep_a and g in keep_g),
        )

    def goods_of(self, agents: Iterable[int]) -> frozenset[int]:
        return frozenset(g for a in agents for g in self.agent_adj[a])

    def agents_of(self, goods: Iterable[int]) -> frozenset[int]:
        return frozenset(a for g in goods for a in self.good_adj[g])


@dataclass(frozen=True)
class CoverDecomposition:
    """Split of agents and goods induced by a minimum vertex cover.

    The cover is ``goods_cover`` (G1) together with ``agents_cover`` (A2);
    ``matching`` pairs every A2 agent with a G2 good.
    """

    goods_cover: frozenset[int]
    agents_cover: frozenset[int]
    agents_free: frozenset[int]
    goods_free: frozenset[int]
    matching: Mapping[int, int]

    @property
    def size(self) -> int:
        return len(self.goods_cover) + len(self.agents_cover)


def unit_graph(inst: MarketInstance) -> BipartiteGraph:
    """Edge ``(i, j)`` exactly when agent ``i`` values good ``j`` at 1."""

    edges = set()
    for i, row in enumerate(inst.utilities):
        for j, u in enumerate(row):
            if u == 1:
                edges.add((i, j))
            elif u != 0:
                raise UtilityShapeError(
                    f"unit market expects utilities in {{0, 1}}; agent {i} values good {j} at {u}"
                )
    return BipartiteGraph(inst.n, inst.n, frozenset(edges))


def neighborhood(g: BipartiteGraph, vertices: Iterable[Vertex]) -> frozenset[Vertex]:
    """All vertices adjacent to some member of a one-sided vertex set."""

    verts = list(vertices)
    sides = {v.side for v in verts}
    if len(sides) > 1:
        raise GraphError("neighbourhood needs vertices from a single side")
    if not verts:
        return frozenset()
    if Side.AGENT in sides:
        return frozenset(Vertex(Side.GOOD, j) for j in g.goods_of(v.index for v in verts))
    return frozenset(Vertex(Side.AGENT, a) for a in g.agents_of(v.index for v in verts))


class _HopcroftKarp:
    """Layered augmenting-path matcher over integer vertex ids."""

    def __init__(self, adj: tuple[tuple[int, ...], ...], left: Iterable[int]) -> None:
        self._adj = adj
        self._left = sorted(left)
        self._pair_left: dict[int, int] = {}
        self._pair_right: dict[int, int] = {}
        self._dist: dict[int, int] = {}
        self._limit = _UNREACHED

    def run(self) -> dict[int, int]:
        while self._bfs():
            for a in self._left:
                if a not in self._pair_left:
                    self._dfs(a)
        return dict(sorted(self._pair_left.items()))

    def _bfs(self) -> bool:
        queue: deque[int] = deque()
        for a in self._left:
            if a not in self._pair_left:
                self._dist[a] = 0
                queue.append(a)
            else:
                self._dist[a] = _UNREACHED
        self._limit = _UNREACHED
        while queue:
            a = queue.popleft()
            if self._dist[a] >= self._limit:
                continue
            for g in self._adj[a]:
                mate = self._pair_right.get(g)
                if mate is None:
                    if self._limit == _UNREACHED:
                        self._limit = self._dist[a] + 1
                elif self._dist[mate] == _UNREACHED:
                    self._dist[mate] = self._dist[a] + 1
                    queue.append(mate)
        return self._limit < _UNREACHED

    def _dfs(self, a: int) -> bool:
        for g in self._adj[a]:
            mate = self._pair_right.get(g)
            if mate is None:
                if self._limit == self._dist[a] + 1:
                    self._pair_left[a], self._pair_right[g] = g, a
                    return True
            elif self._dist[mate] == self._dist[a] + 1 and self._dfs(mate):
                self._pair_left[a], self._pair_right[g] = g, a
                return True
        self._dist[a] = _UNREACHED
        return False


def maximum_matching(g: BipartiteGraph) -> dict[int, int]:
    """Maximum matching as ``{agent: good}``; deterministic for a given graph."""

    agents = [a for a in range(g.n_agents) if g.agent_adj[a]]
    return _HopcroftKarp(g.agent_adj, agents).run()


def minimum_vertex_cover(g: BipartiteGraph) -> CoverDecomposition:
    """König cover from alternating reachability out of unmatched agents.

    Reached agents form A1 and reached goods form G1; the rest are A2 and G2.
    Every G1 good is matched into A1 and every A2 agent into G2, which is the
    Hall condition on both halves of the cover.
    """

    matching = maximum_matching(g)
    mate_of_good = {good: a for a, good in matching.items()}
    reached_agents = {a for a in range(g.n_agents) if a not in matching}
    reached_goods: set[int] = set()
    queue = deque(sorted(reached_agents))
    while queue:
        a = queue.popleft()
        for good in g.agent_adj[a]:
            if good in reached_goods or matching.get(a) == good:
                continue
            reached_goods.add(good)
            mate = mate_of_good.get(good)
            if mate is not None and mate not in reached_agents:
                reached_agents.add(mate)
                queue.append(mate)

    agents_free = frozenset(reached_agents)
    goods_cover = frozenset(reached_goods)
    agents_cover = frozenset(range(g.n_agents)) - agents_free
    goods_free = frozenset(range(g.n_goods)) - goods_cover
    nu = {a: matching[a] for a in sorted(agents_cover) if a in matching}

    for good in goods_cover:
        mate = mate_of_good.get(good)
        if mate is None or mate not in agents_free:
            raise InvariantViolation(f"cover good {good} is not matched into the free agents")
    if len(nu) != len(agents_cover) or any(v not in goods_free for v in nu.values()):
        raise InvariantViolation("cover agents are not matched into the free goods")
    if len(goods_cover) + len(agents_cover) != len(matching):
        raise InvariantViolation("cover size differs from matching size")
    for a, good in g.edges:
        if good not in goods_cover and a not in agents_cover:
            raise InvariantViolation(f"edge ({a}, {good}) is not covered")

    logger.debug(
        "[bipartite] matching=%d cover goods=%d cover agents=%d",
        len(matching),
        len(goods_cover),
        len(agents_cover),
    )
    return CoverDecomposition(goods_cover, agents_cover, agents_free, goods_free, nu)

"""Exact maximum flow by shortest augmenting paths.

Capacities may be ``int`` or :class:`sympy.Rational`; arithmetic never leaves
the number type it was given.  ``None`` marks an uncapacitated arc.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from typing import Hashable, Optional

from .errors import GraphError, InvariantViolation
from .model import Scalar

__all__ = ["Arc", "FlowNetwork", "FlowResult", "max_flow", "min_cut_source_side", "cut_capacity"]

logger = logging.getLogger(__name__)

Node = Hashable


@dataclass
class Arc:
    src: Node
    dst: Node
    capacity: Optional[Scalar]
    flow: Scalar = 0
    rev: int = -1
    residual: bool = False


@dataclass(frozen=True)
class FlowResult:
    value: Scalar
    flows: dict[tuple[Node, Node], Scalar]


class FlowNetwork:
    """Directed network with a designated source and sink.

    Arcs into the source or out of the sink are rejected.  One solve owns the
    network; flows are stored on the arcs for cut extraction afterwards.
    """

    def __init__(self, source: Node = "s", sink: Node = "t") -> None:
        if source == sink:
            raise GraphError("source and sink must differ")
        self.source = source
        self.sink = sink
        self._arcs: list[Arc] = []
        self._out: dict[Node, list[int]] = {source: [], sink: []}
        self._solved: FlowResult | None = None

    @property
    def nodes(self) -> list[Node]:
        return list(self._out)

    def add_node(self, node: Node) -> None:
        self._out.setdefault(node, [])

    def add_arc(self, u: Node, v: Node, capacity: Optional[Scalar]) -> None:
        if u == v:
            raise GraphError(f"self-loop on {u!r}")
        if v == self.source or u == self.sink:
            raise GraphError(f"arc {u!r}->{v!r} enters the source or leaves the sink")
        if capacity is not None and capacity < 0:
            raise GraphError(f"arc {u!r}->{v!r} has negative capacity {capacity}")
        self.add_node(u)
        self.add_node(v)
        fwd = Arc(u, v, capacity, rev=len(self._arcs) + 1)
        back = Arc(v, u, 0, rev=len(self._arcs), residual=True)
        self._out[u].append(len(self._arcs))
        self._arcs.append(fwd)
        self._out[v].append(len(self._arcs))
        self._arcs.append(back)
        self._solved = None

    def arcs(self) -> list[Arc]:
        return [a for a in self._arcs if not a.residual]

    def _residual(self, arc: Arc, infinite: Scalar) -> Scalar:
        if arc.residual:
            return self._arcs[arc.rev].flow
        cap = infinite if arc.capacity is None else arc.capacity
        return cap - arc.flow

    def max_flow(self) -> FlowResult:
        for arc in self._arcs:
            arc.flow = 0
        finite = [a.capacity for a in self._arcs if not a.residual and a.capacity is not None]
        # Larger than any cut made of finite arcs.
        infinite = sum(finite, 0) + 1
        value: Scalar = 0
        augmentations = 0
        while True:
            parent = self._shortest_path(infinite)
            if parent is None:
                break
            path: list[int] = []
            node = self.sink
            while node != self.source:
                idx = parent[node]
                path.append(idx)
                node = self._arcs[idx].src
            delta = min(self._residual(self._arcs[i], infinite) for i in path)
            for i in path:
                arc = self._arcs[i]
                if arc.residual:
                    self._arcs[arc.rev].flow -= delta
                else:
                    arc.flow += delta
            value += delta
            augmentations += 1
        self._check_conservation()
        flows = {(a.src, a.dst): a.flow for a in self.arcs()}
        self._solved = FlowResult(value, flows)
        logger.debug("[flownet] value=%s after %d augmentations", value, augmentations)
        return self._solved

    def _shortest_path(self, infinite: Scalar) -> dict[Node, int] | None:
        parent: dict[Node, int] = {}
        seen = {self.source}
        queue: deque[Node] = deque([self.source])
        while queue:
            u = queue.popleft()
            for idx in self._out[u]:
                arc = self._arcs[idx]
                if arc.dst in seen or self._residual(arc, infinite) <= 0:
                    continue
                seen.add(arc.dst)
                parent[arc.dst] = idx
                if arc.dst == self.sink:
                    return parent
                queue.append(arc.dst)
        return None

    def _check_conservation(self) -> None:
        balance: dict[Node, Scalar] = {node: 0 for node in self._out}
        for arc in self.arcs():
            if arc.flow < 0 or (arc.capacity is not None and arc.flow > arc.capacity):
                raise InvariantViolation(f"flow {arc.flow} on {arc.src!r}->{arc.dst!r} is infeasible")
            balance[arc.src] -= arc.flow
            balance[arc.dst] += arc.flow
        for node, b in balance.items():
            if node not in (self.source, self.sink) and b != 0:
                raise InvariantViolation(f"flow is not conserved at {node!r}")

    def _reach(self, start: Node, forward: bool) -> set[Node]:
        infinite = sum((a.capacity for a in self.arcs() if a.capacity is not None), 0) + 1
        seen = {start}
        queue: deque[Node] = deque([start])
        incoming: dict[Node, list[int]] = {}
        if not forward:
            for idx, arc in enumerate(self._arcs):
                incoming.setdefault(arc.dst, []).append(idx)
        while queue:
            u = queue.popleft()
            if forward:
                steps = [(self._arcs[i], self._arcs[i].dst) for i in self._out[u]]
            else:
                steps = [(self._arcs[i], self._arcs[i].src) for i in incoming.get(u, [])]
            for arc, nxt in steps:
                if nxt not in seen and self._residual(arc, infinite) > 0:
                    seen.add(nxt)
                    queue.append(nxt)
        return seen

    def min_cut_source_side(self, *, maximal: bool = False) -> frozenset[Node]:
        """Source side of a minimum cut, read from the residual graph.

        The default is the smallest such side (nodes reachable from the
        source); ``maximal=True`` returns the largest (nodes that cannot reach
        the sink).
        """

        if self._solved is None:
            raise GraphError("max_flow must run before a cut can be read")
        if maximal:
            return frozenset(self._out) - frozenset(self._reach(self.sink, forward=False))
        return frozenset(self._reach(self.source, forward=True))


def max_flow(net: FlowNetwork) -> FlowResult:
    return net.max_flow()


def min_cut_source_side(net: FlowNetwork, *, maximal: bool = False) -> frozenset[Node]:
    return net.min_cut_source_side(maximal=maximal)


def cut_capacity(net: FlowNetwork, side: frozenset[Node]) -> Optional[Scalar]:
    """Capacity of the arcs leaving ``side``; ``None`` if one is uncapacitated."""

    total: Scalar = 0
    for arc in net.arcs():
        if arc.src in side and arc.dst not in side:
            if arc.capacity is None:
                return None
            total += arc.capacity
    return total

from __future__ import annotations

from itertools import combinations

import numpy as np
import pytest

from hz_market.errors import GraphError
from hz_market.flownet import FlowNetwork, cut_capacity, max_flow, min_cut_source_side
from hz_market.model import Rat

nx = pytest.importorskip("networkx")


def _random_network(k: int, rng: np.random.Generator) -> tuple[FlowNetwork, dict[tuple[str, str], int]]:
    inner = [f"v{i}" for i in range(k)]
    caps: dict[tuple[str, str], int] = {}
    for u in ["s"] + inner:
        for v in inner + ["t"]:
            if u != v and rng.random() < 0.45:
                caps[(u, v)] = int(rng.integers(0, 6))
    net = FlowNetwork()
    for node in inner:
        net.add_node(node)
    for (u, v), c in caps.items():
        net.add_arc(u, v, c)
    return net, caps


def _brute_force_min_cut(net: FlowNetwork) -> int:
    inner = [v for v in net.nodes if v not in ("s", "t")]
    best = None
    for k in range(len(inner) + 1):
        for chosen in combinations(inner, k):
            cap = cut_capacity(net, frozenset({"s", *chosen}))
            assert cap is not None
            best = cap if best is None else min(best, cap)
    assert best is not None
    return int(best)


def test_small_network_value() -> None:
    net = FlowNetwork()
    net.add_arc("s", "a", 3)
    net.add_arc("s", "b", 2)
    net.add_arc("a", "b", 1)
    net.add_arc("a", "t", 2)
    net.add_arc("b", "t", 3)
    result = max_flow(net)
    assert result.value == 5
    assert result.flows[("b", "t")] == 3


def test_rational_capacities_stay_exact() -> None:
    net = FlowNetwork()
    net.add_arc("s", "a", Rat(1, 3))
    net.add_arc("a", "t", Rat(1, 2))
    net.add_arc("s", "t", Rat(1, 6))
    value = max_flow(net).value
    assert value == Rat(1, 2)
    assert isinstance(value, Rat)


def test_uncapacitated_arcs() -> None:
    net = FlowNetwork()
    net.add_arc("s", "a", 2)
    net.add_arc("a", "b", None)
    net.add_arc("b", "t", 3)
    assert max_flow(net).value == 2


def test_smallest_and_largest_minimum_cut() -> None:
    net = FlowNetwork()
    net.add_arc("s", "a", 1)
    net.add_arc("a", "t", 1)
    max_flow(net)
    small = min_cut_source_side(net)
    large = min_cut_source_side(net, maximal=True)
    assert small == frozenset({"s"})
    assert large == frozenset({"s", "a"})
    assert cut_capacity(net, small) == cut_capacity(net, large) == 1


def test_invalid_arcs_and_order() -> None:
    net = FlowNetwork()
    with pytest.raises(GraphError):
        net.add_arc("a", "s", 1)
    with pytest.raises(GraphError):
        net.add_arc("t", "a", 1)
    with pytest.raises(GraphError):
        net.add_arc("a", "a", 1)
    with pytest.raises(GraphError):
        net.add_arc("s", "a", -1)
    net.add_arc("s", "t", 1)
    with pytest.raises(GraphError):
        min_cut_source_side(net)
    with pytest.raises(GraphError):
        FlowNetwork("x", "x")


def test_random_networks_against_oracles() -> None:
    rng = np.random.default_rng(21)
    for _ in range(40):
        k = int(rng.integers(0, 5))
        net, caps = _random_network(k, rng)
        value = max_flow(net).value

        h = nx.DiGraph()
        h.add_nodes_from(["s", "t"])
        for (u, v), c in caps.items():
            h.add_edge(u, v, capacity=c)
        assert value == nx.maximum_flow_value(h, "s", "t")
        assert value == _brute_force_min_cut(net)

        side = min_cut_source_side(net)
        assert "s" in side and "t" not in side
        assert cut_capacity(net, side) == value
        assert cut_capacity(net, min_cut_source_side(net, maximal=True)) == value

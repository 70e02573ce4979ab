from __future__ import annotations

import time

import numpy as np
import pytest

from hz_market.bundle import BundleType, certificate_for, classify_bundle
from hz_market.errors import UtilityShapeError
from hz_market.model import MarketInstance, Rat, is_exact, random_bivalued_instance, random_unit_instance
from hz_market.unit_solver import bivalued_to_unit, solve_bivalued, solve_unit, unit_solution
from hz_market.verify import is_fractional_perfect_matching, verify_equilibrium


def test_identity_market_has_zero_prices() -> None:
    inst = MarketInstance.from_rows([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    sol = unit_solution(inst)
    assert sol.perfect
    assert sol.point.prices.prices == (0, 0, 0)
    assert sol.point.allocation.shares == ((1, 0, 0), (0, 1, 0), (0, 0, 1))


def test_two_agents_competing_for_one_good() -> None:
    inst = MarketInstance.from_rows([[1, 0], [1, 0]])
    point = solve_unit(inst)
    half = Rat(1, 2)
    assert point.prices.prices == (2, 0)
    assert point.allocation.shares == ((half, half), (half, half))
    assert verify_equilibrium(inst, point, 0).verdict


def test_random_unit_markets_are_exact_equilibria() -> None:
    rng = np.random.default_rng(41)
    imperfect = 0
    for _ in range(100):
        n = int(rng.integers(1, 7))
        inst = random_unit_instance(n, rng, density=float(rng.uniform(0.15, 0.5)))
        sol = unit_solution(inst)
        point = sol.point
        assert is_exact(point)
        report = verify_equilibrium(inst, point, 0)
        assert report.verdict, report
        assert is_fractional_perfect_matching(point.allocation, 0)
        assert min(point.prices.prices) == 0
        if not sol.perfect:
            imperfect += 1
            cover = sol.decomposition
            assert cover is not None
            assert len(cover.agents_free) - len(cover.goods_cover) == len(cover.goods_free) - len(
                cover.agents_cover
            )
            assert all(point.prices[j] == 0 for j in cover.goods_free)
            assert all(point.prices[j] >= 1 for j in cover.goods_cover)
    assert imperfect > 0


def test_free_agents_hold_mixed_bundles() -> None:
    # Three agents want good 0; goods 1 and 2 are unwanted.
    inst = MarketInstance.from_rows([[1, 0, 0], [1, 0, 0], [1, 0, 0]])
    point = solve_unit(inst)
    assert point.prices.prices == (3, 0, 0)
    for i in range(3):
        row = point.allocation.row(i)
        assert row[0] == Rat(1, 3)
        assert classify_bundle(inst.row(i), point.prices, row) == BundleType.D


def test_larger_sparse_market() -> None:
    rng = np.random.default_rng(42)
    n = 30
    rows = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in rng.choice(n // 2, size=2, replace=False):
            rows[i][int(j)] = 1
    inst = MarketInstance.from_rows(rows)
    point = solve_unit(inst)
    assert verify_equilibrium(inst, point, 0).verdict
    assert is_fractional_perfect_matching(point.allocation, 0)


def test_two_hundred_agents_solve_quickly() -> None:
    rng = np.random.default_rng(42)
    n = 200
    rows = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in rng.choice(n // 2, size=2, replace=False):
            rows[i][int(j)] = 1
    inst = MarketInstance.from_rows(rows)
    start = time.perf_counter()
    sol = unit_solution(inst)
    assert time.perf_counter() - start < 10.0
    assert not sol.perfect
    assert len(sol.freezes) <= n
    assert verify_equilibrium(inst, sol.point, 0).verdict


def test_agents_holding_a_free_worthless_good_have_zero_offset() -> None:
    rng = np.random.default_rng(43)
    checked = 0
    for _ in range(60):
        inst = random_unit_instance(int(rng.integers(2, 7)), rng, density=0.3)
        point = solve_unit(inst)
        for i in range(inst.n):
            row = point.allocation.row(i)
            u = inst.row(i)
            if any(row[j] > 0 and u[j] == 0 and point.prices[j] == 0 for j in range(inst.n)):
                assert certificate_for(u, point.prices, row).mu == 0
                checked += 1
    assert checked > 0


def test_solve_unit_rejects_other_values() -> None:
    with pytest.raises(UtilityShapeError):
        solve_unit(MarketInstance.from_rows([[2, 0], [0, 1]]))


def test_bivalued_to_unit() -> None:
    inst = MarketInstance.from_rows([[5, -1, 5], [3, 3, 3], ["1/2", "7/2", "1/2"]])
    unit = bivalued_to_unit(inst)
    assert unit.utilities == ((1, 0, 1), (0, 0, 0), (0, 1, 0))


def test_random_bivalued_markets_are_exact_equilibria() -> None:
    rng = np.random.default_rng(43)
    for _ in range(50):
        inst = random_bivalued_instance(int(rng.integers(1, 6)), rng)
        point = solve_bivalued(inst)
        assert verify_equilibrium(inst, point, 0).verdict


def test_trivalued_rows_are_rejected() -> None:
    with pytest.raises(UtilityShapeError):
        solve_bivalued(MarketInstance.from_rows([[0, 1, 2], [0, 1, 1], [1, 1, 1]]))

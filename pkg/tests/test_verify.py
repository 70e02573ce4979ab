from __future__ import annotations

import math
from itertools import combinations

import numpy as np
import pytest

from hz_market.errors import DimensionError, PriceError
from hz_market.examples import closed_form_point, table1_instance
from hz_market.model import (
    Allocation,
    EquilibriumPoint,
    MarketInstance,
    PriceVector,
    Rat,
    random_unit_instance,
)
from hz_market.unit_solver import solve_unit
from hz_market.verify import check_scale_invariance, is_fractional_perfect_matching, verify_equilibrium


def _two_agent_market() -> tuple[MarketInstance, EquilibriumPoint]:
    inst = MarketInstance.from_rows([[1, 0], [1, 0]])
    half = "1/2"
    return inst, EquilibriumPoint(PriceVector.of([2, 0]), Allocation.of([[half, half], [half, half]]))


def _definition_holds(inst: MarketInstance, point: EquilibriumPoint) -> bool:
    """Equilibrium conditions checked directly, with a vertex-enumeration LP per agent."""

    n = inst.n
    p = list(point.prices.prices)
    x = point.allocation.shares
    if any(v < 0 for row in x for v in row):
        return False
    if any(sum(row) != 1 for row in x) or any(sum(x[i][j] for i in range(n)) != 1 for j in range(n)):
        return False
    for i in range(n):
        u = inst.row(i)
        if sum(a * b for a, b in zip(x[i], p)) > 1:
            return False
        best = [u[j] for j in range(n) if p[j] <= 1]
        for j, k in combinations(range(n), 2):
            det = p[k] - p[j]
            if det != 0:
                xj, xk = (p[k] - 1) / det, (1 - p[j]) / det
                if xj >= 0 and xk >= 0:
                    best.append(xj * u[j] + xk * u[k])
        if not best or max(best) != sum(a * b for a, b in zip(x[i], u)):
            return False
    return True


def test_unit_example_passes_exactly() -> None:
    inst, point = _two_agent_market()
    report = verify_equilibrium(inst, point)
    assert report.verdict
    assert report.tolerance == 0
    assert report.max_residual == 0


def test_table_one_equilibrium_passes_and_perturbation_fails() -> None:
    inst = table1_instance()
    point = closed_form_point(1)
    assert verify_equilibrium(inst, point, 1e-9).verdict

    prices = list(point.prices.prices)
    prices[1] += 0.01
    bumped = EquilibriumPoint(PriceVector(tuple(prices)), point.allocation)
    report = verify_equilibrium(inst, bumped, 1e-9)
    assert not report.verdict
    assert max(report.optimality_gaps) > 1e-9 or report.cost_overshoot > 1e-9


def test_negative_shares_fail() -> None:
    inst = MarketInstance.from_rows([[0, 0], [0, 0]])
    point = EquilibriumPoint(PriceVector.of([0, 0]), Allocation.of([[2, -1], [-1, 2]]))
    report = verify_equilibrium(inst, point)
    assert not report.verdict
    assert report.negative_share == 1
    assert report.max_residual == 1


def test_unaffordable_prices_fail_without_raising() -> None:
    inst = MarketInstance.from_rows([[1, 0], [0, 1]])
    point = EquilibriumPoint(PriceVector.of([2, 2]), Allocation.of([[1, 0], [0, 1]]))
    report = verify_equilibrium(inst, point)
    assert not report.verdict
    assert all(math.isinf(g) for g in report.optimality_gaps)


def test_dimension_mismatch() -> None:
    inst = MarketInstance.from_rows([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    _, point = _two_agent_market()
    with pytest.raises(DimensionError):
        verify_equilibrium(inst, point)


def test_scale_invariance() -> None:
    inst, point = _two_agent_market()
    assert check_scale_invariance(inst, point, Rat(1, 2), 0)
    assert check_scale_invariance(inst, point, Rat(1), 0)
    with pytest.raises(PriceError):
        check_scale_invariance(inst, point, Rat(2), 0)
    assert check_scale_invariance(table1_instance(), closed_form_point(1), 0.5, 1e-9)


def test_report_as_dict() -> None:
    inst, point = _two_agent_market()
    doc = verify_equilibrium(inst, point).as_dict()
    assert doc["verdict"] is True
    assert doc["clearing_residuals"] == [0.0, 0.0]
    assert set(doc) >= {"cost_overshoot", "optimality_gaps", "min_price", "negative_share"}


def test_fractional_perfect_matching() -> None:
    assert is_fractional_perfect_matching(Allocation.of([[1, 0], [0, 1]]))
    assert is_fractional_perfect_matching(Allocation.of([["1/2", "1/2"], ["1/2", "1/2"]]))
    assert not is_fractional_perfect_matching(Allocation.of([[1, 0], [1, 0]]))
    assert not is_fractional_perfect_matching(Allocation.of([[2, -1], [-1, 2]]))


def test_verdicts_agree_with_direct_check() -> None:
    rng = np.random.default_rng(71)
    passing = failing = 0
    for _ in range(60):
        inst = random_unit_instance(int(rng.integers(1, 5)), rng, density=0.4)
        point = solve_unit(inst)
        candidates = [point]
        prices = list(point.prices.prices)
        j = int(rng.integers(0, inst.n))
        prices[j] += Rat(1, 7)
        candidates.append(EquilibriumPoint(PriceVector(tuple(prices)), point.allocation))
        for cand in candidates:
            verdict = verify_equilibrium(inst, cand, 0).verdict
            assert verdict == _definition_holds(inst, cand)
            passing += verdict
            failing += not verdict
    assert passing and failing

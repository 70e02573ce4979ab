"""One agent's demand: the best unit-size bundle within a unit budget.

The demand problem is a linear program with two constraints (size equal to
one, cost at most one), so an optimum is always supported on one good or on
a cheap/expensive pair spending the whole budget.  Its dual pair
``(alpha, mu)`` prices the budget and the size constraint.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from enum import Enum
from itertools import combinations
from typing import Optional, Sequence, Union

from .constants import DEFAULT_TOL
from .errors import BundleError, DimensionError, InvariantViolation, PriceError
from .model import PriceVector, Scalar, coerce, is_exact_scalar

__all__ = [
    "BundleType",
    "DualCertificate",
    "BestResponse",
    "best_response",
    "certificate_for",
    "classify_bundle",
    "optimality_gap",
    "max_utility_goods",
    "optimal_goods",
]

logger = logging.getLogger(__name__)

Prices = Union[PriceVector, Sequence[Scalar]]


class BundleType(str, Enum):
    A = "A"
    B = "B"
    C = "C"
    D = "D"
    INDIFFERENT = "indifferent"


@dataclass(frozen=True)
class DualCertificate:
    alpha: Scalar
    mu: Scalar
    optimal_value: Scalar
    bundle_type: Optional[BundleType] = None


@dataclass(frozen=True)
class BestResponse:
    bundle: tuple[Scalar, ...]
    support: tuple[int, ...]
    certificate: DualCertificate

    @property
    def value(self) -> Scalar:
        return self.certificate.optimal_value


def _prepare(
    u_row: Sequence[Scalar], p: Prices, x_row: Sequence[Scalar] | None = None
) -> tuple[bool, list[Scalar], list[Scalar], list[Scalar] | None]:
    prices = list(p.prices if isinstance(p, PriceVector) else p)
    if len(prices) != len(u_row) or (x_row is not None and len(x_row) != len(u_row)):
        raise DimensionError(
            f"utility row has {len(u_row)} entries but {len(prices)} prices"
            + ("" if x_row is None else f" and {len(x_row)} shares")
        )
    values = list(u_row) + prices + (list(x_row) if x_row is not None else [])
    exact = all(is_exact_scalar(v) for v in values)
    u = [coerce(v, exact) for v in u_row]
    pr = [coerce(v, exact) for v in prices]
    x = [coerce(v, exact) for v in x_row] if x_row is not None else None
    return exact, u, pr, x


def _tolerance(exact: bool, tol: Optional[float]) -> Scalar:
    if tol is not None:
        return coerce(0, True) if exact and tol == 0 else tol
    return coerce(0, True) if exact else DEFAULT_TOL


def max_utility_goods(u_row: Sequence[Scalar]) -> list[int]:
    top = max(u_row)
    return [j for j, u in enumerate(u_row) if u == top]


def optimal_goods(
    u_row: Sequence[Scalar], p: Prices, cert: DualCertificate, *, tol: Optional[float] = None
) -> list[int]:
    """Goods on which the dual constraint is tight."""

    exact, u, pr, _ = _prepare(u_row, p)
    eps = _tolerance(exact, tol)
    return [j for j in range(len(u)) if abs(cert.alpha * pr[j] + cert.mu - u[j]) <= eps]


def _check_dual(u: list[Scalar], pr: list[Scalar], alpha: Scalar, mu: Scalar, eps: Scalar) -> bool:
    return alpha >= -eps and all(alpha * pj + mu >= uj - eps for pj, uj in zip(pr, u))


def _classify(u: list[Scalar], pr: list[Scalar], x: list[Scalar], eps: Scalar) -> BundleType:
    if max(u) == min(u):
        return BundleType.INDIFFERENT
    top = max(u)
    support = [j for j, v in enumerate(x) if v > eps]
    cost = sum(x[j] * pr[j] for j in support)
    if all(u[j] >= top - eps for j in support):
        return BundleType.A if cost < 1 - eps else BundleType.B
    # Below the top level the certificate needs alpha > 0; read the type off the support.
    if all(abs(u[j] - u[support[0]]) <= eps for j in support):
        if any(abs(pr[j] - 1) > eps for j in support):
            raise InvariantViolation("optimal goods of a single utility level must cost 1")
        return BundleType.C
    if not (any(pr[j] < 1 for j in support) and any(pr[j] > 1 for j in support)):
        raise InvariantViolation("optimal goods must straddle price 1 for a mixed bundle")
    return BundleType.D


def _smallest_alpha(u: list[Scalar], pr: list[Scalar], j: int) -> Scalar:
    """Least ``alpha >= 0`` keeping every dual constraint when good ``j`` is tight."""

    alpha = coerce(0, is_exact_scalar(pr[j]))
    for pl, ul in zip(pr, u):
        if pl > pr[j]:
            alpha = max(alpha, (ul - u[j]) / (pl - pr[j]))
    return alpha


def best_response(u_row: Sequence[Scalar], p: Prices, *, tol: Optional[float] = None) -> BestResponse:
    """Optimal bundle with its dual certificate.

    Ties go to the lexicographically smallest support, single goods first.
    """

    exact, u, pr, _ = _prepare(u_row, p)
    eps = _tolerance(exact, tol)
    n = len(u)
    if min(pr) > 1:
        raise PriceError(f"no bundle of size 1 is affordable: cheapest good costs {min(pr)}")
    zero, one = coerce(0, exact), coerce(1, exact)

    best_value: Scalar | None = None
    best_support: tuple[int, ...] = ()
    best_shares: dict[int, Scalar] = {}
    for j in range(n):
        if pr[j] <= 1 and (best_value is None or u[j] > best_value):
            best_value, best_support, best_shares = u[j], (j,), {j: one}
    # Goods sharing price and utility are interchangeable; keep the lowest index.
    reps = sorted({(pr[j], u[j]): j for j in reversed(range(n))}.values())
    for j, k in combinations(reps, 2):
        cheap, dear = (j, k) if pr[j] < pr[k] else (k, j)
        if not (pr[cheap] < 1 < pr[dear]):
            continue
        gap = pr[dear] - pr[cheap]
        xc = (pr[dear] - 1) / gap
        xd = (1 - pr[cheap]) / gap
        value = xc * u[cheap] + xd * u[dear]
        if best_value is None or value > best_value:
            best_value, best_support, best_shares = value, (j, k), {cheap: xc, dear: xd}
    assert best_value is not None

    if len(best_support) == 2:
        cheap, dear = sorted(best_shares, key=lambda g: pr[g])
        alpha = (u[dear] - u[cheap]) / (pr[dear] - pr[cheap])
        mu = u[cheap] - alpha * pr[cheap]
    else:
        (j,) = best_support
        alpha = zero if pr[j] < 1 else _smallest_alpha(u, pr, j)
        mu = u[j] - alpha * pr[j]
    scale = max(abs(v) for v in u) + 1
    if not _check_dual(u, pr, alpha, mu, eps * scale):
        raise InvariantViolation(f"dual ({alpha}, {mu}) recovered from support {best_support} is infeasible")

    bundle = tuple(best_shares.get(j, zero) for j in range(n))
    cert = DualCertificate(alpha, mu, best_value)
    cert = replace(cert, bundle_type=_classify(u, pr, list(bundle), eps))
    logger.debug("[bundle] support=%s value=%s alpha=%s mu=%s", best_support, best_value, alpha, mu)
    return BestResponse(bundle, best_support, cert)


def optimality_gap(
    u_row: Sequence[Scalar], p: Prices, x_row: Sequence[Scalar], *, tol: Optional[float] = None
) -> Scalar:
    """Best attainable value minus the value of ``x_row``, floored at zero."""

    exact, u, pr, x = _prepare(u_row, p, x_row)
    assert x is not None
    best = best_response(u, pr, tol=tol).value
    gap = best - sum(a * b for a, b in zip(x, u))
    return gap if gap > 0 else coerce(0, exact)


def certificate_for(
    u_row: Sequence[Scalar], p: Prices, x_row: Sequence[Scalar], *, tol: Optional[float] = None
) -> DualCertificate:
    """Dual pair that certifies the given bundle; ``alpha = 0`` when that works."""

    exact, u, pr, x = _prepare(u_row, p, x_row)
    assert x is not None
    eps = _tolerance(exact, tol)
    support = [j for j, v in enumerate(x) if v > eps]
    if not support:
        raise BundleError("bundle is empty")
    top = max(u)
    if all(u[j] >= top - eps for j in support):
        alpha, mu = coerce(0, exact), top
    else:
        cheap = min(support, key=lambda j: pr[j])
        dear = max(support, key=lambda j: pr[j])
        if pr[dear] - pr[cheap] > eps:
            alpha = (u[dear] - u[cheap]) / (pr[dear] - pr[cheap])
        else:
            alpha = _smallest_alpha(u, pr, cheap)
        mu = u[cheap] - alpha * pr[cheap]
    scale = max(abs(v) for v in u) + 1
    if not _check_dual(u, pr, alpha, mu, eps * scale) or any(
        abs(alpha * pr[j] + mu - u[j]) > eps * scale for j in support
    ):
        raise BundleError("bundle is not optimal at these prices; no dual certificate exists")
    value = sum(a * b for a, b in zip(x, u))
    cert = DualCertificate(alpha, mu, value)
    return replace(cert, bundle_type=_classify(u, pr, x, eps))


def classify_bundle(
    u_row: Sequence[Scalar],
    p: Prices,
    x_row: Sequence[Scalar],
    cert: DualCertificate | None = None,
    *,
    tol: Optional[float] = None,
) -> BundleType:
    """Type A-D tag of an optimal bundle.

    Reports B rather than C whenever ``alpha = 0`` certifies the bundle.
    A given ``cert`` must certify ``x_row``; :class:`BundleError` otherwise.
    """

    exact, u, pr, x = _prepare(u_row, p, x_row)
    assert x is not None
    eps = _tolerance(exact, tol)
    scale = max(abs(v) for v in u) + 1
    if optimality_gap(u, pr, x, tol=tol) > eps * scale:
        raise BundleError("bundle is not optimal at these prices")
    if cert is not None:
        support = [j for j, v in enumerate(x) if v > eps]
        if not _check_dual(u, pr, cert.alpha, cert.mu, eps * scale) or any(
            abs(cert.alpha * pr[j] + cert.mu - u[j]) > eps * scale for j in support
        ):
            raise BundleError(f"({cert.alpha}, {cert.mu}) does not certify this bundle")
    return _classify(u, pr, x, eps)

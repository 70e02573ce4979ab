"""A continuous self-map of the price/allocation box whose fixed points are equilibria.

Points live in ``D``: prices in ``[0, n]`` and row-stochastic nonnegative
allocations.  ``F`` pushes prices towards clearing and every agent's row
towards a cheaper or better bundle; a point that ``F`` leaves in place is
an equilibrium.  Everything here is vectorised over a leading batch axis.
Float arrays give binary64 evaluation; ``dtype=object`` arrays of
:class:`sympy.Rational` give exact evaluation.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import permutations
from typing import Any, Optional

import numpy as np

from .constants import (
    DEFAULT_DAMPING,
    DEFAULT_FIXPOINT_TOL,
    DEFAULT_MAX_STEPS,
    DEFAULT_RESTARTS,
    DOMAIN_TOL,
)
from .errors import DimensionError, InstanceError
from .model import Allocation, EquilibriumPoint, MarketInstance, PriceVector, Rat, coerce

__all__ = [
    "DomainPoint",
    "IterationTrace",
    "FixpointSearch",
    "BrouwerMap",
    "apply_f_p",
    "apply_f_i",
    "apply_f",
    "residual",
    "in_domain",
    "random_domain_points",
    "iterate",
    "search_fixed_point",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DomainPoint:
    prices: np.ndarray
    allocation: np.ndarray

    def __post_init__(self) -> None:
        n = self.prices.shape[-1]
        if self.allocation.shape[-2:] != (n, n):
            raise DimensionError(f"allocation of shape {self.allocation.shape} does not match {n} prices")

    @property
    def n(self) -> int:
        return int(self.prices.shape[-1])

    @property
    def exact(self) -> bool:
        return self.prices.dtype == object

    @classmethod
    def from_point(cls, point: EquilibriumPoint, *, exact: Optional[bool] = None) -> "DomainPoint":
        use_exact = point.exact if exact is None else exact
        dtype = object if use_exact else float
        return cls(
            np.array([coerce(v, use_exact) for v in point.prices.prices], dtype=dtype),
            np.array(
                [[coerce(v, use_exact) for v in row] for row in point.allocation.shares], dtype=dtype
            ),
        )

    def to_point(self) -> EquilibriumPoint:
        conv = (lambda v: v) if self.exact else float
        return EquilibriumPoint(
            PriceVector(tuple(conv(v) for v in self.prices)),
            Allocation(tuple(tuple(conv(v) for v in row) for row in self.allocation)),
        )


@dataclass
class IterationTrace:
    """Iterates of one damped run with their residuals."""

    gamma: float
    seed: Optional[int] = None
    points: list[DomainPoint] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)

    @property
    def best_index(self) -> int:
        return int(np.argmin(self.residuals))

    @property
    def best_point(self) -> DomainPoint:
        return self.points[self.best_index]

    @property
    def best_residual(self) -> float:
        return self.residuals[self.best_index]

    def __len__(self) -> int:
        return len(self.residuals)


@dataclass(frozen=True)
class FixpointSearch:
    traces: tuple[IterationTrace, ...]

    @property
    def best(self) -> IterationTrace:
        return min(self.traces, key=lambda t: t.best_residual)


def _price_map(p: np.ndarray, x: np.ndarray) -> np.ndarray:
    exact = p.dtype == object
    zero = Rat(0) if exact else 0.0
    n = Rat(p.shape[-1]) if exact else float(p.shape[-1])
    q = _pos(p + x.sum(axis=-2) - 1, zero)
    q = np.where(np.asarray(q > n, dtype=bool), n, q)
    return q - q.min(axis=-1, keepdims=True)


def _pos(a: Any, zero: Any) -> Any:  # noqa: ANN401 - array or scalar
    return np.where(np.asarray(a > 0, dtype=bool), a, zero)


def _min(a: Any, b: Any) -> Any:  # noqa: ANN401 - array or scalar
    return np.where(np.asarray(a <= b, dtype=bool), a, b)


class BrouwerMap:
    """``F`` compiled for one instance.

    Per agent this fixes the preferred good (lowest index among the
    top-utility goods), the goods outside the top set, the ordered pairs
    with ``u_j <= u_k`` and the ordered triples with ``u_j < u_k < u_l``
    together with their mixing weights.
    """

    def __init__(self, inst: MarketInstance) -> None:
        self.inst = inst
        self.n = n = inst.n
        exact_u = [[coerce(v, True) for v in row] for row in inst.utilities] if inst.exact else None
        float_u = [[float(v) for v in row] for row in inst.utilities]
        self._u = {True: exact_u, False: float_u}
        self.star: list[int] = []
        self.others: list[list[int]] = []
        self.pairs: list[list[tuple[int, int]]] = []
        self.triples: list[list[tuple[int, int, int]]] = []
        self._weights: dict[bool, list[list[tuple[int, int, int, Any, Any]]]] = {True: [], False: []}
        for row in inst.utilities:
            top = max(row)
            self.star.append(min(j for j in range(n) if row[j] == top))
            self.others.append([k for k in range(n) if row[k] != top])
            self.pairs.append([(j, k) for j, k in permutations(range(n), 2) if row[j] <= row[k]])
            self.triples.append(
                [(j, k, l) for j, k, l in permutations(range(n), 3) if row[j] < row[k] < row[l]]
            )
        for exact, u in self._u.items():
            if u is None:
                continue
            one = Rat(1) if exact else 1.0
            for i, triples in enumerate(self.triples):
                ui = u[i]
                ws = [(ui[l] - ui[k]) / (ui[l] - ui[j]) for j, k, l in triples]
                self._weights[exact].append(
                    [(j, k, l, w, one - w) for (j, k, l), w in zip(triples, ws)]
                )

    def _coefficients(self, exact: bool) -> tuple[list[list[Any]], Any, Any]:
        u = self._u[exact]
        if u is None:
            raise InstanceError("exact evaluation needs an instance with exact utilities")
        zero = Rat(0) if exact else 0.0
        inv_n2 = Rat(1, self.n * self.n) if exact else 1.0 / (self.n * self.n)
        return u, zero, inv_n2

    def prices(self, p: np.ndarray, x: np.ndarray) -> np.ndarray:
        return _price_map(p, x)

    def row(self, p: np.ndarray, x: np.ndarray, i: int) -> np.ndarray:
        exact = p.dtype == object
        u, zero, inv_n2 = self._coefficients(exact)
        ui = u[i]
        one = Rat(1) if exact else 1.0
        row = x[..., i, :].copy()

        # Overspending: blend in the goods cheaper than 1.
        r = _pos((row * p).sum(axis=-1) - 1, zero)
        s = _pos(1 - p, zero)
        denom = np.asarray(one + r * s.sum(axis=-1))
        row = (row + r[..., None] * s) / denom[..., None]

        # Slack budget: drain non-top goods into the preferred good.
        t = _pos(1 - (row * p).sum(axis=-1), zero)
        star = self.star[i]
        for k in self.others[i]:
            d = _min(row[..., k], t * inv_n2)
            row[..., k] = row[..., k] - d
            row[..., star] = row[..., star] + d

        # Pairs: move towards the cheaper, weakly better good.
        for j, k in self.pairs[i]:
            d = _min(row[..., j], _pos(p[..., j] - p[..., k], zero)) * inv_n2
            row[..., j] = row[..., j] - d
            row[..., k] = row[..., k] + d

        weights = self._weights[exact][i]

        # Triples: split the middle good when it lies above the chord.
        for j, k, l, wj, wl in weights:
            gain = (ui[l] - ui[k]) * (p[..., k] - p[..., j]) - (ui[k] - ui[j]) * (p[..., l] - p[..., k])
            d = _min(row[..., k], _pos(gain, zero))
            row[..., k] = row[..., k] - d
            row[..., j] = row[..., j] + wj * d
            row[..., l] = row[..., l] + wl * d

        # Triples: merge the ends into the middle when it lies below the chord.
        for j, k, l, wj, wl in weights:
            gain = (ui[k] - ui[j]) * (p[..., l] - p[..., k]) - (ui[l] - ui[k]) * (p[..., k] - p[..., j])
            d = _min(_min(row[..., j], row[..., l]), _pos(gain, zero))
            row[..., k] = row[..., k] + d
            row[..., j] = row[..., j] - wj * d
            row[..., l] = row[..., l] - wl * d
        return row

    def __call__(self, p: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        new_x = np.stack([self.row(p, x, i) for i in range(self.n)], axis=-2)
        return self.prices(p, x), new_x

    def residual(self, p: np.ndarray, x: np.ndarray) -> Any:  # noqa: ANN401 - array or scalar
        """Sup-norm distance between each point and its image."""

        fp, fx = self(p, x)
        dp = np.abs(fp - p).max(axis=-1)
        dx = np.abs(fx - x).reshape(fx.shape[:-2] + (-1,)).max(axis=-1)
        res = np.where(np.asarray(dp >= dx, dtype=bool), dp, dx)
        return res.item() if res.ndim == 0 else res


def _arrays(point: DomainPoint) -> tuple[np.ndarray, np.ndarray]:
    return point.prices, point.allocation


def apply_f_p(point: DomainPoint) -> np.ndarray:
    """Price half of ``F``: clamp ``p + demand - 1`` into ``[0, n]`` and shift the minimum to 0."""

    return _price_map(point.prices, point.allocation)


def apply_f_i(inst: MarketInstance, point: DomainPoint, i: int, *, fmap: BrouwerMap | None = None) -> np.ndarray:
    fmap = fmap or BrouwerMap(inst)
    return fmap.row(point.prices, point.allocation, i)


def apply_f(inst: MarketInstance, point: DomainPoint, *, fmap: BrouwerMap | None = None) -> DomainPoint:
    fmap = fmap or BrouwerMap(inst)
    p, x = fmap(point.prices, point.allocation)
    return DomainPoint(p, x)


def residual(inst: MarketInstance, point: DomainPoint, *, fmap: BrouwerMap | None = None) -> Any:  # noqa: ANN401
    fmap = fmap or BrouwerMap(inst)
    return fmap.residual(point.prices, point.allocation)


def in_domain(point: DomainPoint, tol: float = DOMAIN_TOL) -> bool:
    p, x = _arrays(point)
    n = point.n
    return bool(
        np.all(p >= -tol)
        and np.all(p <= n + tol)
        and np.all(x >= -tol)
        and np.all(np.abs(x.sum(axis=-1) - 1) <= tol)
    )


def random_domain_points(n: int, count: int, rng: np.random.Generator) -> DomainPoint:
    """``count`` uniform samples of ``D`` stacked along the first axis."""

    p = rng.uniform(0.0, float(n), size=(count, n))
    x = rng.dirichlet(np.ones(n), size=(count, n))
    return DomainPoint(p, x)


def _run(
    fmap: BrouwerMap,
    p: np.ndarray,
    x: np.ndarray,
    traces: list[IterationTrace],
    *,
    gamma: float,
    max_steps: int,
    tol: float,
) -> None:
    active = np.ones(p.shape[0], dtype=bool)
    for _ in range(max_steps):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        fp, fx = fmap(p[idx], x[idx])
        dp = np.abs(fp - p[idx]).max(axis=-1)
        dx = np.abs(fx - x[idx]).reshape(idx.size, -1).max(axis=-1)
        res = np.maximum(dp, dx)
        for pos, b in enumerate(idx):
            traces[b].points.append(DomainPoint(p[b].copy(), x[b].copy()))
            traces[b].residuals.append(float(res[pos]))
        done = res < tol
        active[idx[done]] = False
        keep = idx[~done]
        p[keep] = (1 - gamma) * p[keep] + gamma * fp[~done]
        x[keep] = (1 - gamma) * x[keep] + gamma * fx[~done]


def iterate(
    inst: MarketInstance,
    start: DomainPoint,
    *,
    gamma: float = DEFAULT_DAMPING,
    max_steps: int = DEFAULT_MAX_STEPS,
    tol: float = DEFAULT_FIXPOINT_TOL,
    seed: Optional[int] = None,
) -> IterationTrace:
    """Damped iteration ``z <- (1 - gamma) z + gamma F(z)`` from ``start``.

    Stops once the residual drops below ``tol``; reaching ``max_steps`` is a
    normal outcome and the trace keeps the best point seen.
    """

    if not 0 < gamma <= 1:
        raise ValueError(f"damping must lie in (0, 1], got {gamma}")
    p = np.array(start.prices, dtype=float).reshape(1, -1)
    x = np.array(start.allocation, dtype=float).reshape(1, inst.n, inst.n)
    trace = IterationTrace(gamma, seed)
    _run(BrouwerMap(inst), p, x, [trace], gamma=gamma, max_steps=max_steps, tol=tol)
    return trace


def search_fixed_point(
    inst: MarketInstance,
    *,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    gamma: float = DEFAULT_DAMPING,
    max_steps: int = DEFAULT_MAX_STEPS,
    tol: float = DEFAULT_FIXPOINT_TOL,
) -> FixpointSearch:
    """Run ``restarts`` damped iterations from seeded random points side by side."""

    if not 0 < gamma <= 1:
        raise ValueError(f"damping must lie in (0, 1], got {gamma}")
    if restarts < 1:
        raise ValueError(f"need at least one restart, got {restarts}")
    n = inst.n
    children = np.random.SeedSequence(seed).spawn(restarts)
    starts = [random_domain_points(n, 1, np.random.default_rng(c)) for c in children]
    p = np.concatenate([s.prices for s in starts])
    x = np.concatenate([s.allocation for s in starts])
    traces = [IterationTrace(gamma, seed=int(c.spawn_key[-1])) for c in children]
    _run(BrouwerMap(inst), p, x, traces, gamma=gamma, max_steps=max_steps, tol=tol)
    search = FixpointSearch(tuple(traces))
    logger.info(
        "[fixpoint] %d restarts, best residual %.3g after %d steps",
        restarts,
        search.best.best_residual,
        len(search.best),
    )
    return search

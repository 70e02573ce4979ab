"""Market data types, scalar handling and the JSON formats.

Every value is either exact (``int`` or :class:`sympy.Rational`) or a
binary64 ``float``.  A container is exact only when all of its entries are;
a mixed container is converted to floats on construction so that arithmetic
never silently mixes the two modes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable, Iterator, Sequence, Union

import numpy as np
import sympy as sp

from .constants import DEFAULT_NEG_INFINITY, EquilibriumJSON, InstanceJSON
from .errors import DimensionError, InstanceError, PriceError, UtilityShapeError
from .utils import dump_json, load_json

__all__ = [
    "Scalar",
    "Rat",
    "parse_scalar",
    "format_scalar",
    "is_exact_scalar",
    "coerce",
    "MarketInstance",
    "PriceVector",
    "Allocation",
    "EquilibriumPoint",
    "size_cost_value",
    "scale_prices",
    "normalize_prices",
    "equivalent_transform",
    "load_instance",
    "save_instance",
    "load_equilibrium",
    "save_equilibrium",
    "equilibrium_document",
    "instance_document",
    "is_exact",
    "random_unit_instance",
    "random_bivalued_instance",
    "random_real_instance",
]

Scalar = Union[int, float, sp.Rational]
Rat = sp.Rational

_NEG_INF_TOKENS = {"-inf", "-infinity", "-∞"}


def is_exact_scalar(value: Any) -> bool:  # noqa: ANN401 - any scalar
    if isinstance(value, bool):
        return False
    return isinstance(value, (int, sp.Rational))


def coerce(value: Scalar, exact: bool) -> Scalar:
    """Return ``value`` as a :class:`Rat` when ``exact`` else as ``float``."""

    if exact:
        if not is_exact_scalar(value):
            raise InstanceError(f"cannot use inexact value {value!r} in exact arithmetic")
        return Rat(value)
    return float(value)


def parse_scalar(value: Any) -> Scalar:  # noqa: ANN401 - JSON input
    """Turn a JSON number or ``"p/q"`` string into a scalar.

    JSON integers and strings become exact rationals; JSON floats stay floats.
    """

    if isinstance(value, bool):
        raise InstanceError(f"boolean {value!r} is not a number")
    if isinstance(value, int):
        return Rat(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise InstanceError(f"non-finite number {value!r}; use a finite stand-in")
        return value
    if isinstance(value, sp.Rational):
        return value
    if isinstance(value, str):
        text = value.strip()
        try:
            parsed = sp.Rational(text)
        except (TypeError, ValueError, ArithmeticError, sp.SympifyError) as exc:
            raise InstanceError(f"cannot parse {value!r} as a rational number") from exc
        return parsed
    raise InstanceError(f"unsupported scalar {value!r} of type {type(value).__name__}")


def format_scalar(value: Scalar) -> int | float | str:
    """JSON form of a scalar: exact values as ``"p/q"`` strings."""

    if is_exact_scalar(value):
        return str(Rat(value))
    return float(value)


def _uniform(values: Sequence[Scalar]) -> tuple[Scalar, ...]:
    exact = all(is_exact_scalar(v) for v in values)
    return tuple(coerce(v, exact) for v in values)


def _uniform_rows(rows: Sequence[Sequence[Scalar]]) -> tuple[tuple[Scalar, ...], ...]:
    exact = all(is_exact_scalar(v) for row in rows for v in row)
    return tuple(tuple(coerce(v, exact) for v in row) for row in rows)


def _check_finite(values: Iterable[Scalar], what: str) -> None:
    for v in values:
        if isinstance(v, float) and not math.isfinite(v):
            raise InstanceError(f"{what} contains non-finite value {v!r}")


# ---------------------------------------------------------------------------
# Data types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MarketInstance:
    """Square utility matrix ``utilities[agent][good]``.

    ``neg_infinity`` records the stand-in magnitude used for unacceptable goods
    when the instance was read from a file that marked them ``"-inf"``.
    """

    utilities: tuple[tuple[Scalar, ...], ...]
    neg_infinity: Scalar | None = None

    def __post_init__(self) -> None:
        rows = self.utilities
        n = len(rows)
        if n < 1:
            raise InstanceError("market needs at least one agent")
        for i, row in enumerate(rows):
            if len(row) != n:
                raise InstanceError(
                    f"utility matrix must be square: row {i} has {len(row)} entries, expected {n}"
                )
            _check_finite(row, f"utility row {i}")
        object.__setattr__(self, "utilities", _uniform_rows(rows))

    @classmethod
    def from_rows(
        cls, rows: Sequence[Sequence[Any]], neg_infinity: Scalar | None = None
    ) -> "MarketInstance":
        return cls(
            tuple(tuple(parse_scalar(v) for v in row) for row in rows),
            neg_infinity=neg_infinity,
        )

    @property
    def n(self) -> int:
        return len(self.utilities)

    @property
    def exact(self) -> bool:
        return is_exact_scalar(self.utilities[0][0])

    def row(self, i: int) -> tuple[Scalar, ...]:
        return self.utilities[i]

    def distinct_values(self, i: int) -> list[Scalar]:
        return sorted(set(self.utilities[i]))

    def as_array(self) -> np.ndarray:
        if self.exact:
            return np.array(self.utilities, dtype=object)
        return np.array(self.utilities, dtype=float)


@dataclass(frozen=True)
class PriceVector:
    prices: tuple[Scalar, ...]

    def __post_init__(self) -> None:
        if not self.prices:
            raise PriceError("price vector is empty")
        _check_finite(self.prices, "price vector")
        prices = _uniform(self.prices)
        for j, p in enumerate(prices):
            if p < 0:
                raise PriceError(f"price of good {j} is negative ({p})")
        object.__setattr__(self, "prices", prices)

    @classmethod
    def of(cls, values: Iterable[Any]) -> "PriceVector":
        return cls(tuple(parse_scalar(v) for v in values))

    @property
    def n(self) -> int:
        return len(self.prices)

    @property
    def exact(self) -> bool:
        return is_exact_scalar(self.prices[0])

    def __getitem__(self, j: int) -> Scalar:
        return self.prices[j]

    def __iter__(self) -> Iterator[Scalar]:
        return iter(self.prices)


@dataclass(frozen=True)
class Allocation:
    """Row ``i`` holds agent ``i``'s shares of every good.

    Shares are not required to be nonnegative or row-stochastic here; those
    are equilibrium conditions and are reported by :mod:`hz_market.verify`.
    """

    shares: tuple[tuple[Scalar, ...], ...]

    def __post_init__(self) -> None:
        rows = self.shares
        if not rows:
            raise DimensionError("allocation is empty")
        width = len(rows[0])
        for i, row in enumerate(rows):
            if len(row) != width:
                raise DimensionError(f"allocation row {i} has {len(row)} entries, expected {width}")
            _check_finite(row, f"allocation row {i}")
        object.__setattr__(self, "shares", _uniform_rows(rows))

    @classmethod
    def of(cls, rows: Iterable[Iterable[Any]]) -> "Allocation":
        return cls(
            tuple(
                tuple(parse_scalar(v) for v in row)
                for row in rows
            )
        )

    @property
    def n(self) -> int:
        return len(self.shares)

    @property
    def exact(self) -> bool:
        return is_exact_scalar(self.shares[0][0])

    def row(self, i: int) -> tuple[Scalar, ...]:
        return self.shares[i]

    def column_sums(self) -> list[Scalar]:
        return [sum(row[j] for row in self.shares) for j in range(len(self.shares[0]))]


@dataclass(frozen=True)
class EquilibriumPoint:
    prices: PriceVector
    allocation: Allocation

    def __post_init__(self) -> None:
        n = self.prices.n
        if self.allocation.n != n or len(self.allocation.shares[0]) != n:
            raise DimensionError(
                f"allocation must be {n}x{n} to match {n} prices, got "
                f"{self.allocation.n}x{len(self.allocation.shares[0])}"
            )

    @property
    def n(self) -> int:
        return self.prices.n

    @property
    def exact(self) -> bool:
        return self.prices.exact and self.allocation.exact


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def size_cost_value(
    inst: MarketInstance, x: Allocation, p: PriceVector, i: int
) -> tuple[Scalar, Scalar, Scalar]:
    """Return ``(size, cost, value)`` of agent ``i``'s row of ``x``."""

    n = inst.n
    if x.n != n or len(x.shares[0]) != n or p.n != n:
        raise DimensionError(
            f"instance has {n} agents but allocation is {x.n}x{len(x.shares[0])} "
            f"and there are {p.n} prices"
        )
    if not 0 <= i < n:
        raise DimensionError(f"agent index {i} outside 0..{n - 1}")
    exact = inst.exact and x.exact and p.exact
    row = [coerce(v, exact) for v in x.row(i)]
    prices = [coerce(v, exact) for v in p.prices]
    utils = [coerce(v, exact) for v in inst.row(i)]
    size = sum(row, coerce(0, exact))
    cost = sum((a * b for a, b in zip(row, prices)), coerce(0, exact))
    value = sum((a * b for a, b in zip(row, utils)), coerce(0, exact))
    return size, cost, value


def scale_prices(p: PriceVector, r: Scalar) -> PriceVector:
    """Map every price to ``r * (p_j - 1) + 1``."""

    if r <= 0:
        raise PriceError(f"scale factor must be positive, got {r}")
    exact = p.exact and is_exact_scalar(r)
    rr = coerce(r, exact)
    out = [rr * (coerce(v, exact) - 1) + 1 for v in p.prices]
    for j, v in enumerate(out):
        if v < 0:
            raise PriceError(f"scaling by {r} makes the price of good {j} negative ({v})")
    return PriceVector(tuple(out))


def normalize_prices(p: PriceVector) -> PriceVector:
    """Rescale so the cheapest good is free, keeping the equilibrium set."""

    m = min(p.prices)
    if m >= 1:
        raise PriceError(f"cannot normalise prices whose minimum {m} is at least 1")
    # r = 1 / (1 - m) applied as r * (p - 1) + 1, written to stay nonnegative
    return PriceVector(tuple((v - m) / (1 - m) for v in p.prices))


def equivalent_transform(u_row: Sequence[Scalar], s: Scalar, h: Scalar) -> tuple[Scalar, ...]:
    """Return ``s * u + h``; optimal bundles are unchanged for ``s > 0``, ``h >= 0``."""

    if s <= 0:
        raise UtilityShapeError(f"scale must be positive, got {s}")
    if h < 0:
        raise UtilityShapeError(f"shift must be nonnegative, got {h}")
    return _uniform([s * v + h for v in u_row])


# ---------------------------------------------------------------------------
# JSON formats
# ---------------------------------------------------------------------------


def load_instance(text: str) -> MarketInstance:
    """Parse an instance document ``{"n", "utilities", "neg_infinity"?}``.

    Entries written ``"-inf"`` become ``-neg_infinity``.
    """

    data = load_json(text, what="instance")
    if not isinstance(data, dict):
        raise InstanceError("instance must be a JSON object with a 'utilities' field")
    rows = data.get("utilities")
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise InstanceError("'utilities' must be a non-empty list of rows")
    raw_m = data.get("neg_infinity")
    neg_inf = parse_scalar(raw_m) if raw_m is not None else None
    if neg_inf is not None and neg_inf <= 0:
        raise InstanceError(f"'neg_infinity' must be positive, got {raw_m!r}")
    stand_in = neg_inf if neg_inf is not None else Rat(DEFAULT_NEG_INFINITY)
    used_stand_in = False
    parsed: list[tuple[Scalar, ...]] = []
    for i, row in enumerate(rows):
        out: list[Scalar] = []
        finite = 0
        for v in row:
            if isinstance(v, str) and v.strip().lower() in _NEG_INF_TOKENS:
                out.append(-stand_in)
                used_stand_in = True
            else:
                out.append(parse_scalar(v))
                finite += 1
        if finite == 0:
            raise InstanceError(f"agent {i} finds every good unacceptable")
        parsed.append(tuple(out))
    if "n" in data and data["n"] != len(parsed):
        raise InstanceError(f"'n' is {data['n']!r} but {len(parsed)} utility rows were given")
    return MarketInstance(
        tuple(parsed), neg_infinity=stand_in if (used_stand_in or neg_inf is not None) else None
    )


def instance_document(inst: MarketInstance) -> InstanceJSON:
    doc: InstanceJSON = {
        "n": inst.n,
        "utilities": [[format_scalar(v) for v in row] for row in inst.utilities],
    }
    if inst.neg_infinity is not None:
        doc["neg_infinity"] = format_scalar(inst.neg_infinity)
    return doc


def save_instance(inst: MarketInstance) -> str:
    return dump_json(instance_document(inst))


def load_equilibrium(text: str) -> EquilibriumPoint:
    data = load_json(text, what="equilibrium")
    if not isinstance(data, dict) or "prices" not in data or "allocation" not in data:
        raise InstanceError("equilibrium must be an object with 'prices' and 'allocation'")
    prices, rows = data["prices"], data["allocation"]
    if not isinstance(prices, list) or not isinstance(rows, list):
        raise InstanceError("'prices' must be a list and 'allocation' a list of rows")
    if not all(isinstance(r, list) for r in rows) or not rows:
        raise InstanceError("'allocation' must be a non-empty list of rows")
    return EquilibriumPoint(
        PriceVector(tuple(parse_scalar(v) for v in prices)),
        Allocation(tuple(tuple(parse_scalar(v) for v in row) for row in rows)),
    )


def equilibrium_document(point: EquilibriumPoint) -> EquilibriumJSON:
    return {
        "prices": [format_scalar(v) for v in point.prices.prices],
        "allocation": [[format_scalar(v) for v in row] for row in point.allocation.shares],
    }


def save_equilibrium(point: EquilibriumPoint) -> str:
    return dump_json(equilibrium_document(point))


def is_exact(obj: Any) -> bool:  # noqa: ANN401 - any model object
    """True when every scalar inside ``obj`` is an exact rational."""

    if isinstance(obj, (MarketInstance, PriceVector, Allocation, EquilibriumPoint)):
        return obj.exact
    if isinstance(obj, (list, tuple)):
        return all(is_exact(v) for v in obj)
    return is_exact_scalar(obj)


# ---------------------------------------------------------------------------
# Seeded generators
# ---------------------------------------------------------------------------


def random_unit_instance(n: int, rng: np.random.Generator, density: float = 0.35) -> MarketInstance:
    """0/1 utilities, each entry 1 with probability ``density``."""

    bits = rng.random((n, n)) < density
    return MarketInstance(tuple(tuple(Rat(int(b)) for b in row) for row in bits))


def random_bivalued_instance(n: int, rng: np.random.Generator, high: int = 9) -> MarketInstance:
    """Rows over two rational values ``a < b`` (possibly negative); some rows constant."""

    rows = []
    for _ in range(n):
        a = Rat(int(rng.integers(-high, high)), int(rng.integers(1, 4)))
        b = a + Rat(int(rng.integers(1, high + 1)), int(rng.integers(1, 4)))
        if rng.random() < 0.1:
            rows.append(tuple(a for _ in range(n)))
            continue
        pick = rng.random(n) < 0.4
        rows.append(tuple(b if flag else a for flag in pick))
    return MarketInstance(tuple(rows))


def random_real_instance(n: int, rng: np.random.Generator, high: float = 10.0) -> MarketInstance:
    values = rng.uniform(0.0, high, size=(n, n))
    return MarketInstance(tuple(tuple(float(v) for v in row) for row in values))

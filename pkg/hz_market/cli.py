"""Command-line interface: ``hz-market <command> ...``.

Exit status is 0 on success, 1 when a verification fails and 2 on bad input.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import Any, Optional

from .bundle import best_response
from .constants import (
    DEFAULT_DAMPING,
    DEFAULT_FIXPOINT_TOL,
    DEFAULT_MAX_STEPS,
    DEFAULT_RESTARTS,
    LOG_ENV_VAR,
)
from .errors import HZMarketError, InvariantViolation
from .examples import closed_form_point, table1_instance
from .fixp_map import search_fixed_point
from .model import (
    MarketInstance,
    PriceVector,
    equilibrium_document,
    format_scalar,
    instance_document,
    load_equilibrium,
    load_instance,
    parse_scalar,
)
from .unit_solver import solve_bivalued, solve_unit
from .utils import dump_json, load_json, read_text
from .verify import demonstrate_wgs_violation, verify_equilibrium

__all__ = ["main"]

logger = logging.getLogger(__name__)

_LEVELS = ("WARNING", "INFO", "DEBUG")


def _configure_logging(level_name: Optional[str]) -> None:
    name = (level_name or os.environ.get(LOG_ENV_VAR, "") or "WARNING").upper()
    if name not in _LEVELS:
        name = "WARNING"
    level = getattr(logging, name)
    pkg_logger = logging.getLogger("hz_market")
    for h in list(pkg_logger.handlers):
        if getattr(h, "_hz_cli", False):
            pkg_logger.removeHandler(h)
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter(logging.BASIC_FORMAT))
    handler.setLevel(level)
    handler._hz_cli = True  # type: ignore[attr-defined]
    pkg_logger.addHandler(handler)
    pkg_logger.propagate = False
    pkg_logger.setLevel(level)


def _emit(doc: Any) -> None:  # noqa: ANN401 - JSON document
    print(dump_json(doc))


def _instance(path: str) -> MarketInstance:
    return load_instance(read_text(path, what="instance"))


def _cmd_solve(ns: argparse.Namespace) -> int:
    inst = _instance(ns.input)
    mode = ns.mode
    if mode == "auto":
        is_unit = all(v in (0, 1) for row in inst.utilities for v in row)
        mode = "unit" if is_unit else "bivalued"
    point = solve_unit(inst) if mode == "unit" else solve_bivalued(inst)
    _emit(equilibrium_document(point))
    return 0


def _cmd_verify(ns: argparse.Namespace) -> int:
    inst = _instance(ns.input)
    point = load_equilibrium(read_text(ns.eq, what="equilibrium"))
    report = verify_equilibrium(inst, point, ns.tol)
    _emit(report.as_dict())
    return 0 if report.verdict else 1


def _cmd_best_response(ns: argparse.Namespace) -> int:
    inst = _instance(ns.input)
    if not 0 <= ns.agent < inst.n:
        raise HZMarketError(f"--agent must lie in 0..{inst.n - 1}, got {ns.agent}")
    raw = load_json(read_text(ns.prices, what="prices"), what="prices")
    if isinstance(raw, dict):
        raw = raw.get("prices")
    if not isinstance(raw, list):
        raise HZMarketError("prices file must hold a list or an object with a 'prices' list")
    prices = PriceVector(tuple(parse_scalar(v) for v in raw))
    br = best_response(inst.row(ns.agent), prices)
    cert = br.certificate
    _emit(
        {
            "agent": ns.agent,
            "bundle": [format_scalar(v) for v in br.bundle],
            "support": list(br.support),
            "value": format_scalar(cert.optimal_value),
            "alpha": format_scalar(cert.alpha),
            "mu": format_scalar(cert.mu),
            "type": cert.bundle_type.value if cert.bundle_type else None,
        }
    )
    return 0


def _cmd_fixpoint(ns: argparse.Namespace) -> int:
    inst = _instance(ns.input)
    search = search_fixed_point(
        inst,
        restarts=ns.restarts,
        seed=ns.seed,
        gamma=ns.gamma,
        max_steps=ns.max_steps,
        tol=ns.tol,
    )
    best = search.best
    point = best.best_point.to_point()
    doc: dict[str, Any] = {
        "residual": best.best_residual,
        "steps": len(best),
        "restart_seed": best.seed,
        "converged": best.best_residual < ns.tol,
        "equilibrium": equilibrium_document(point),
        "report": verify_equilibrium(inst, point).as_dict(),
    }
    if ns.plot:
        from .plotting import render_trace

        doc["plot"] = render_trace(search, ns.plot)
    _emit(doc)
    return 0


def _cmd_examples(ns: argparse.Namespace) -> int:
    if ns.example == "irrational":
        inst = table1_instance()
        _emit(
            {
                "instance": instance_document(inst),
                "equilibrium": equilibrium_document(closed_form_point(ns.which)),
            }
        )
    elif ns.example == "table1":
        _emit(instance_document(table1_instance()))
    else:
        report = demonstrate_wgs_violation()
        _emit(
            {
                "before": [format_scalar(v) for v in report.before.bundle],
                "after": [format_scalar(v) for v in report.after.bundle],
                "demand_drop": format_scalar(report.demand_drop),
            }
        )
    return 0


def _parse_cli(argv: Optional[list[str]]) -> argparse.Namespace:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--log-level",
        choices=list(_LEVELS),
        default=argparse.SUPPRESS,
        help=f"Logging level for hz_market (default: ${LOG_ENV_VAR} or WARNING)",
    )
    parser = argparse.ArgumentParser(
        prog="hz-market", description="Equilibria of one-sided matching markets", parents=[common]
    )
    parser.set_defaults(log_level=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="exact equilibrium of a 0/1 or two-valued market")
    p.add_argument("--in", dest="input", required=True, help="instance JSON file")
    p.add_argument("--mode", choices=["auto", "unit", "bivalued"], default="auto")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("verify", parents=[common], help="check an equilibrium file against an instance")
    p.add_argument("--in", dest="input", required=True, help="instance JSON file")
    p.add_argument("--eq", required=True, help="equilibrium JSON file")
    p.add_argument("--tol", type=float, default=None, help="absolute tolerance (default: 0 for exact data)")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("best-response", parents=[common], help="one agent's optimal bundle")
    p.add_argument("--in", dest="input", required=True, help="instance JSON file")
    p.add_argument("--agent", type=int, required=True, help="zero-based agent index")
    p.add_argument("--prices", required=True, help="JSON list of prices")
    p.set_defaults(func=_cmd_best_response)

    p = sub.add_parser("fixpoint", parents=[common], help="damped fixed-point search with restarts")
    p.add_argument("--in", dest="input", required=True, help="instance JSON file")
    p.add_argument("--gamma", type=float, default=DEFAULT_DAMPING)
    p.add_argument("--tol", type=float, default=DEFAULT_FIXPOINT_TOL)
    p.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
    p.add_argument("--plot", default=None, help="write a residual plot PNG to this path")
    p.set_defaults(func=_cmd_fixpoint)

    p = sub.add_parser("examples", parents=[common], help="built-in instances and equilibria")
    p.add_argument("example", choices=["irrational", "table1", "wgs"])
    p.add_argument("--which", type=int, choices=[1, 2], default=1)
    p.set_defaults(func=_cmd_examples)
    return parser.parse_args(argv)


def main(argv: Optional[list[str]] = None) -> int:
    ns = _parse_cli(argv)
    _configure_logging(ns.log_level)
    try:
        return int(ns.func(ns))
    except InvariantViolation:
        raise
    except (HZMarketError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())

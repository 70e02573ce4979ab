"""PNG plots of fixed-point search residuals."""
from __future__ import annotations

import os
import tempfile
import warnings
from pathlib import Path
from typing import Sequence, Union

from .fixp_map import FixpointSearch, IterationTrace

__all__ = ["render_trace"]


def _ensure_backend() -> None:
    """Pick TkAgg when a display is around, else the headless Agg backend."""

    import matplotlib  # type: ignore

    try:
        backend = matplotlib.get_backend().lower()
    except Exception:
        backend = ""
    if backend in {"agg", "tkagg"}:
        return
    env_backend = os.environ.get("MPLBACKEND", "").lower()
    if os.environ.get("DISPLAY") or env_backend == "tkagg":
        try:
            matplotlib.use("TkAgg")
        except Exception as exc:
            warnings.warn(
                f"Preferred GUI backend 'TkAgg' unavailable; falling back to 'Agg': {exc}",
                RuntimeWarning,
            )
            matplotlib.use("Agg")
    else:
        matplotlib.use("Agg")


try:  # pragma: no cover - environment dependent
    _ensure_backend()
except Exception:
    # render_trace reports a missing matplotlib when it is actually called.
    pass


Traces = Union[IterationTrace, FixpointSearch, Sequence[IterationTrace]]


def render_trace(traces: Traces, path: str | None = None, *, title: str | None = None) -> str:
    """Plot residual against step on a log scale and return the PNG path.

    Every restart gets a faint line; the restart with the best residual is
    drawn on top.
    """

    try:
        import matplotlib.pyplot as plt  # type: ignore
    except Exception as exc:  # pragma: no cover - environment-dependent
        raise RuntimeError("matplotlib is required to plot residual traces") from exc
    _ensure_backend()

    if isinstance(traces, IterationTrace):
        runs: list[IterationTrace] = [traces]
    elif isinstance(traces, FixpointSearch):
        runs = list(traces.traces)
    else:
        runs = list(traces)
    if not runs:
        raise ValueError("no traces to plot")
    best = min(runs, key=lambda t: t.best_residual if len(t) else float("inf"))

    fig, ax = plt.subplots(figsize=(7, 4))
    for run in runs:
        if run is best or not len(run):
            continue
        ax.plot(range(len(run)), [max(r, 1e-300) for r in run.residuals], color="0.75", linewidth=0.8)
    if len(best):
        ax.plot(
            range(len(best)),
            [max(r, 1e-300) for r in best.residuals],
            color="tab:blue",
            linewidth=1.5,
            label=f"best (seed {best.seed})",
        )
        ax.legend(loc="upper right")
    ax.set_yscale("log")
    ax.set_xlabel("step")
    ax.set_ylabel("residual (sup norm)")
    ax.grid(True, which="both", alpha=0.3)
    if title:
        ax.set_title(title)

    if path is None:
        fd, path = tempfile.mkstemp(suffix=".png")
        os.close(fd)
    png_path = Path(path)
    fig.savefig(png_path, format="png")
    plt.close(fig)
    return str(png_path)

import importlib
from pathlib import Path
from typing import Any

import numpy as np
import pytest

from hz_market.fixp_map import IterationTrace, search_fixed_point
from hz_market.model import MarketInstance


def _search() -> Any:
    inst = MarketInstance.from_rows([[3, 1], [1, 3]])
    return search_fixed_point(inst, restarts=3, seed=1, max_steps=30)


def test_render_trace_headless_uses_agg(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    monkeypatch.delenv("DISPLAY", raising=False)
    monkeypatch.delenv("MPLBACKEND", raising=False)

    import hz_market.plotting as plotting
    importlib.reload(plotting)

    out = plotting.render_trace(_search(), str(tmp_path / "trace.png"), title="two agents")
    assert Path(out).is_file()
    assert Path(out).read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    import matplotlib
    assert matplotlib.get_backend().lower() == "agg"


def test_render_single_trace_to_temp_file() -> None:
    import hz_market.plotting as plotting

    trace = IterationTrace(0.1, 0)
    trace.residuals.extend(float(v) for v in np.geomspace(1.0, 1e-6, 12))
    path = plotting.render_trace(trace)
    try:
        assert Path(path).is_file()
    finally:
        Path(path).unlink(missing_ok=True)


def test_empty_trace_list_is_rejected() -> None:
    import hz_market.plotting as plotting

    with pytest.raises(ValueError, match="no traces"):
        plotting.render_trace([])


def test_missing_gui_backend_warns(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    monkeypatch.setenv("MPLBACKEND", "tkagg")
    monkeypatch.delenv("DISPLAY", raising=False)

    import matplotlib
    original_use = matplotlib.use

    def fail_use(backend: str, *args: Any, **kwargs: Any) -> Any:
        if backend == "TkAgg":
            raise ImportError("TkAgg not available")
        return original_use(backend, *args, **kwargs)

    original_use("pdf")
    monkeypatch.setattr(matplotlib, "use", fail_use)
    import hz_market.plotting as plotting
    with pytest.warns(RuntimeWarning):
        importlib.reload(plotting)

    assert matplotlib.get_backend().lower() == "agg"
    out = plotting.render_trace(_search(), str(tmp_path / "trace.png"))
    assert Path(out).is_file()

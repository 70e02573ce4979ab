import json
import logging
from pathlib import Path
from typing import Any, Iterator

import pytest

from hz_market import cli
from hz_market.errors import InvariantViolation
from hz_market.examples import closed_form_point
from hz_market.model import equilibrium_document, load_equilibrium, load_instance
from hz_market.verify import verify_equilibrium


@pytest.fixture(autouse=True)
def _restore_package_logger() -> Iterator[None]:
    pkg_logger = logging.getLogger("hz_market")
    old_handlers = pkg_logger.handlers[:]
    old_level, old_propagate = pkg_logger.level, pkg_logger.propagate
    try:
        yield
    finally:
        for h in pkg_logger.handlers[:]:
            pkg_logger.removeHandler(h)
        for h in old_handlers:
            pkg_logger.addHandler(h)
        pkg_logger.setLevel(old_level)
        pkg_logger.propagate = old_propagate


def _write(tmp_path: Path, name: str, doc: Any) -> str:
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def _run(capsys: Any, argv: list[str]) -> tuple[int, Any]:
    code = cli.main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def test_solve_identity(tmp_path: Path, capsys: Any) -> None:
    inst = _write(tmp_path, "inst.json", {"n": 2, "utilities": [[1, 0], [0, 1]]})
    code, doc = _run(capsys, ["solve", "--in", inst])
    assert code == 0
    assert doc == {"prices": ["0", "0"], "allocation": [["1", "0"], ["0", "1"]]}


def test_solve_auto_picks_bivalued(tmp_path: Path, capsys: Any) -> None:
    rows = [[0, 3], [0, 3]]
    inst = _write(tmp_path, "inst.json", {"n": 2, "utilities": rows})
    code, doc = _run(capsys, ["solve", "--in", inst])
    assert code == 0
    point = load_equilibrium(json.dumps(doc))
    assert point.exact
    assert verify_equilibrium(load_instance(json.dumps({"utilities": rows})), point).verdict


def test_bivalued_solver_rejects_three_values(tmp_path: Path, capsys: Any) -> None:
    inst = _write(tmp_path, "inst.json", {"n": 3, "utilities": [[0, 1, 2], [0, 0, 0], [1, 1, 1]]})
    assert cli.main(["solve", "--in", inst, "--mode", "bivalued"]) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_missing_instance_file(tmp_path: Path, capsys: Any) -> None:
    assert cli.main(["solve", "--in", str(tmp_path / "nope.json")]) == 2
    assert "cannot read instance" in capsys.readouterr().err


def test_zero_denominator_is_bad_input(tmp_path: Path, capsys: Any) -> None:
    inst = _write(tmp_path, "inst.json", {"n": 1, "utilities": [["1/0"]]})
    assert cli.main(["solve", "--in", inst]) == 2
    assert "cannot parse '1/0'" in capsys.readouterr().err


def test_internal_errors_are_not_reported_as_bad_input(
    tmp_path: Path, monkeypatch: pytest.MonkeyPatch
) -> None:
    def broken(inst: Any) -> Any:
        raise InvariantViolation("cover agents are not all matched to free goods")

    monkeypatch.setattr(cli, "solve_unit", broken)
    inst = _write(tmp_path, "inst.json", {"utilities": [[1, 0], [1, 0]]})
    with pytest.raises(InvariantViolation):
        cli.main(["solve", "--in", inst])


def test_verify_exit_codes(tmp_path: Path, capsys: Any) -> None:
    code, inst_doc = _run(capsys, ["examples", "table1"])
    assert code == 0
    inst = _write(tmp_path, "inst.json", inst_doc)
    eq_doc = equilibrium_document(closed_form_point(1))
    eq = _write(tmp_path, "eq.json", eq_doc)
    code, report = _run(capsys, ["verify", "--in", inst, "--eq", eq])
    assert code == 0
    assert report["verdict"] is True

    eq_doc["prices"][1] += 0.01
    bumped = _write(tmp_path, "bumped.json", eq_doc)
    code, report = _run(capsys, ["verify", "--in", inst, "--eq", bumped, "--tol", "1e-9"])
    assert code == 1
    assert report["verdict"] is False


def test_best_response(tmp_path: Path, capsys: Any) -> None:
    inst = _write(tmp_path, "inst.json", {"utilities": [[10, 2], [0, 0]]})
    prices = _write(tmp_path, "prices.json", ["2", "1/10"])
    code, doc = _run(capsys, ["best-response", "--in", inst, "--agent", "0", "--prices", prices])
    assert code == 0
    assert doc["bundle"] == ["9/19", "10/19"]
    assert doc["support"] == [0, 1]
    assert (doc["alpha"], doc["mu"], doc["value"]) == ("80/19", "30/19", "110/19")
    assert doc["type"] == "D"

    wrapped = _write(tmp_path, "wrapped.json", {"prices": ["2", "1/10"]})
    code, again = _run(capsys, ["best-response", "--in", inst, "--agent", "0", "--prices", wrapped])
    assert again == doc
    assert cli.main(["best-response", "--in", inst, "--agent", "2", "--prices", prices]) == 2


def test_examples(capsys: Any) -> None:
    code, wgs = _run(capsys, ["examples", "wgs"])
    assert code == 0
    assert wgs == {"before": ["9/19", "10/19"], "after": ["4/9", "5/9"], "demand_drop": "5/171"}

    code, irr = _run(capsys, ["examples", "irrational", "--which", "2"])
    assert code == 0
    assert irr["instance"]["n"] == 4
    assert irr["equilibrium"]["allocation"][1][1] == pytest.approx(-0.10086, abs=1e-4)


def test_fixpoint(tmp_path: Path, capsys: Any) -> None:
    inst = _write(tmp_path, "inst.json", {"utilities": [[3, 1], [1, 3]]})
    plot = tmp_path / "trace.png"
    argv = ["fixpoint", "--in", inst, "--restarts", "2", "--max-steps", "50", "--plot", str(plot)]
    code, doc = _run(capsys, argv)
    assert code == 0
    assert set(doc) == {"residual", "steps", "restart_seed", "converged", "equilibrium", "report", "plot"}
    assert 1 <= doc["steps"] <= 50
    assert doc["converged"] == (doc["residual"] < 1e-10)
    assert plot.is_file()


def test_log_level_is_isolated(tmp_path: Path, capsys: Any) -> None:
    root = logging.getLogger()
    old_handlers = root.handlers[:]
    old_level = root.level
    for h in old_handlers:
        root.removeHandler(h)
    try:
        assert cli.main(["examples", "wgs", "--log-level", "DEBUG"]) == 0
        err = capsys.readouterr().err
        assert "[verify] demand for good 0" in err
        assert "[bundle]" in err
        pkg_logger = logging.getLogger("hz_market")
        assert pkg_logger.propagate is False
        assert root.handlers == []
    finally:
        for h in old_handlers:
            root.addHandler(h)
        root.setLevel(old_level)


def test_log_level_from_environment(monkeypatch: pytest.MonkeyPatch, capsys: Any) -> None:
    monkeypatch.setenv("HZ_LOG", "info")
    assert cli.main(["examples", "wgs"]) == 0
    err = capsys.readouterr().err
    assert "[verify]" in err
    assert "[bundle]" not in err

    # Reconfiguring replaces the handler rather than stacking another one.
    assert cli.main(["examples", "wgs", "--log-level", "WARNING"]) == 0
    assert capsys.readouterr().err == ""
    tagged = [h for h in logging.getLogger("hz_market").handlers if getattr(h, "_hz_cli", False)]
    assert len(tagged) == 1

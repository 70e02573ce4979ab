"""JSON reading and writing helpers."""
from __future__ import annotations

import json
from types import ModuleType
from typing import Any, Callable

from .errors import InstanceError

_json5: ModuleType | None
try:  # pragma: no cover - optional dependency
    import json5 as _json5  # type: ignore
except Exception:  # pragma: no cover - fall back to stdlib
    _json5 = None
json5: ModuleType | None = _json5

__all__ = ["load_json", "dump_json", "read_text"]


def _parsers() -> list[Callable[[str], Any]]:
    parsers: list[Callable[[str], Any]] = [json.loads]
    if json5 is not None:
        # Hand-edited fixtures may carry comments or trailing commas.
        parsers.append(json5.loads)
    return parsers


def load_json(text: str, *, what: str = "document") -> Any:  # noqa: ANN401 - generic
    """Parse ``text`` as JSON, falling back to JSON5 when available.

    Raises :class:`InstanceError` naming ``what`` when no parser accepts it.
    """

    last_err: Exception | None = None
    for parse in _parsers():
        try:
            return parse(text)
        except Exception as exc:
            last_err = exc
    raise InstanceError(f"{what} is not valid JSON: {last_err}")


def dump_json(data: Any) -> str:  # noqa: ANN401 - generic
    return json.dumps(data, indent=2)


def read_text(path: str, *, what: str = "file") -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InstanceError(f"cannot read {what} {path!r}: {exc.strerror}") from exc

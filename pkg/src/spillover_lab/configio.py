"""JSON config parsing helpers and a deterministic writer."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

from .core import BinaryBelief
from .errors import ConfigError, ModelError

SCHEMA_VERSION = 1

_MISSING = object()


def load_json(path: str | Path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    return doc


def check_schema(doc: dict) -> None:
    if "schemaVersion" not in doc:
        raise ConfigError("config is missing the required 'schemaVersion' field")
    if doc["schemaVersion"] != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schemaVersion {doc['schemaVersion']!r}")


def section(doc: dict, key: str, default: Any = _MISSING) -> dict:
    value = doc.get(key, default)
    if value is _MISSING:
        raise ConfigError(f"missing section '{key}'")
    if not isinstance(value, dict):
        raise ConfigError(f"'{key}' must be an object")
    return value


def number(doc: dict, key: str, default: Any = _MISSING) -> float:
    value = doc.get(key, default)
    if value is _MISSING:
        raise ConfigError(f"missing numeric field '{key}'")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{key}' must be a number, got {value!r}")
    return float(value)


def integer(doc: dict, key: str, default: Any = _MISSING) -> int:
    value = doc.get(key, default)
    if value is _MISSING:
        raise ConfigError(f"missing integer field '{key}'")
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"'{key}' must be an integer, got {value!r}")
    return value


def string(doc: dict, key: str, choices=None, default: Any = _MISSING) -> str:
    value = doc.get(key, default)
    if value is _MISSING:
        raise ConfigError(f"missing field '{key}'")
    if not isinstance(value, str):
        raise ConfigError(f"'{key}' must be a string, got {value!r}")
    if choices is not None and value not in choices:
        raise ConfigError(f"'{key}' must be one of {sorted(choices)}, got {value!r}")
    return value


def belief(doc: dict, key: str, default: Any = _MISSING) -> BinaryBelief:
    """A belief given as its mass on w1."""
    p = number(doc, key, default)
    try:
        return BinaryBelief(p)
    except ModelError as exc:
        raise ConfigError(f"'{key}': {exc}") from exc


def _format(obj: Any) -> Any:
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return "Infinity" if obj > 0 else ("-Infinity" if obj < 0 else "NaN")
        return _Raw(format(obj, ".17g"))
    if isinstance(obj, dict):
        return {str(k): _format(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_format(v) for v in obj]
    return obj


class _Raw(str):
    pass


def dumps(obj: Any) -> str:
    """JSON with every float written to 17 significant digits and sorted keys."""
    return _encode(_format(obj), 0) + "\n"


def _encode(obj: Any, depth: int) -> str:
    pad = "  " * (depth + 1)
    end = "  " * depth
    if isinstance(obj, _Raw):
        return str(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(obj[k], depth + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + _encode(v, depth + 1) for v in obj) + "\n" + end + "]"
    return json.dumps(obj)


def fmt(value: Any) -> str:
    """CSV cell: floats to 17 significant digits, everything else via str."""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)

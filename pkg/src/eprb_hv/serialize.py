"""Report <-> JSON / CSV conversion.

Reports are frozen dataclasses.  :func:`to_payload` turns one into plain
JSON-able data; :func:`from_payload` rebuilds it from type hints, accepting
either JSON values or the strings read back from CSV.  CSV tables flatten
nested fields into dotted column names (``e_ab.mean``, ``a.x``,
``conditionals.0.p_up``); a list of reports becomes one row per item.
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
import math
import types
import typing
from typing import Any

FLOAT_FORMAT = ".17g"


def format_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, FLOAT_FORMAT)


def to_payload(obj: Any) -> Any:
    if isinstance(obj, enum.Enum):
        return obj.value
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_payload(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, (list, tuple)):
        return [to_payload(x) for x in obj]
    if isinstance(obj, dict):
        return {str(k): to_payload(v) for k, v in obj.items()}
    if isinstance(obj, float):
        return float(obj)
    return obj


def _parse_scalar(tp: Any, value: Any) -> Any:
    if tp is bool:
        if isinstance(value, str):
            if value.lower() not in ("true", "false"):
                raise ValueError(f"not a boolean: {value!r}")
            return value.lower() == "true"
        return bool(value)
    if tp is int:
        return int(value)
    if tp is float:
        return float(value)
    if tp is str:
        return str(value)
    if isinstance(tp, type) and issubclass(tp, enum.Enum):
        return tp(value)
    raise TypeError(f"unsupported field type {tp!r}")


def from_payload(tp: Any, data: Any) -> Any:
    origin = typing.get_origin(tp)
    if origin in (typing.Union, types.UnionType):
        args = typing.get_args(tp)
        if data is None or data == "":
            if type(None) in args:
                return None
        inner = [a for a in args if a is not type(None)]
        return from_payload(inner[0], data)
    if origin in (list, tuple):
        (item, *_) = typing.get_args(tp)
        items = [from_payload(item, x) for x in data]
        return tuple(items) if origin is tuple else items
    if dataclasses.is_dataclass(tp):
        hints = typing.get_type_hints(tp)
        kwargs = {}
        for f in dataclasses.fields(tp):
            if not f.init:
                continue
            if f.name in data:
                kwargs[f.name] = from_payload(hints[f.name], data[f.name])
            elif typing.get_origin(hints[f.name]) in (list, tuple):
                # empty sequences leave no CSV columns behind
                kwargs[f.name] = from_payload(hints[f.name], [])
        return tp(**kwargs)
    return _parse_scalar(tp, data)


def dumps_json(obj: Any, indent: int = 2) -> str:
    """JSON text with floats at 17 significant digits; non-finite floats become strings."""

    def emit(value: Any, level: int) -> str:
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(value, dict):
            if not value:
                return "{}"
            body = ",\n".join(f"{pad}{json.dumps(str(k))}: {emit(v, level + 1)}" for k, v in value.items())
            return "{\n" + body + "\n" + end + "}"
        if isinstance(value, (list, tuple)):
            if not value:
                return "[]"
            body = ",\n".join(pad + emit(v, level + 1) for v in value)
            return "[\n" + body + "\n" + end + "]"
        if isinstance(value, bool) or value is None:
            return json.dumps(value)
        if isinstance(value, float):
            text = format_float(value)
            return text if math.isfinite(value) else json.dumps(text)
        if isinstance(value, int):
            return str(value)
        return json.dumps(value, ensure_ascii=False)

    return emit(to_payload(obj), 0) + "\n"


def canonical_json(obj: Any) -> str:
    return dumps_json(obj, indent=0)


def flatten(payload: Any, prefix: str = "") -> dict[str, Any]:
    if isinstance(payload, dict):
        out: dict[str, Any] = {}
        for k, v in payload.items():
            out.update(flatten(v, f"{prefix}{k}."))
        return out
    if isinstance(payload, list):
        out = {}
        for i, v in enumerate(payload):
            out.update(flatten(v, f"{prefix}{i}."))
        return out
    return {prefix[:-1]: payload}


def unflatten(flat: dict[str, Any]) -> Any:
    root: dict[str, Any] = {}
    for key, value in flat.items():
        node = root
        *parents, leaf = key.split(".")
        for part in parents:
            node = node.setdefault(part, {})
        node[leaf] = value
    return _lists_from_digit_keys(root)


def _lists_from_digit_keys(node: Any) -> Any:
    if not isinstance(node, dict):
        return node
    fixed = {k: _lists_from_digit_keys(v) for k, v in node.items()}
    if fixed and all(k.isdigit() for k in fixed):
        return [fixed[str(i)] for i in range(len(fixed))]
    return fixed


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def dumps_csv(report: Any) -> str:
    """CSV text: header row, LF line endings, one row per report (or per list item)."""
    items = list(report) if isinstance(report, (list, tuple)) else [report]
    rows = [flatten(to_payload(item)) for item in items]
    header = list(rows[0]) if rows else []
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(row.get(col)) for col in header])
    return buf.getvalue()


def loads_csv(tp: Any, text: str, many: bool = False) -> Any:
    """Inverse of :func:`dumps_csv` for report type ``tp``."""
    reader = csv.DictReader(io.StringIO(text))
    items = [from_payload(tp, unflatten(dict(row))) for row in reader]
    if many:
        return items
    if len(items) != 1:
        raise ValueError(f"expected one row, found {len(items)}")
    return items[0]

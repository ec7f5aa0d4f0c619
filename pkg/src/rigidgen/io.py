"""Line-based object files and the JSON report envelope.

Every object file starts with one header line, e.g.::

    # oa q=2 n=2 t=1 N=2
    1 1
    2 2

Symbols, points and permutation images are 1-based.  Blank lines and
further ``#`` comment lines are ignored.
"""

from __future__ import annotations

import io
import json
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, TextIO

from .core import RigidgenError

SCHEMA_ID = "rigidgen-report/1"

HEADER_KEYS = {
    "oa": ("q", "n", "t", "N"),
    "design": ("v", "k", "t", "N", "lambda"),
    "perm": ("n", "t", "N"),
}
OPTIONAL_KEYS = {"design": ("lambda",)}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": SCHEMA_ID,
    "type": "object",
    "required": ["schema", "command", "status", "result"],
    "additionalProperties": False,
    "properties": {
        "schema": {"const": SCHEMA_ID},
        "command": {"type": "string"},
        "status": {"enum": ["pass", "fail", "error"]},
        "result": {"type": "object"},
        "error": {
            "type": "object",
            "required": ["kind", "message"],
            "properties": {
                "kind": {"type": "string"},
                "message": {"type": "string"},
                "line": {"type": ["integer", "null"]},
            },
        },
        "telemetry": {
            "type": "object",
            "properties": {
                "seed": {"type": ["integer", "null"]},
                "elapsed_s": {"type": "number"},
            },
        },
    },
}


class ParseError(RigidgenError, ValueError):
    def __init__(self, message: str, line: int | None = None, path=None):
        where = f"{path or '<input>'}:{line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
        self.path = path


@dataclass
class ObjectFile:
    family: str
    params: dict
    rows: list


def _fmt(value) -> str:
    return str(Fraction(value)) if isinstance(value, Fraction) else str(value)


def format_object(family: str, params: dict, rows: Iterable) -> str:
    rows = [tuple(r) for r in rows]
    if family not in HEADER_KEYS:
        raise ValueError(f"unknown family {family!r}")
    values = dict(params, N=len(rows))
    fields = []
    for key in HEADER_KEYS[family]:
        if key in values and values[key] is not None:
            fields.append(f"{key}={_fmt(values[key])}")
    lines = [f"# {family} " + " ".join(fields)]
    lines += [" ".join(str(s) for s in r) for r in rows]
    return "\n".join(lines) + "\n"


def write_object(dest, family: str, params: dict, rows: Iterable) -> None:
    text = format_object(family, params, rows)
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(text)


def _parse_header(line: str, path, expected: str | None) -> tuple[str, dict]:
    parts = line.lstrip("#").split()
    if not line.startswith("#") or not parts:
        raise ParseError("missing '# <family> key=value ...' header", 1, path)
    family = parts[0]
    if family not in HEADER_KEYS:
        raise ParseError(f"unknown family {family!r}", 1, path)
    if expected is not None and family != expected:
        raise ParseError(f"expected a {expected} file, found {family}", 1, path)
    params = {}
    for item in parts[1:]:
        key, sep, value = item.partition("=")
        if not sep or key not in HEADER_KEYS[family]:
            raise ParseError(f"bad header field {item!r}", 1, path)
        try:
            params[key] = Fraction(value) if key == "lambda" else int(value)
        except ValueError:
            raise ParseError(f"bad value in header field {item!r}", 1, path) from None
    required = [k for k in HEADER_KEYS[family]
                if k not in OPTIONAL_KEYS.get(family, ())]
    missing = [k for k in required if k not in params]
    if missing:
        raise ParseError(f"header lacks {', '.join(missing)}", 1, path)
    return family, params


def _check_row(family: str, params: dict, row: tuple, lineno: int, path):
    if family == "oa":
        q, n = params["q"], params["n"]
        if len(row) != n:
            raise ParseError(f"expected {n} symbols, got {len(row)}", lineno, path)
        bad = [s for s in row if not 1 <= s <= q]
        if bad:
            raise ParseError(f"symbol {bad[0]} outside 1..{q}", lineno, path)
    elif family == "design":
        v, k = params["v"], params["k"]
        if len(row) != k:
            raise ParseError(f"expected {k} points, got {len(row)}", lineno, path)
        if any(not 1 <= s <= v for s in row):
            raise ParseError(f"point outside 1..{v}", lineno, path)
        if any(a >= b for a, b in zip(row, row[1:])):
            raise ParseError("block must be strictly increasing", lineno, path)
    else:
        n = params["n"]
        if sorted(row) != list(range(1, n + 1)):
            raise ParseError(f"not a permutation of 1..{n}", lineno, path)


def parse_object(text: str, expected: str | None = None, path=None) -> ObjectFile:
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty file", 1, path)
    family, params = _parse_header(lines[0].strip(), path, expected)
    rows = []
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            row = tuple(int(s) for s in line.split())
        except ValueError:
            raise ParseError(f"non-integer entry in {line!r}", lineno, path) from None
        _check_row(family, params, row, lineno, path)
        rows.append(row)
    if len(rows) != params["N"]:
        raise ParseError(f"header says N={params['N']} but found {len(rows)} rows",
                         None, path)
    return ObjectFile(family, params, rows)


def read_object(source, expected: str | None = None) -> ObjectFile:
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            return parse_object(fh.read(), expected, path=os.fspath(source))
    return parse_object(source.read(), expected)


def make_report(command: str, status: str, result: dict, *, error: dict | None = None,
                telemetry: dict | None = None) -> dict:
    report = {"schema": SCHEMA_ID, "command": command, "status": status,
              "result": result}
    if error is not None:
        report["error"] = error
    if telemetry is not None:
        report["telemetry"] = telemetry
    return report


def to_jsonable(obj):
    """Convert Fractions, tuples and numpy scalars into plain JSON values."""
    if isinstance(obj, Fraction):
        return int(obj) if obj.denominator == 1 else str(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [to_jsonable(v) for v in items]
    if hasattr(obj, "item") and callable(obj.item):
        return obj.item()
    return obj


def dump_report(report: dict, stream: TextIO, fmt: str = "json") -> None:
    report = to_jsonable(report)
    if fmt == "json":
        json.dump(report, stream, indent=2, sort_keys=True)
        stream.write("\n")
        return
    buf = io.StringIO()
    _write_text(report, buf, 0)
    stream.write(buf.getvalue())


def _write_text(obj, out: TextIO, depth: int):
    pad = "  " * depth
    if isinstance(obj, dict):
        for key in sorted(obj):
            value = obj[key]
            if isinstance(value, (dict, list)) and value:
                out.write(f"{pad}{key}:\n")
                _write_text(value, out, depth + 1)
            else:
                out.write(f"{pad}{key}: {json.dumps(value)}\n")
    elif isinstance(obj, list):
        for value in obj:
            if isinstance(value, (dict, list)) and value:
                out.write(f"{pad}-\n")
                _write_text(value, out, depth + 1)
            else:
                out.write(f"{pad}- {json.dumps(value)}\n")

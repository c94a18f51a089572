"""Canonical text records.

One syntax serves wire bodies, scenario scripts and traces::

    kind key=value key=value ...

Keys are emitted in sorted order. Floats always carry exactly six decimals,
ints are plain decimals, booleans are ``true``/``false`` and strings are bare
when unambiguous, JSON-quoted otherwise. Wire bodies omit the leading kind.
"""

from __future__ import annotations

import json
import math
import re
from typing import Iterable, Iterator, Mapping, Union

Value = Union[bool, int, float, str]

_KEY = re.compile(r"[a-z_][a-z0-9_]*\Z")
_BARE = re.compile(r"[A-Za-z_][A-Za-z0-9_.:/+-]*\Z")
_INT = re.compile(r"[+-]?\d+\Z")
_FLOAT = re.compile(r"[+-]?(\d+\.\d*|\.\d+|\d+(\.\d*)?[eE][+-]?\d+)\Z")
_decoder = json.JSONDecoder()


def format_value(v: Value) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ValueError(f"non-finite float {v!r}")
        s = f"{v:.6f}"
        return "0.000000" if s == "-0.000000" else s
    if isinstance(v, str):
        if _BARE.match(v) and v not in ("true", "false"):
            return v
        return json.dumps(v, ensure_ascii=False)
    raise TypeError(f"unsupported record value {v!r}")


def parse_value(token: str) -> Value:
    if token == "true":
        return True
    if token == "false":
        return False
    if _INT.match(token):
        return int(token)
    if _FLOAT.match(token):
        return float(token)
    if token.startswith('"'):
        value, end = _decoder.raw_decode(token)
        if end != len(token) or not isinstance(value, str):
            raise ValueError(f"bad quoted string {token!r}")
        return value
    if _BARE.match(token):
        return token
    raise ValueError(f"bad value {token!r}")


def format_fields(fields: Mapping[str, Value]) -> str:
    parts = []
    for key in sorted(fields):
        if not _KEY.match(key):
            raise ValueError(f"bad key {key!r}")
        parts.append(f"{key}={format_value(fields[key])}")
    return " ".join(parts)


def _tokens(text: str) -> Iterator[str]:
    i, n = 0, len(text)
    while i < n:
        if text[i] == " ":
            i += 1
            continue
        start = i
        while i < n and text[i] != " ":
            if text[i] == '"':
                try:
                    _, end = _decoder.raw_decode(text, i)
                except json.JSONDecodeError as exc:
                    raise ValueError(f"unterminated string at column {i + 1}") from exc
                i = end
            else:
                i += 1
        yield text[start:i]


def parse_fields(text: str) -> dict[str, Value]:
    fields: dict[str, Value] = {}
    for tok in _tokens(text):
        key, sep, raw = tok.partition("=")
        if not sep or not _KEY.match(key):
            raise ValueError(f"expected key=value, got {tok!r}")
        if key in fields:
            raise ValueError(f"duplicate key {key!r}")
        fields[key] = parse_value(raw)
    return fields


def format_record(kind: str, fields: Mapping[str, Value]) -> str:
    if not _KEY.match(kind):
        raise ValueError(f"bad record kind {kind!r}")
    body = format_fields(fields)
    return f"{kind} {body}" if body else kind


def parse_record(line: str) -> tuple[str, dict[str, Value]]:
    line = line.strip()
    kind, _, rest = line.partition(" ")
    if not _KEY.match(kind):
        raise ValueError(f"bad record kind {kind!r}")
    return kind, parse_fields(rest)


def iter_records(lines: Iterable[str]) -> Iterator[tuple[int, str, dict[str, Value]]]:
    """Yield ``(lineno, kind, fields)``; blank lines and ``#`` comments are skipped."""
    for lineno, line in enumerate(lines, 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            kind, fields = parse_record(stripped)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from exc
        yield lineno, kind, fields

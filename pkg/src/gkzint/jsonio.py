"""Deterministic JSON emission for report documents.

The standard json module prints floats with the shortest round-tripping
repr, which varies in digit count. Reports instead pin every float to 17
significant digits, which round-trips binary64 exactly and keeps output
byte-stable across runs and platforms. Keys keep insertion order; callers
construct documents deterministically.
"""

from __future__ import annotations

import math


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return f"{x:.17g}"


def _escape(s: str) -> str:
    out = ['"']
    for ch in s:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ch == "\r":
            out.append("\\r")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def _emit(obj, indent: int, lines: list[str], pad: str) -> None:
    nxt = pad + " " * indent
    if obj is None:
        lines.append("null")
    elif obj is True:
        lines.append("true")
    elif obj is False:
        lines.append("false")
    elif isinstance(obj, str):
        lines.append(_escape(obj))
    elif isinstance(obj, int):
        lines.append(str(obj))
    elif isinstance(obj, float):
        lines.append(_fmt_float(obj))
    elif isinstance(obj, dict):
        if not obj:
            lines.append("{}")
            return
        lines.append("{\n")
        for i, (k, v) in enumerate(obj.items()):
            if not isinstance(k, str):
                raise TypeError(f"document keys must be strings, got {k!r}")
            lines.append(nxt + _escape(k) + ": ")
            _emit(v, indent, lines, nxt)
            lines.append(",\n" if i < len(obj) - 1 else "\n")
        lines.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        if not len(obj):
            lines.append("[]")
            return
        lines.append("[\n")
        for i, v in enumerate(obj):
            lines.append(nxt)
            _emit(v, indent, lines, nxt)
            lines.append(",\n" if i < len(obj) - 1 else "\n")
        lines.append(pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} into a report")


def dumps(doc, indent: int = 2) -> str:
    """Serialize a report document; floats carry 17 significant digits."""
    lines: list[str] = []
    _emit(doc, indent, lines, "")
    return "".join(lines)

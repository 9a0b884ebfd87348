"""``key=value`` configuration files.

One assignment per line; ``#`` starts a comment. Keys are validated against
a known set and values are coerced to the type of the default they replace.
Tuples are written comma-separated and ``None`` as ``none``.
"""

from __future__ import annotations

from pathlib import Path

from .errors import ParseError


def parse_kv(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected key=value, got {line!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ParseError("empty key", lineno)
        if key in out:
            raise ParseError(f"duplicate key {key!r}", lineno)
        out[key] = value
    return out


def read_kv(path) -> dict:
    return parse_kv(Path(path).read_text())


def format_value(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (tuple, list)):
        return ",".join(format_value(x) for x in v)
    return str(v)


def format_kv(items: dict) -> str:
    return "".join(f"{k} = {format_value(v)}\n" for k, v in items.items())


def coerce(key, text, default, kind=None):
    """Convert ``text`` to the type of ``default`` (or ``kind`` when given)."""
    t = text.strip()
    kind = kind or type(default)
    if t.lower() == "none":
        return None
    try:
        if kind is bool:
            low = t.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(t)
        if kind is int:
            return int(float(t)) if "e" in t.lower() else int(t)
        if kind is float:
            return float(t)
        if kind is tuple:
            inner = type(default[0]) if default else str
            return tuple(coerce(key, x, None, inner) for x in t.split(",") if x.strip())
        return kind(t)
    except ValueError:
        raise ValueError(f"bad value {text!r} for {key}") from None

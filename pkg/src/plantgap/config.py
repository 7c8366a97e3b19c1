"""Flat key-value config files and run manifests.

One "key = value" per line, '#' starts a comment, no nesting. Values are
coerced to bool/int/float when they parse as such; comma-separated values
become lists of coerced scalars.
"""

from __future__ import annotations


def _coerce_scalar(raw: str):
    text = raw.strip()
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    if low in ("none", "null", ""):
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def coerce_value(raw: str):
    text = raw.strip()
    if "," in text:
        return [_coerce_scalar(part) for part in text.split(",")]
    return _coerce_scalar(text)


def parse_config_text(text: str) -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, raw = body.split("=", 1)
        key = key.strip()
        if not key:
            raise ValueError(f"line {lineno}: empty key")
        values[key] = coerce_value(raw)
    return values


def read_config(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def _render(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "none"
    if isinstance(value, (list, tuple)):
        return ", ".join(_render(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_config(values: dict) -> str:
    lines = [f"{key} = {_render(values[key])}" for key in sorted(values)]
    return "\n".join(lines) + "\n"


def write_config(path, values: dict):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_config(values))


write_manifest = write_config

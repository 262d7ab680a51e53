"""Flat ``key = value`` run configuration files.

Blank lines and ``#`` comments are ignored. Values stay strings; consumers
coerce them against their own dataclass field types.
"""
from __future__ import annotations

from pathlib import Path


class ConfigError(ValueError):
    pass


def parse_config(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key.replace("-", "_")] = value
    return out


def load_config(path: str | Path | None) -> dict[str, str]:
    if path is None:
        return {}
    return parse_config(Path(path).read_text())


def merge(config: dict, overrides: dict) -> dict:
    """Command-line values win over file values; ``None`` means 'not given'."""
    merged = dict(config)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    return merged

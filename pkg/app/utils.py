import math
from typing import Any

import numpy as np

from .errors import ConfigError


def harmonic_number(n: int) -> float:
    """n-th harmonic number, H(0) = 0."""
    if n <= 0:
        return 0.0
    return math.fsum(1.0 / k for k in range(1, n + 1))


def format_number(value) -> str:
    """
    Numbers go out with 12 significant digits; None becomes an empty cell.
    """
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


def make_rng(master_seed: int, *spawn_key: int) -> np.random.Generator:
    seq = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in spawn_key))
    return np.random.default_rng(seq)


def derive_seed(master_seed: int, *spawn_key: int) -> int:
    seq = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in spawn_key))
    return int(seq.generate_state(1, dtype=np.uint32)[0])


def _parse_value(raw: str) -> Any:
    s = raw.strip()
    if "," in s:
        return [part.strip() for part in s.split(",") if part.strip()]
    return s


def parse_flat_config(text: str, key_lines: dict[str, int] | None = None) -> dict:
    """
    Parses the flat `dotted.key = value` format into nested dicts.

    - `#` starts a comment, blank lines are skipped
    - comma-separated values become lists of strings
    - type coercion is left to the pydantic models

    `key_lines`, when given, receives the line number of every key.
    """
    out: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigError("expected 'key = value'", line=lineno)

        key, raw = content.split("=", 1)
        key = key.strip()
        if not key or any(not part for part in key.split(".")):
            raise ConfigError("empty key segment", line=lineno, key=key)

        node = out
        parts = key.split(".")
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError("key used both as value and section", line=lineno, key=key)
            node = child

        leaf = parts[-1]
        if leaf in node:
            raise ConfigError("duplicate key", line=lineno, key=key)
        node[leaf] = _parse_value(raw)
        if key_lines is not None:
            key_lines[key] = lineno
    return out

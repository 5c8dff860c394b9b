"""Runtime limits. Values are read on every call so tests and the CLI can
override them through the environment."""

from __future__ import annotations

import os

DEFAULT_MAX_DEPTH = 16
DEFAULT_BUDGET = 1 << 20


def max_depth() -> int:
    raw = os.environ.get("MTOOL_MAX_DEPTH")
    if raw is None:
        return DEFAULT_MAX_DEPTH
    try:
        value = int(raw)
    except ValueError:
        return DEFAULT_MAX_DEPTH
    return max(value, 0)


def budget() -> int:
    raw = os.environ.get("MTOOL_BUDGET")
    if raw is None:
        return DEFAULT_BUDGET
    try:
        return max(int(raw), 1)
    except ValueError:
        return DEFAULT_BUDGET

"""Canonical ordering and lossless JSON encoding of the package's values."""

from __future__ import annotations

import os
from typing import Any

DEFAULT_STATE_CAP = 2_000_000
STATE_CAP_ENV = "TASKSEQ_STATE_CAP"


def state_cap(cap: int | None = None) -> int:
    if cap is not None:
        return cap
    return int(os.environ.get(STATE_CAP_ENV, DEFAULT_STATE_CAP))


def sort_key(x: Any):
    """Total order over None, numbers, strings, tuples and frozensets.

    Used wherever output must not depend on hash order: simplex
    serialization, counterexample tie-breaks, state numbering.
    """
    if x is None:
        return (0,)
    if isinstance(x, (bool, int, float)):
        return (1, x)
    if isinstance(x, str):
        return (2, x)
    if isinstance(x, tuple):
        return (3, tuple(sort_key(v) for v in x))
    if isinstance(x, (frozenset, set)):
        return (4, tuple(sorted(sort_key(v) for v in x)))
    return (5, repr(x))


def canonical_sorted(items):
    return sorted(items, key=sort_key)


def shortest_first(items):
    """Sort sequences by length, then lexicographically."""
    return sorted(items, key=lambda s: (len(s), sort_key(tuple(s))))


def encode(x: Any):
    """Encode a nested value as JSON-compatible data, tagging tuples and sets."""
    if x is None or isinstance(x, (bool, int, float, str)):
        return x
    if isinstance(x, tuple):
        return {"t": [encode(v) for v in x]}
    if isinstance(x, (frozenset, set)):
        return {"s": [encode(v) for v in canonical_sorted(x)]}
    raise TypeError(f"cannot encode {type(x).__name__}")


def decode(x: Any):
    if isinstance(x, dict):
        if "t" in x:
            return tuple(decode(v) for v in x["t"])
        if "s" in x:
            return frozenset(decode(v) for v in x["s"])
        raise ValueError(f"unknown tagged value {x!r}")
    if isinstance(x, list):
        raise ValueError("bare JSON arrays are not valid encoded values")
    return x

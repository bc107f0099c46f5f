"""Input validation helpers shared by the estimators and the stage functions."""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Mapping
from typing import Any, Sequence


def check_texts(X: Any, *, name: str = "X") -> list[str]:
    """Return ``X`` as a list of source strings, rejecting anything else."""
    if isinstance(X, (str, bytes)):
        raise TypeError(f"{name} must be a sequence of strings, not a single string")
    try:
        items = list(X)
    except TypeError:
        raise TypeError(f"{name} must be an iterable of strings") from None
    for i, item in enumerate(items):
        if not isinstance(item, str):
            raise TypeError(f"{name}[{i}] is {type(item).__name__}, expected str")
    return items


def check_term_counts(X: Any, *, name: str = "X") -> list[Counter]:
    """Accept a sequence of term multisets (mappings term -> count)."""
    if isinstance(X, (str, bytes)) or isinstance(X, Mapping):
        raise TypeError(f"{name} must be a sequence of term multisets")
    out = []
    for i, item in enumerate(X):
        if not isinstance(item, Mapping):
            raise TypeError(f"{name}[{i}] is {type(item).__name__}, expected a mapping")
        for term, count in item.items():
            if not isinstance(term, str):
                raise TypeError(f"{name}[{i}] has non-string term {term!r}")
            if count < 0:
                raise ValueError(f"{name}[{i}] has negative count for {term!r}")
        out.append(Counter(item))
    return out


def check_paths(paths: Sequence[str] | None, n: int) -> list[str]:
    """Default to positional names; otherwise require ``n`` unique strings."""
    if paths is None:
        width = len(str(max(n - 1, 0)))
        return [f"doc{i:0{width}d}" for i in range(n)]
    paths = [str(p) for p in paths]
    if len(paths) != n:
        raise ValueError(f"got {len(paths)} paths for {n} documents")
    if len(set(paths)) != n:
        raise ValueError("document paths must be unique")
    return paths


def check_positive_int(value: Any, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return value


def check_unit_interval(value: Any, name: str) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValueError(f"{name} must be a real number, got {value!r}") from None
    if math.isnan(value) or not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return value


"""File-level train/valid/test assignment and its CSV form."""

from __future__ import annotations

import csv
import io
import math
import os
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from sklearn.base import BaseEstimator

from .extraction import SET_LABELS

__all__ = [
    "BadRatios",
    "DEFAULT_RATIOS",
    "DEFAULT_SEED",
    "FileSplitter",
    "SplitAssignment",
    "assign_splits",
    "read_split_csv",
    "split_counts",
    "write_split_csv",
]

DEFAULT_RATIOS = (0.7, 0.1, 0.2)
DEFAULT_SEED = 42


class BadRatios(ValueError):
    pass


@dataclass
class SplitAssignment:
    entries: dict[str, str]
    seed: int = DEFAULT_SEED
    ratios: tuple[float, float, float] = DEFAULT_RATIOS

    def files(self, label: str) -> list[str]:
        return sorted(f for f, lab in self.entries.items() if lab == label)

    def counts(self) -> dict[str, int]:
        out = dict.fromkeys(SET_LABELS, 0)
        for label in self.entries.values():
            out[label] += 1
        return out


def _check_ratios(ratios: Sequence[float]) -> tuple[float, float, float]:
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3 or any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise BadRatios(f"ratios must be three non-negative numbers summing to 1, got {ratios}")
    return ratios


def split_counts(n: int, ratios: Sequence[float] = DEFAULT_RATIOS) -> tuple[int, int, int]:
    """(train, valid, test) sizes: floors for valid and test, remainder to train."""
    _, r_valid, r_test = _check_ratios(ratios)
    # Fraction(repr) keeps 0.1 * 30 from flooring to 2
    n_valid = math.floor(Fraction(repr(r_valid)) * n)
    n_test = math.floor(Fraction(repr(r_test)) * n)
    return n - n_valid - n_test, n_valid, n_test


def assign_splits(
    files: Sequence[str], ratios: Sequence[float] = DEFAULT_RATIOS, seed: int = DEFAULT_SEED
) -> SplitAssignment:
    ratios = _check_ratios(ratios)
    ordered = sorted(set(files))
    if len(ordered) != len(files):
        raise ValueError("file list contains duplicates")
    if not ordered:
        raise ValueError("no files to split")
    shuffled = list(ordered)
    random.Random(seed).shuffle(shuffled)
    n_train, n_valid, _ = split_counts(len(shuffled), ratios)
    entries = {}
    for i, path in enumerate(shuffled):
        if i < n_train:
            entries[path] = "train"
        elif i < n_train + n_valid:
            entries[path] = "valid"
        else:
            entries[path] = "test"
    return SplitAssignment(dict(sorted(entries.items())), seed=seed, ratios=ratios)


def render_split_csv(assignment: SplitAssignment) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["file", "set"])
    for path in sorted(assignment.entries):
        label = assignment.entries[path]
        if label not in SET_LABELS:
            raise ValueError(f"invalid set label {label!r} for {path}")
        if any(ch in path for ch in ',"\n\r'):
            raise ValueError(f"file path cannot be written to the split CSV: {path!r}")
        writer.writerow([path, label])
    return buf.getvalue()


def write_split_csv(assignment: SplitAssignment, path: str | os.PathLike) -> None:
    text = render_split_csv(assignment)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def read_split_csv(path: str | os.PathLike) -> SplitAssignment:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["file", "set"]:
            raise ValueError(f"{path}: expected header 'file,set', got {header}")
        entries = {}
        for row in reader:
            if len(row) != 2 or row[1] not in SET_LABELS:
                raise ValueError(f"{path}: bad row {row}")
            entries[row[0]] = row[1]
    return SplitAssignment(entries)


class FileSplitter(BaseEstimator):
    """Seeded 70/10/20-style file assignment behind the estimator interface.

    ``fit_predict(files)`` returns the label of each input file in input order.
    """

    def __init__(self, ratios=DEFAULT_RATIOS, seed=DEFAULT_SEED):
        self.ratios = ratios
        self.seed = seed

    def fit(self, X, y=None):
        self.assignment_ = assign_splits(list(X), self.ratios, self.seed)
        return self

    def predict(self, X):
        return [self.assignment_.entries[f] for f in X]

    def fit_predict(self, X, y=None):
        X = list(X)
        return self.fit(X).predict(X)

"""Corpus characteristics per split and the type-frequency distribution."""

from __future__ import annotations

import csv
import io
import json
import os
import tokenize
from collections import Counter
from dataclasses import asdict, dataclass, field, fields
from typing import Iterable, Iterator, Mapping

from ._source import lex
from .docstrings import documented_params
from .emit import ProjectRecord
from .extraction import SET_LABELS, ModuleRecord
from .split import SplitAssignment

__all__ = [
    "CorpusStats",
    "SplitStats",
    "TypeFrequency",
    "corpus_stats",
    "count_sloc",
    "iter_annotations",
    "render_table",
    "top_n_types",
    "write_stats_json",
    "write_type_csv",
]

SPLITS = ("all",) + SET_LABELS


def count_sloc(source_text: str) -> int:
    """Lines holding at least one non-comment token; a multi-line string counts every line."""
    try:
        lexemes = lex(source_text)
    except (tokenize.TokenError, IndentationError, SyntaxError):
        return sum(
            1 for line in source_text.splitlines() if line.strip() and not line.lstrip().startswith("#")
        )
    lines = set()
    for lx in lexemes:
        lines.update(range(lx.start[0], lx.end[0] + 1))
    return len(lines)


@dataclass
class SplitStats:
    repositories: int = 0
    sloc: int = 0
    files: int = 0
    files_with_annotations: int = 0
    functions: int = 0
    functions_with_comment: int = 0
    functions_with_ret_type: int = 0
    arguments: int = 0
    arguments_with_comment: int = 0
    arguments_with_annotations: int = 0
    types_total: int = 0
    types_unique: int = 0


@dataclass
class CorpusStats:
    splits: dict[str, SplitStats] = field(default_factory=lambda: {s: SplitStats() for s in SPLITS})

    def __getitem__(self, split: str) -> SplitStats:
        return self.splits[split]

    def to_dict(self) -> dict[str, dict[str, int]]:
        return {s: asdict(self.splits[s]) for s in SPLITS}


@dataclass(frozen=True)
class TypeFrequency:
    type_name: str
    occurrences: int
    share_pct: float
    cumulative_pct: float


def iter_annotations(module: ModuleRecord) -> Iterator[str]:
    """Every type annotation occurrence in a module; receivers are skipped."""
    yield from (t for t in module.variables.values() if t)
    for cls in module.classes:
        yield from (t for t in cls.variables.values() if t)
    for func in module.all_functions():
        yield from (t for t in func.typed_params().values() if t)
        if func.ret_type:
            yield func.ret_type
        yield from (t for t in func.variables.values() if t)


def _label(project: str, path: str, module: ModuleRecord, assignment: SplitAssignment | None) -> str:
    if assignment is not None:
        return assignment.entries.get(f"{project}/{path}", module.set_label)
    return module.set_label


def corpus_stats(
    records: Iterable[ProjectRecord],
    assignment: SplitAssignment | None = None,
    sloc: Mapping[str, int] | None = None,
) -> CorpusStats:
    """Count the dataset characteristics; ``sloc`` maps ``author/repo/path`` to line counts."""
    stats = CorpusStats()
    repos: dict[str, set[str]] = {s: set() for s in SPLITS}
    types: dict[str, set[str]] = {s: set() for s in SPLITS}
    for record in records:
        for path, module in record.src_files.items():
            label = _label(record.name, path, module, assignment)
            targets = ["all"] + ([label] if label in SET_LABELS else [])
            annotations = list(iter_annotations(module))
            funcs = list(module.all_functions())
            args = [f.typed_params() for f in funcs]
            documented = [set(documented_params(f.docstring.long_descr)) for f in funcs]
            for split in targets:
                s = stats[split]
                repos[split].add(record.name)
                types[split].update(annotations)
                s.sloc += (sloc or {}).get(f"{record.name}/{path}", 0)
                s.files += 1
                s.files_with_annotations += module.has_annotations
                s.functions += len(funcs)
                s.functions_with_comment += sum(1 for f in funcs if f.docstring.func)
                s.functions_with_ret_type += sum(1 for f in funcs if f.ret_type)
                s.arguments += sum(len(a) for a in args)
                s.arguments_with_comment += sum(
                    1 for a, doc in zip(args, documented) for name in a if name in doc
                )
                s.arguments_with_annotations += sum(1 for a in args for t in a.values() if t)
                s.types_total += len(annotations)
    for split in SPLITS:
        stats[split].repositories = len(repos[split])
        stats[split].types_unique = len(types[split])
    return stats


def top_n_types(records: Iterable[ProjectRecord], n: int = 10) -> list[TypeFrequency]:
    if n < 1:
        raise ValueError("n must be at least 1")
    counts: Counter = Counter()
    for record in records:
        for module in record.src_files.values():
            counts.update(iter_annotations(module))
    total = sum(counts.values())
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:n]
    out, running = [], 0
    for name, count in ranked:
        running += count
        out.append(TypeFrequency(name, count, 100.0 * count / total, 100.0 * running / total))
    return out


def render_table(stats: CorpusStats) -> str:
    names = [f.name for f in fields(SplitStats)]
    width = max(len(n) for n in names) + 2
    lines = ["metric".ljust(width) + "".join(s.rjust(12) for s in SPLITS)]
    for name in names:
        row = name.ljust(width)
        for split in SPLITS:
            row += f"{getattr(stats[split], name):>12,}"
        lines.append(row)
    return "\n".join(lines) + "\n"


def write_stats_json(stats: CorpusStats, path: str | os.PathLike, top: list[TypeFrequency] = ()) -> None:
    payload = {
        "splits": stats.to_dict(),
        "top_types": [asdict(t) for t in top],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, ensure_ascii=False)
        fh.write("\n")


def write_type_csv(top: list[TypeFrequency], path: str | os.PathLike) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["type", "share_pct"])
    for t in top:
        writer.writerow([t.type_name, f"{t.share_pct:.4f}"])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())

"""Per-file processing and the corpus-level stages the CLI strings together."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Iterable, Sequence, Union

from sklearn.base import BaseEstimator, TransformerMixin

from ._source import decode_source
from ._validation import check_texts
from .dedup import (
    DEFAULT_K,
    DEFAULT_THRESHOLD,
    DedupReport,
    DuplicateCluster,
    NearDuplicateDetector,
)
from .emit import ProjectRecord
from .extraction import (
    UNASSIGNED,
    FunctionRecord,
    ModuleRecord,
    ParseFailure,
    SourceIndex,
    extract_module,
    parse_module,
)
from .ingest import SourceFileEntry, discover_source_files
from .nlp import normalize_identifier
from .seq import sequence_pair
from .split import SplitAssignment
from .stats import count_sloc

__all__ = [
    "TypeHintExtractor",
    "discover_corpus",
    "find_duplicates",
    "normalize_occurrences",
    "process_corpus",
    "process_source",
    "read_source",
    "sloc_for",
]

log = logging.getLogger(__name__)

Outcome = Union[ModuleRecord, ParseFailure]


def read_source(path: str | os.PathLike, file_path: str = "") -> str | ParseFailure:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        return ParseFailure(file_path or str(path), f"unreadable: {exc}")
    try:
        return decode_source(data)
    except (UnicodeDecodeError, SyntaxError, LookupError) as exc:
        return ParseFailure(file_path or str(path), f"undecodable: {exc}")


def _normalize_function(func: FunctionRecord) -> FunctionRecord:
    occur = {
        name: [[normalize_identifier(t) if t.isidentifier() else t for t in w] for w in windows]
        for name, windows in func.params_occur.items()
    }
    return replace(func, params_occur=occur)


def normalize_occurrences(record: ModuleRecord) -> ModuleRecord:
    """Split and lemmatize the identifiers inside every parameter-usage window."""
    record.funcs = [_normalize_function(f) for f in record.funcs]
    for cls in record.classes:
        cls.funcs = [_normalize_function(f) for f in cls.funcs]
    return record


def process_source(
    source: str, file_path: str, set_label: str = UNASSIGNED, nlp: bool = True
) -> Outcome:
    """Parse, extract, build the token streams and normalize one file."""
    tree = parse_module(source, file_path)
    if isinstance(tree, ParseFailure):
        return tree
    index = SourceIndex(source)
    record = extract_module(tree, file_path, index)
    record.untyped_seq, record.typed_seq = sequence_pair(index, tree).as_strings()
    record.set_label = set_label
    if nlp:
        normalize_occurrences(record)
    return record


def _process_one(args: tuple[str, str, str, bool]) -> Outcome:
    abs_path, rel_path, label, nlp = args
    source = read_source(abs_path, rel_path)
    if isinstance(source, ParseFailure):
        return source
    return process_source(source, rel_path, label, nlp)


def _map(func, items: Sequence, jobs: int) -> list:
    if jobs <= 1 or len(items) < 2:
        return [func(item) for item in items]
    chunk = max(1, len(items) // (jobs * 4))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items, chunksize=chunk))


class TypeHintExtractor(TransformerMixin, BaseEstimator):
    """Turn source strings into module records (or parse failures).

    Stateless: ``fit`` only validates.  ``transform`` keeps input order and
    gives failures in place of records, so the caller can tally them.
    """

    def __init__(self, *, nlp=True, n_jobs=1):
        self.nlp = nlp
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        check_texts(X)
        self.n_features_in_ = 1
        return self

    def transform(self, X, paths=None):
        texts = check_texts(X)
        if paths is None:
            paths = [f"<input {i}>" for i in range(len(texts))]
        return _map(_transform_one, [(t, p, self.nlp) for t, p in zip(texts, paths)], self.n_jobs or 1)


def _transform_one(args: tuple[str, str, bool]) -> Outcome:
    text, path, nlp = args
    return process_source(text, path, UNASSIGNED, nlp)


def split_file_id(file_id: str) -> tuple[str, str]:
    """``author/repo/rel/path.py`` -> (``author/repo``, ``rel/path.py``)."""
    author, repo, rel = file_id.split("/", 2)
    return f"{author}/{repo}", rel


def discover_corpus(repos_dir: str | os.PathLike) -> list[SourceFileEntry]:
    """Source files of every ``repos_dir/author/repo`` checkout, sorted by file id."""
    repos_dir = Path(repos_dir)
    files: list[SourceFileEntry] = []
    for author in sorted(p for p in repos_dir.iterdir() if p.is_dir() and not p.name.startswith(".")):
        for repo in sorted(p for p in author.iterdir() if p.is_dir() and not p.name.startswith(".")):
            files.extend(discover_source_files(repo, project=f"{author.name}/{repo.name}"))
    files.sort(key=lambda e: e.file_id)
    return files


def find_duplicates(
    files: Sequence[SourceFileEntry],
    k: int = DEFAULT_K,
    threshold: float = DEFAULT_THRESHOLD,
    jobs: int = 1,
) -> tuple[list[DuplicateCluster], DedupReport]:
    texts = []
    for entry in files:
        source = read_source(entry.absolute_path, entry.file_id)
        texts.append("" if isinstance(source, ParseFailure) else source)
    if not texts:
        return [], DedupReport(0, 0, 0, 0.0, 0.0, 0.0, 0)
    detector = NearDuplicateDetector(k=k, threshold=threshold, n_jobs=jobs)
    detector.fit(texts, paths=[e.file_id for e in files])
    return detector.clusters_, detector.report_


def process_corpus(
    repos_dir: str | os.PathLike,
    assignment: SplitAssignment,
    jobs: int = 1,
    nlp: bool = True,
) -> tuple[list[ProjectRecord], list[ParseFailure]]:
    """Process every file named in ``assignment``; failures are collected, never raised."""
    repos_dir = Path(repos_dir)
    file_ids = sorted(assignment.entries)
    tasks = []
    for file_id in file_ids:
        project, rel = split_file_id(file_id)
        tasks.append((str(repos_dir / project / rel), rel, assignment.entries[file_id], nlp))
    outcomes = _map(_process_one, tasks, jobs)

    projects: dict[str, ProjectRecord] = {}
    failures: list[ParseFailure] = []
    for file_id, outcome in zip(file_ids, outcomes):
        project, rel = split_file_id(file_id)
        if isinstance(outcome, ParseFailure):
            failures.append(ParseFailure(file_id, outcome.reason))
            continue
        if project not in projects:
            author, repo = project.split("/")
            projects[project] = ProjectRecord(author, repo)
        projects[project].src_files[rel] = outcome
    if failures:
        log.warning("%d of %d files could not be parsed", len(failures), len(file_ids))
    return [projects[name] for name in sorted(projects)], failures


def sloc_for(repos_dir: str | os.PathLike, records: Iterable[ProjectRecord]) -> dict[str, int]:
    repos_dir = Path(repos_dir)
    out = {}
    for record in records:
        for rel in record.src_files:
            source = read_source(repos_dir / record.name / rel)
            if not isinstance(source, ParseFailure):
                out[f"{record.name}/{rel}"] = count_sloc(source)
    return out

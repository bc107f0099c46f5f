"""Near-duplicate file detection: TF-IDF vectors, k-NN candidates, clusters.

Files are bags of identifier tokens.  Each file is weighted with raw term
frequency times the smoothed inverse document frequency
``ln((1 + N) / (1 + df)) + 1``, candidate pairs come from an exact cosine
k-nearest-neighbour search (a pair is kept when either side lists the other
and the cosine reaches the threshold) and clusters are the connected
components of the candidate graph.
"""

from __future__ import annotations

import json
import math
import os
import statistics
import tokenize
from collections import Counter, defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._source import lex, rough_identifiers
from ._validation import (
    check_paths,
    check_positive_int,
    check_term_counts,
    check_texts,
    check_unit_interval,
)

__all__ = [
    "DEFAULT_K",
    "DEFAULT_THRESHOLD",
    "DedupReport",
    "DocumentVector",
    "DomainError",
    "DuplicateCluster",
    "NearDuplicateDetector",
    "TfidfTermVectorizer",
    "build_tfidf",
    "cosine",
    "dedup_report",
    "duplication_ratio",
    "form_clusters",
    "knn_candidates",
    "read_duplicates",
    "select_representatives",
    "tokenize_for_dedup",
    "write_duplicates",
]

DEFAULT_K = 10
DEFAULT_THRESHOLD = 0.95
# cosine of two identical vectors can land a few ulps under 1.0
SIMILARITY_EPS = 1e-9
_BLOCK_ROWS = 512


class DomainError(ValueError):
    pass


def tokenize_for_dedup(source_text: str) -> Counter:
    """Identifier multiset of a file; keywords, literals and operators are dropped."""
    try:
        names = [lx.text for lx in lex(source_text) if lx.kind == "name"]
    except (tokenize.TokenError, IndentationError, SyntaxError):
        names = rough_identifiers(source_text)
    return Counter(names)


@dataclass(frozen=True)
class DocumentVector:
    file_path: str
    weights: Mapping[str, float]
    norm: float

    @classmethod
    def from_weights(cls, file_path: str, weights: Mapping[str, float]) -> DocumentVector:
        norm = math.sqrt(math.fsum(w * w for w in weights.values()))
        return cls(file_path, dict(weights), norm)


def cosine(a: DocumentVector, b: DocumentVector) -> float:
    if a.norm == 0 or b.norm == 0:
        return 0.0
    small, large = (a, b) if len(a.weights) <= len(b.weights) else (b, a)
    dot = math.fsum(w * large.weights.get(t, 0.0) for t, w in small.weights.items())
    return dot / (a.norm * b.norm)


def _idf(corpus: Sequence[Mapping[str, int]]) -> dict[str, float]:
    n = len(corpus)
    df: Counter = Counter()
    for doc in corpus:
        df.update(t for t, c in doc.items() if c > 0)
    return {t: math.log((1 + n) / (1 + d)) + 1.0 for t, d in df.items()}


def build_tfidf(
    corpus: Sequence[Mapping[str, int]], paths: Sequence[str] | None = None
) -> list[DocumentVector]:
    corpus = check_term_counts(corpus, name="corpus")
    if not corpus:
        raise ValueError("corpus must contain at least one document")
    paths = check_paths(paths, len(corpus))
    idf = _idf(corpus)
    return [
        DocumentVector.from_weights(path, {t: c * idf[t] for t, c in doc.items() if c > 0})
        for path, doc in zip(paths, corpus)
    ]


def _to_matrix(vectors: Sequence[DocumentVector]) -> sp.csr_matrix:
    """Row-normalized CSR matrix; zero vectors stay all-zero rows."""
    vocab = {t: i for i, t in enumerate(sorted({t for v in vectors for t in v.weights}))}
    rows, cols, vals = [], [], []
    for r, v in enumerate(vectors):
        if v.norm == 0:
            continue
        for t, w in v.weights.items():
            rows.append(r)
            cols.append(vocab[t])
            vals.append(w / v.norm)
    return sp.csr_matrix(
        (np.asarray(vals, dtype=np.float64), (rows, cols)), shape=(len(vectors), len(vocab))
    )


def _top_k(row: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest entries; ties resolved towards lower indices."""
    if k >= row.size:
        return np.flatnonzero(np.isfinite(row))
    neg = -row
    kth = np.partition(neg, k - 1)[k - 1]
    better = np.flatnonzero(neg < kth)
    ties = np.flatnonzero(neg == kth)[: k - better.size]
    return np.concatenate([better, ties])


def _block_pairs(X, start, stop, k, cutoff, zero_rows) -> list[tuple[int, int]]:
    sims = (X[start:stop] @ X.T).toarray()
    sims[:, zero_rows] = -np.inf
    out = []
    for local, row in enumerate(sims):
        i = start + local
        if zero_rows[i]:
            continue
        row[i] = -np.inf
        for j in _top_k(row, k):
            if np.isfinite(row[j]) and row[j] >= cutoff:
                out.append((i, int(j)) if i < j else (int(j), i))
    return out


def knn_candidates(
    vectors: Sequence[DocumentVector],
    k: int = DEFAULT_K,
    threshold: float = DEFAULT_THRESHOLD,
    n_jobs: int = 1,
) -> set[tuple[str, str]]:
    """Unordered candidate pairs as ``(smaller_path, larger_path)`` tuples.

    Exact search.  Vectors with identical weights are always linked, even
    beyond the k-neighbour horizon, so exact copies can never fall apart
    into separate clusters.
    """
    k = check_positive_int(k, "k")
    threshold = check_unit_interval(threshold, "threshold")
    if not vectors:
        raise ValueError("vectors must be non-empty")
    n = len(vectors)
    X = _to_matrix(vectors)
    zero_rows = np.array([v.norm == 0 for v in vectors])
    cutoff = threshold - SIMILARITY_EPS
    blocks = [(s, min(s + _BLOCK_ROWS, n)) for s in range(0, n, _BLOCK_ROWS)]
    if n_jobs > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(lambda b: _block_pairs(X, *b, k, cutoff, zero_rows), blocks))
    else:
        parts = [_block_pairs(X, s, e, k, cutoff, zero_rows) for s, e in blocks]
    index_pairs = {p for part in parts for p in part}

    groups: dict[tuple, list[int]] = defaultdict(list)
    for i, v in enumerate(vectors):
        if v.norm:
            groups[tuple(sorted(v.weights.items()))].append(i)
    for members in groups.values():
        for other in members[1:]:
            index_pairs.add((members[0], other))

    pairs = set()
    for i, j in index_pairs:
        a, b = vectors[i].file_path, vectors[j].file_path
        pairs.add((a, b) if a < b else (b, a))
    return pairs


@dataclass(frozen=True)
class DuplicateCluster:
    members: tuple[str, ...]

    def __post_init__(self):
        if len(self.members) < 2:
            raise ValueError("a duplicate cluster needs at least two members")
        if list(self.members) != sorted(set(self.members)):
            raise ValueError("cluster members must be sorted and unique")

    @property
    def representative(self) -> str:
        return self.members[0]

    def __len__(self) -> int:
        return len(self.members)


def form_clusters(pairs: Iterable[tuple[str, str]]) -> list[DuplicateCluster]:
    """Connected components of the pair graph, singletons excluded."""
    parent: dict[str, str] = {}

    def find(x: str) -> str:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for a, b in sorted(tuple(sorted(p)) for p in pairs):
        parent.setdefault(a, a)
        parent.setdefault(b, b)
        ra, rb = find(a), find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            parent[rb] = ra

    components: dict[str, list[str]] = defaultdict(list)
    for node in parent:
        components[find(node)].append(node)
    clusters = [DuplicateCluster(tuple(sorted(m))) for m in components.values() if len(m) > 1]
    clusters.sort(key=lambda c: c.representative)
    return clusters


def select_representatives(clusters: Iterable[DuplicateCluster]) -> tuple[set[str], set[str]]:
    kept, removed = set(), set()
    for cluster in clusters:
        kept.add(cluster.representative)
        removed.update(cluster.members[1:])
    return kept, removed


def duplication_ratio(duplicate_files: int, clusters: int, total_files: int) -> float:
    """Share of the corpus removed by de-duplication, in percent."""
    if total_files <= 0:
        raise DomainError("total_files must be positive")
    if duplicate_files < clusters:
        raise DomainError("fewer duplicate files than clusters")
    return 100.0 * (duplicate_files - clusters) / total_files


@dataclass(frozen=True)
class DedupReport:
    total_files: int
    duplicate_files: int
    clusters: int
    avg_files_per_cluster: float
    median_files_per_cluster: float
    duplication_ratio_pct: float
    removed_files: int

    @classmethod
    def from_counts(
        cls,
        duplicate_files: int,
        clusters: int,
        total_files: int,
        median_files_per_cluster: float = float("nan"),
    ) -> DedupReport:
        return cls(
            total_files=total_files,
            duplicate_files=duplicate_files,
            clusters=clusters,
            avg_files_per_cluster=duplicate_files / clusters if clusters else 0.0,
            median_files_per_cluster=median_files_per_cluster,
            duplication_ratio_pct=duplication_ratio(duplicate_files, clusters, total_files),
            removed_files=duplicate_files - clusters,
        )

    def to_dict(self) -> dict:
        return {
            "total_files": self.total_files,
            "duplicate_files": self.duplicate_files,
            "clusters": self.clusters,
            "avg_files_per_cluster": round(self.avg_files_per_cluster, 6),
            "median_files_per_cluster": self.median_files_per_cluster,
            "duplication_ratio_pct": round(self.duplication_ratio_pct, 6),
            "removed_files": self.removed_files,
        }


def dedup_report(clusters: Sequence[DuplicateCluster], total_files: int) -> DedupReport:
    sizes = [len(c) for c in clusters]
    return DedupReport.from_counts(
        duplicate_files=sum(sizes),
        clusters=len(sizes),
        total_files=total_files,
        median_files_per_cluster=float(statistics.median(sizes)) if sizes else 0.0,
    )


def write_duplicates(clusters: Iterable[DuplicateCluster], path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for cluster in clusters:
            fh.write(json.dumps(list(cluster.members), ensure_ascii=False) + "\n")


def read_duplicates(path: str | os.PathLike) -> list[DuplicateCluster]:
    with open(path, encoding="utf-8") as fh:
        return [DuplicateCluster(tuple(json.loads(line))) for line in fh if line.strip()]


# -- estimator API -----------------------------------------------------------


class TfidfTermVectorizer(TransformerMixin, BaseEstimator):
    """Smoothed TF-IDF over identifier multisets, without length normalization.

    ``X`` is a sequence of source strings or of term-count mappings.
    """

    def __init__(self, *, input="source"):
        self.input = input

    def _terms(self, X):
        if self.input == "source":
            return [tokenize_for_dedup(text) for text in check_texts(X)]
        if self.input == "terms":
            return check_term_counts(X)
        raise ValueError(f"input must be 'source' or 'terms', got {self.input!r}")

    def fit(self, X, y=None):
        terms = self._terms(X)
        if not terms:
            raise ValueError("cannot fit on an empty corpus")
        self.idf_ = _idf(terms)
        self.vocabulary_ = {t: i for i, t in enumerate(sorted(self.idf_))}
        self.n_documents_ = len(terms)
        return self

    def transform(self, X):
        check_is_fitted(self, "idf_")
        terms = self._terms(X)
        rows, cols, vals = [], [], []
        for r, doc in enumerate(terms):
            for t, c in doc.items():
                if c > 0 and t in self.vocabulary_:
                    rows.append(r)
                    cols.append(self.vocabulary_[t])
                    vals.append(c * self.idf_[t])
        return sp.csr_matrix((vals, (rows, cols)), shape=(len(terms), len(self.vocabulary_)))

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "vocabulary_")
        return np.asarray(sorted(self.vocabulary_, key=self.vocabulary_.get), dtype=object)


class NearDuplicateDetector(ClusterMixin, BaseEstimator):
    """Cluster near-identical source files.

    After ``fit``, ``labels_[i]`` is the cluster index of file ``i`` or -1
    for files without a duplicate, ``clusters_`` holds the clusters and
    ``removed_`` the paths a de-duplicated corpus would drop.
    """

    def __init__(self, k=DEFAULT_K, threshold=DEFAULT_THRESHOLD, *, input="source", n_jobs=1):
        self.k = k
        self.threshold = threshold
        self.input = input
        self.n_jobs = n_jobs

    def fit(self, X, y=None, paths=None):
        check_positive_int(self.k, "k")
        check_unit_interval(self.threshold, "threshold")
        vectorizer = TfidfTermVectorizer(input=self.input)
        terms = vectorizer._terms(X)
        paths = check_paths(paths, len(terms))
        self.paths_ = paths
        self.vectors_ = build_tfidf(terms, paths)
        self.pairs_ = knn_candidates(self.vectors_, self.k, self.threshold, n_jobs=self.n_jobs or 1)
        self.clusters_ = form_clusters(self.pairs_)
        position = {p: i for i, p in enumerate(paths)}
        labels = np.full(len(paths), -1, dtype=int)
        for label, cluster in enumerate(self.clusters_):
            labels[[position[m] for m in cluster.members]] = label
        self.labels_ = labels
        _, self.removed_ = select_representatives(self.clusters_)
        self.report_ = dedup_report(self.clusters_, len(paths))
        return self

    def fit_predict(self, X, y=None, paths=None):
        return self.fit(X, paths=paths).labels_

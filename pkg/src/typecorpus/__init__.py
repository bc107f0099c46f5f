"""Build machine-learning datasets for type inference from Python repositories."""

__version__ = "0.1.0"

from .dedup import NearDuplicateDetector, TfidfTermVectorizer
from .docstrings import DocstringRecord, parse_docstring
from .emit import ProjectRecord, bundle, emit_project_json
from .extraction import (
    ClassRecord,
    FunctionRecord,
    ModuleRecord,
    ParseFailure,
    extract_module,
    parse_module,
)
from .nlp import lemmatize, normalize_identifier, split_identifier
from .pipeline import TypeHintExtractor, process_source
from .seq import TokenSequencePair, normalize_tokens, sequence_pair
from .split import FileSplitter, assign_splits
from .stats import CorpusStats, corpus_stats, count_sloc, top_n_types

__all__ = [
    "ClassRecord",
    "CorpusStats",
    "DocstringRecord",
    "FileSplitter",
    "FunctionRecord",
    "ModuleRecord",
    "NearDuplicateDetector",
    "ParseFailure",
    "ProjectRecord",
    "TfidfTermVectorizer",
    "TokenSequencePair",
    "TypeHintExtractor",
    "assign_splits",
    "bundle",
    "corpus_stats",
    "count_sloc",
    "emit_project_json",
    "extract_module",
    "lemmatize",
    "normalize_identifier",
    "normalize_tokens",
    "parse_docstring",
    "parse_module",
    "process_source",
    "sequence_pair",
    "split_identifier",
    "top_n_types",
]

"""Acceptance criteria, one test per criterion.

A PASS/FAIL line per criterion is printed in the terminal summary.
"""

from __future__ import annotations

import json
import keyword
import random
import time
import zipfile
from collections import Counter
from pathlib import Path

import jsonschema
import pytest

from conftest import requires_git
from corpus import WORDS, git_corpus, stdlib_sources, synthetic_projects
from oracles import FIELD_ROWS, PROJECT_SCHEMA, brute_force_pairs, components, corpus_oracle, identifier_counts
from typecorpus.cli import run
from typecorpus.dedup import DedupReport, NearDuplicateDetector, build_tfidf, knn_candidates, tokenize_for_dedup
from typecorpus.docstrings import detect_style
from typecorpus.emit import ProjectRecord, emit_project_json, parse_project_json
from typecorpus.extraction import ModuleRecord, ParseFailure
from typecorpus.pipeline import process_source
from typecorpus.seq import sequence_pair
from typecorpus.split import assign_splits
from typecorpus.stats import corpus_stats, count_sloc


def criterion(number: int, title: str):
    return pytest.mark.criterion(number, title)


# -- 1 -------------------------------------------------------------------------


@criterion(1, "dedup report arithmetic: removed 354,409, avg 8.73 files/cluster")
def test_report_arithmetic():
    start = time.perf_counter()
    report = DedupReport.from_counts(duplicate_files=400_245, clusters=45_836, total_files=510_000)
    elapsed = time.perf_counter() - start
    assert report.removed_files == 354_409
    assert abs(report.avg_files_per_cluster - 8.73) <= 0.005
    assert elapsed < 1e-3


# -- 2 -------------------------------------------------------------------------


def _random_file(rng: random.Random, vocab: list[str]) -> str:
    lines = []
    for _ in range(rng.randint(1, 8)):
        a, b, c = rng.choices(vocab, k=3)
        lines.append(rng.choice([f"{a} = {b}({c})", f"{a}.{b} = {c} + 1", f"return {a}[{b}]"]))
    return "\n".join(lines) + "\n"


def _random_corpus(rng: random.Random) -> tuple[dict[str, str], list[list[str]]]:
    vocab = rng.sample(WORDS, rng.randint(6, len(WORDS)))
    n = rng.randint(5, 50)
    files = {f"f{i:02d}.py": _random_file(rng, vocab) for i in range(n)}
    names = sorted(files)
    planted = []
    for _ in range(rng.randint(1, 3)):
        group = rng.sample(names, rng.randint(2, min(14, n)))
        for member in group[1:]:
            files[member] = files[group[0]]
        planted.append(group)
    for _ in range(rng.randint(0, 4)):
        src, dst = rng.sample(names, 2)
        if not any(dst in g for g in planted):
            files[dst] = files[src] + f"{rng.choice(vocab)} = 0\n"
    # a planted byte-identical group absorbs any group it overlaps
    text_groups: dict[str, list[str]] = {}
    for name in names:
        text_groups.setdefault(files[name], []).append(name)
    identical = [g for g in text_groups.values() if len(g) > 1 and identifier_counts(files[g[0]])]
    return files, identical


@criterion(2, "kNN with k=N-1 equals brute-force cosine pairs; identical files cluster together")
def test_dedup_oracle_equivalence():
    rng = random.Random(2024)
    start = time.perf_counter()
    for _ in range(20):
        files, identical = _random_corpus(rng)
        names = sorted(files)
        assert len(names) <= 50
        terms = [tokenize_for_dedup(files[n]) for n in names]
        vectors = build_tfidf(terms, names)
        got = knn_candidates(vectors, k=len(names) - 1, threshold=0.95)
        expected = brute_force_pairs({n: identifier_counts(files[n]) for n in names}, 0.95)
        assert got == expected

        # default k is far below the size of the largest planted group
        clusters = NearDuplicateDetector().fit([files[n] for n in names], paths=names).clusters_
        member_sets = [set(c.members) for c in clusters]
        for group in identical:
            assert any(set(group) <= m for m in member_sets), group
        assert member_sets == components(knn_candidates(vectors))
    assert time.perf_counter() - start < 10


# -- 3 -------------------------------------------------------------------------


def _fixture_sources() -> list[tuple[str, str]]:
    sources = list(stdlib_sources(120))
    for name, files in synthetic_projects(n_projects=3, files_per_project=10, seed=99).items():
        sources += [(f"{name}/{rel}", src) for rel, src in files.items()]
    return sources


@criterion(3, "token/type sequences align; types only at identifier positions")
def test_alignment_invariant():
    checked, typed_positions, violations = 0, 0, []
    for name, src in _fixture_sources():
        try:
            pair = sequence_pair(src)
        except SyntaxError:
            continue
        checked += 1
        untyped, typed = pair.as_strings()
        if len(pair.untyped_seq) != len(pair.typed_seq) or len(untyped.split(" ")) != len(typed.split(" ")):
            violations.append((name, "length"))
        for tok, t in zip(pair.untyped_seq, pair.typed_seq):
            if t != "0":
                typed_positions += 1
                if not tok.isidentifier() or keyword.iskeyword(tok):
                    violations.append((name, tok, t))
    assert checked >= 100
    assert typed_positions > 0
    assert violations == []


# -- 4 -------------------------------------------------------------------------


def _records_from(sources: list[tuple[str, str]]) -> list[ProjectRecord]:
    labels = ["train", "valid", "test"]
    rec = ProjectRecord("fixture", "corpus")
    for i, (name, src) in enumerate(sources):
        out = process_source(src, name, labels[i % 3])
        if isinstance(out, ModuleRecord):
            rec.src_files[name] = out
    return [rec]


def _field_rows(doc: dict) -> set[tuple[str, str]]:
    ((key, project),) = doc.items()
    rows = {("project", k) for k in project}
    if key.count("/") == 1:
        rows.add(("project", "author/repo"))
    if project["src_files"]:
        rows.add(("project", "file_path"))
    for module in project["src_files"].values():
        rows |= {("module", k) for k in module}
        funcs = list(module["funcs"])
        for cls in module["classes"]:
            rows |= {("class", k) for k in cls}
            funcs += cls["funcs"]
        for fn in funcs:
            rows |= {("function", k) for k in fn}
            rows |= {("docstring", k) for k in fn["docstring"]}
    return rows


@criterion(4, "emitted JSON has exactly the 23 documented fields")
def test_schema_conformance():
    assert len(FIELD_ROWS) == 23 and len(set(FIELD_ROWS)) == 23
    validator = jsonschema.Draft202012Validator(PROJECT_SCHEMA)
    docs = [json.loads(emit_project_json(r)) for r in _records_from(_fixture_sources())]
    with_empty = ProjectRecord("a", "b", {"empty.py": ModuleRecord("empty.py", set_label="valid")})
    docs.append(json.loads(emit_project_json(with_empty)))
    errors = [e.message for doc in docs for e in validator.iter_errors(doc)]
    assert errors == []
    assert _field_rows(docs[0]) == set(FIELD_ROWS)


# -- 5 -------------------------------------------------------------------------


@criterion(5, "split counts follow the floor rule; 100 files give 70/10/20; fixed seed repeats")
def test_split_proportions():
    for n in (10, 100, 1000):
        files = [f"p/q/file_{i}.py" for i in range(n)]
        a = assign_splits(files, (0.7, 0.1, 0.2), seed=42)
        expected = {"train": n - n // 10 - n // 5, "valid": n // 10, "test": n // 5}
        assert a.counts() == expected
        assert assign_splits(list(files), (0.7, 0.1, 0.2), seed=42).entries == a.entries
        assert sorted(a.entries) == sorted(files)
    assert assign_splits([f"f{i}" for i in range(100)]).counts() == {"train": 70, "valid": 10, "test": 20}


# -- 6 -------------------------------------------------------------------------


@criterion(6, "corpus statistics equal an independent hand-count on a 5-project fixture")
def test_stats_oracle():
    projects = synthetic_projects(n_projects=5, files_per_project=4, seed=7)
    files = {f"{p}/{rel}": src for p, fs in projects.items() for rel, src in fs.items()}
    labels = assign_splits(sorted(files)).entries

    styles = Counter()
    records = []
    for name, fs in projects.items():
        author, repo = name.split("/")
        rec = ProjectRecord(author, repo)
        for rel, src in fs.items():
            rec.src_files[rel] = process_source(src, rel, labels[f"{name}/{rel}"])
            for fn in rec.src_files[rel].all_functions():
                doc = "\n".join([fn.docstring.func, fn.docstring.long_descr])
                styles[detect_style(doc)] += 1
        # go through the serialized form, as the stats stage does
        records.append(parse_project_json(emit_project_json(rec)))
    sloc = {fid: count_sloc(src) for fid, src in files.items()}

    got = corpus_stats(records, sloc=sloc).to_dict()
    expected = corpus_oracle(files, labels)
    assert expected["all"]["functions"] >= 50
    assert expected["all"]["arguments_with_annotations"] < expected["all"]["arguments"]
    assert {"google", "numpy", "rest"} <= set(styles)
    assert got == expected


# -- 7 -------------------------------------------------------------------------

PY2_TEMPLATES = [
    "print 'value of {w}'\n",
    "def {w}():\n    print \"{w}\", 1\n",
    "exec 'x_{w} = 1'\n",
    "try:\n    {w}()\nexcept Exception, err_{w}:\n    pass\n",
]


@requires_git
@criterion(7, "5% Python-2 files: exit 2, exact failure tally, Python-3 files complete")
def test_python2_resilience(tmp_path):
    projects = synthetic_projects(n_projects=4, files_per_project=10, seed=5)
    total = sum(len(fs) for fs in projects.values())
    planted = []
    for i, (name, rel) in enumerate([("author0/repo0", "mod_3.py"), ("author2/repo2", "mod_6.py")]):
        projects[name][rel] = PY2_TEMPLATES[i].format(w=f"legacy_{i}")
        planted.append(f"{name}/{rel}")
    assert len(planted) / total == 0.05

    manifest = git_corpus(tmp_path, projects)
    out = tmp_path / "run"
    assert run(["all", "--manifest", str(manifest), "--out", str(out)]) == 2

    failures = json.loads((out / "failures.json").read_text())
    assert sorted(f["file"] for f in failures) == sorted(planted)
    assert not (out / "duplicates.jsonl").read_text().strip()

    labels = dict(line.split(",") for line in (out / "splits.csv").read_text().splitlines()[1:])
    emitted = {}
    for path in (out / "projects").glob("*.json"):
        rec = parse_project_json(path.read_text())
        for rel, module in rec.src_files.items():
            emitted[f"{rec.name}/{rel}"] = module
    py3 = {f"{p}/{r}": s for p, fs in projects.items() for r, s in fs.items()}
    py3 = {k: v for k, v in py3.items() if k not in planted}
    assert set(emitted) == set(py3)
    for fid, src in py3.items():
        rel = fid.split("/", 2)[2]
        direct = process_source(src, rel, labels[fid])
        assert not isinstance(direct, ParseFailure)
        assert emitted[fid] == direct


# -- 8 -------------------------------------------------------------------------


@requires_git
@criterion(8, "`all` with --jobs 1 and --jobs 8 writes byte-identical bundles")
def test_determinism_under_parallelism(tmp_path):
    projects = synthetic_projects(n_projects=4, files_per_project=8, seed=13)
    same = projects["author0/repo0"]["mod_0.py"]
    projects["author3/repo3"]["copy.py"] = same
    manifest = git_corpus(tmp_path, projects)
    bundles = []
    for jobs in ("1", "8"):
        out = tmp_path / f"out{jobs}"
        assert run(["all", "--manifest", str(manifest), "--out", str(out), "--jobs", jobs]) == 0
        bundles.append((out / "dataset.zip").read_bytes())
    assert bundles[0] == bundles[1]
    with zipfile.ZipFile(Path(tmp_path / "out8" / "dataset.zip")) as zf:
        assert zf.read("duplicates.jsonl").strip()

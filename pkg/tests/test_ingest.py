from __future__ import annotations

import os

import pytest

from conftest import requires_git
from corpus import git, make_repo
from typecorpus.ingest import (
    CommitNotFound,
    FetchFailed,
    MalformedLine,
    ManifestEntry,
    MissingDirectory,
    MissingFile,
    discover_source_files,
    fetch_project,
    load_manifest,
)

HASH = "0123456789abcdef0123456789abcdef01234567"


def test_manifest_parses_urls_and_skips_comments(tmp_path):
    path = tmp_path / "m.txt"
    path.write_text(
        "# header\n"
        f"https://github.com/alice/tool {HASH}\n"
        "\n"
        f"https://github.com/bob/lib.git {HASH}\n"
        f"git@github.com:carol/thing.git {HASH}\n",
        encoding="utf-8",
    )
    entries = load_manifest(path)
    assert [e.name for e in entries] == ["alice/tool", "bob/lib", "carol/thing"]
    assert entries[0].to_line() == f"https://github.com/alice/tool {HASH}"


@pytest.mark.parametrize(
    "line",
    [
        "https://github.com/a/b",
        f"https://github.com/a/b {HASH} extra",
        "https://github.com/a/b deadbeef",
        f"https://github.com/a/b {HASH.upper()}",
        f"repo {HASH}",
    ],
)
def test_manifest_rejects_bad_lines(tmp_path, line):
    path = tmp_path / "m.txt"
    path.write_text(f"https://github.com/ok/ok {HASH}\n{line}\n", encoding="utf-8")
    with pytest.raises(MalformedLine) as info:
        load_manifest(path)
    assert info.value.line_no == 2


def test_manifest_missing(tmp_path):
    with pytest.raises(MissingFile):
        load_manifest(tmp_path / "nope.txt")


def test_entry_validates_hash():
    with pytest.raises(ValueError):
        ManifestEntry("a", "b", "u", "xyz")


def test_discover_sorted_python_only(tmp_path):
    for rel in ["b.py", "a/z.py", "a/y.txt", ".git/hook.py", "a/.dot.py", "c/d/e.py"]:
        (tmp_path / rel).parent.mkdir(parents=True, exist_ok=True)
        (tmp_path / rel).write_text("x = 1\n")
    files = discover_source_files(tmp_path, project="o/r")
    assert [f.relative_path for f in files] == ["a/.dot.py", "a/z.py", "b.py", "c/d/e.py"]
    assert files[1].file_id == "o/r/a/z.py"
    assert os.path.isabs(files[0].absolute_path)


def test_discover_does_not_follow_symlink_cycles(tmp_path):
    (tmp_path / "pkg").mkdir()
    (tmp_path / "pkg" / "m.py").write_text("x = 1\n")
    os.symlink(tmp_path, tmp_path / "pkg" / "loop")
    os.symlink(tmp_path / "pkg" / "m.py", tmp_path / "link.py")
    files = discover_source_files(tmp_path)
    # the file link is a regular entry; the directory link is never entered
    assert [f.relative_path for f in files] == ["link.py", "pkg/m.py"]


def test_discover_missing_dir(tmp_path):
    with pytest.raises(MissingDirectory):
        discover_source_files(tmp_path / "absent")


@requires_git
def test_fetch_checks_out_pinned_commit_and_is_idempotent(tmp_path):
    origin = tmp_path / "origin" / "alice" / "tool"
    first = make_repo(origin, {"a.py": "x = 1\n"})
    (origin / "b.py").write_text("y = 2\n")
    git("add", "-A", cwd=origin)
    git("commit", "-q", "-m", "second", cwd=origin)

    entry = ManifestEntry("alice", "tool", str(origin), first)
    dest = tmp_path / "work"
    fetch_project(entry, dest)
    assert (dest / "a.py").exists() and not (dest / "b.py").exists()
    assert git("rev-parse", "HEAD", cwd=dest) == first
    mtime = (dest / "a.py").stat().st_mtime_ns
    fetch_project(entry, dest)
    assert (dest / "a.py").stat().st_mtime_ns == mtime


@requires_git
def test_fetch_errors(tmp_path):
    origin = tmp_path / "o" / "a" / "r"
    make_repo(origin, {"a.py": "x = 1\n"})
    with pytest.raises(CommitNotFound):
        fetch_project(ManifestEntry("a", "r", str(origin), HASH), tmp_path / "w1")
    with pytest.raises(FetchFailed):
        fetch_project(ManifestEntry("a", "r", str(tmp_path / "missing"), HASH), tmp_path / "w2")

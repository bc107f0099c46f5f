"""Manifest loading, pinned checkouts and source-file discovery.

A manifest is plain text with one project per line::

    https://github.com/author/repo 0123456789abcdef0123456789abcdef01234567

Author and repository names come from the last two path segments of the URL,
so local paths (``/srv/mirror/author/repo``) work as well as remote URLs.
"""

from __future__ import annotations

import logging
import os
import re
import subprocess
from dataclasses import dataclass
from pathlib import Path

__all__ = [
    "CommitNotFound",
    "FetchFailed",
    "MalformedLine",
    "ManifestEntry",
    "MissingDirectory",
    "MissingFile",
    "SourceFileEntry",
    "discover_source_files",
    "fetch_project",
    "load_manifest",
]

log = logging.getLogger(__name__)

SOURCE_SUFFIX = ".py"
_HASH_RE = re.compile(r"[0-9a-f]{40}")


class MissingFile(FileNotFoundError):
    pass


class MissingDirectory(FileNotFoundError):
    pass


class MalformedLine(ValueError):
    def __init__(self, line_no: int, line: str, why: str):
        super().__init__(f"manifest line {line_no}: {why}: {line!r}")
        self.line_no = line_no


class FetchFailed(RuntimeError):
    def __init__(self, url: str, detail: str = ""):
        super().__init__(f"could not fetch {url}" + (f": {detail}" if detail else ""))
        self.url = url


class CommitNotFound(RuntimeError):
    def __init__(self, commit_hash: str, url: str = ""):
        super().__init__(f"commit {commit_hash} not found in {url or 'repository'}")
        self.commit_hash = commit_hash


@dataclass(frozen=True)
class ManifestEntry:
    author: str
    repo: str
    url: str
    commit_hash: str

    def __post_init__(self):
        if not (self.author and self.repo and self.url):
            raise ValueError("author, repo and url must be non-empty")
        if not _HASH_RE.fullmatch(self.commit_hash):
            raise ValueError(f"commit hash must be 40 lowercase hex chars: {self.commit_hash!r}")

    @property
    def name(self) -> str:
        return f"{self.author}/{self.repo}"

    def to_line(self) -> str:
        return f"{self.url} {self.commit_hash}"


@dataclass(frozen=True)
class SourceFileEntry:
    project: str
    relative_path: str
    absolute_path: str

    @property
    def file_id(self) -> str:
        """Corpus-wide identifier, ``author/repo/relative/path.py``."""
        return f"{self.project}/{self.relative_path}"


def _split_url(url: str) -> tuple[str, str]:
    path = re.sub(r"^[a-z][a-z0-9+.-]*://[^/]*", "", url.strip())
    if ":" in path and "/" not in path.split(":", 1)[0]:
        # scp-style git@host:author/repo
        path = path.split(":", 1)[1]
    parts = [p for p in re.split(r"[/\\]", path) if p]
    if len(parts) < 2:
        return "", ""
    repo = parts[-1]
    if repo.endswith(".git"):
        repo = repo[:-4]
    return parts[-2], repo


def load_manifest(path: str | os.PathLike) -> list[ManifestEntry]:
    """Parse a manifest file; lines starting with ``#`` are comments."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"manifest not found: {path}")
    entries = []
    for line_no, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 2:
            raise MalformedLine(line_no, raw, "expected 'URL COMMIT_HASH'")
        url, commit = fields
        if not _HASH_RE.fullmatch(commit):
            raise MalformedLine(line_no, raw, "commit hash is not 40 lowercase hex characters")
        author, repo = _split_url(url)
        if not author or not repo:
            raise MalformedLine(line_no, raw, "cannot read author/repo from URL")
        entries.append(ManifestEntry(author, repo, url, commit))
    return entries


def _git(*args: str, cwd: str | os.PathLike | None = None) -> subprocess.CompletedProcess:
    env = dict(os.environ, GIT_TERMINAL_PROMPT="0")
    return subprocess.run(
        ["git", *args], cwd=cwd, capture_output=True, text=True, env=env, check=False
    )


def _head(dest: Path) -> str | None:
    if not (dest / ".git").exists():
        return None
    proc = _git("rev-parse", "HEAD", cwd=dest)
    return proc.stdout.strip() if proc.returncode == 0 else None


def fetch_project(entry: ManifestEntry, dest: str | os.PathLike) -> Path:
    """Check out ``entry`` at its pinned commit under ``dest``.

    A checkout already sitting at the pinned commit is left untouched.
    Submodules are not initialised.
    """
    dest = Path(dest)
    if _head(dest) == entry.commit_hash:
        log.debug("%s already at %s", entry.name, entry.commit_hash[:12])
        return dest
    if not (dest / ".git").exists():
        if dest.exists() and any(dest.iterdir()):
            raise FetchFailed(entry.url, f"destination {dest} exists and is not a checkout")
        dest.parent.mkdir(parents=True, exist_ok=True)
        proc = _git("clone", "--quiet", "--no-checkout", entry.url, str(dest))
        if proc.returncode != 0:
            raise FetchFailed(entry.url, proc.stderr.strip())
    if _git("cat-file", "-e", f"{entry.commit_hash}^{{commit}}", cwd=dest).returncode != 0:
        # the pinned commit may live outside the default refs
        _git("fetch", "--quiet", "origin", entry.commit_hash, cwd=dest)
        if _git("cat-file", "-e", f"{entry.commit_hash}^{{commit}}", cwd=dest).returncode != 0:
            raise CommitNotFound(entry.commit_hash, entry.url)
    proc = _git("checkout", "--quiet", "--force", "--detach", entry.commit_hash, cwd=dest)
    if proc.returncode != 0:
        raise FetchFailed(entry.url, proc.stderr.strip())
    return dest


def discover_source_files(root: str | os.PathLike, project: str = "") -> list[SourceFileEntry]:
    """All ``.py`` files below ``root``, sorted by relative path.

    The ``.git`` directory is skipped and symlinked directories are not
    followed, so symlink cycles cannot trap the walk.
    """
    root = Path(root)
    if not root.is_dir():
        raise MissingDirectory(f"not a directory: {root}")
    found = []
    for dirpath, dirnames, filenames in os.walk(root, followlinks=False):
        dirnames[:] = [d for d in dirnames if d != ".git"]
        for fn in filenames:
            if not fn.endswith(SOURCE_SUFFIX):
                continue
            full = Path(dirpath, fn)
            if not full.is_file():
                continue
            rel = full.relative_to(root).as_posix()
            found.append(SourceFileEntry(project, rel, str(full)))
    found.sort(key=lambda e: e.relative_path)
    return found

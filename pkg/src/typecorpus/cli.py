"""Command-line entry point.

Every stage reads and writes fixed file names inside ``--out``::

    repos/<author>/<repo>/   fetch
    duplicates.jsonl         dedup   (plus dedup_report.json)
    splits.csv               split
    projects/*.json          process (plus failures.json)
    stats.json               stats   (plus type_frequencies.csv)
    dataset.zip              bundle

Exit status: 0 success, 1 usage error, 2 partial failure, 3 fatal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .dedup import DEFAULT_K, DEFAULT_THRESHOLD, read_duplicates, write_duplicates
from .emit import bundle, load_project_json, write_project_json
from .ingest import CommitNotFound, FetchFailed, fetch_project, load_manifest
from .pipeline import discover_corpus, find_duplicates, process_corpus, sloc_for
from .split import DEFAULT_RATIOS, DEFAULT_SEED, assign_splits, read_split_csv, write_split_csv
from .stats import corpus_stats, render_table, top_n_types, write_stats_json, write_type_csv

log = logging.getLogger("typecorpus")

EXIT_OK, EXIT_USAGE, EXIT_PARTIAL, EXIT_FATAL = 0, 1, 2, 3

COMMANDS = ("fetch", "process", "dedup", "split", "stats", "bundle", "all")
DEFAULTS = {
    "manifest": None,
    "out": "dataset",
    "seed": DEFAULT_SEED,
    "k": DEFAULT_K,
    "threshold": DEFAULT_THRESHOLD,
    "ratios": ",".join(str(r) for r in DEFAULT_RATIOS),
    "jobs": 1,
    "top": 10,
    "nlp": True,
}


class UsageError(Exception):
    pass


class ConfigError(UsageError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # defaults are None so that config-file values can fill the gaps
    common.add_argument("--manifest", help="project manifest: 'URL COMMIT' per line")
    common.add_argument("--out", help="working/output directory (default: dataset)")
    common.add_argument("--seed", type=int, help=f"split seed (default: {DEFAULT_SEED})")
    common.add_argument("--k", type=int, help=f"neighbours per file (default: {DEFAULT_K})")
    common.add_argument("--threshold", type=float, help=f"cosine cut-off (default: {DEFAULT_THRESHOLD})")
    common.add_argument("--ratios", help="train,valid,test fractions (default: 0.7,0.1,0.2)")
    common.add_argument("--jobs", type=int, help="worker processes (default: 1)")
    common.add_argument("--top", type=int, help="number of types in the frequency table (default: 10)")
    common.add_argument("--no-nlp", dest="nlp", action="store_const", const=False,
                        help="keep raw identifiers in parameter-usage windows")
    common.add_argument("--config", help="JSON file with default values for the flags above")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="typecorpus", description="Build a type-inference dataset.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    helps = {
        "fetch": "check out manifest projects at their pinned commits",
        "dedup": "find near-duplicate files",
        "split": "assign de-duplicated files to train/valid/test",
        "process": "extract type hints and token streams to project JSON",
        "stats": "summarize the processed corpus",
        "bundle": "zip projects, manifest, duplicates and splits",
        "all": "run every stage in order",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def resolve_options(args: argparse.Namespace) -> argparse.Namespace:
    """Flags beat config-file values, which beat built-in defaults."""
    config = {}
    if args.config:
        try:
            config = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(config, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(config) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key, default in DEFAULTS.items():
        if getattr(args, key, None) is None:
            setattr(args, key, config.get(key, default))
    try:
        args.ratios = tuple(float(r) for r in str(args.ratios).split(","))
    except ValueError:
        raise ConfigError(f"bad --ratios {args.ratios!r}") from None
    if len(args.ratios) != 3 or abs(sum(args.ratios) - 1) > 1e-9:
        raise ConfigError("--ratios needs three fractions summing to 1")
    if args.k < 1 or args.jobs < 1 or args.top < 1:
        raise ConfigError("--k, --jobs and --top must be positive")
    if not 0.0 <= args.threshold <= 1.0:
        raise ConfigError("--threshold must lie in [0, 1]")
    args.out = Path(args.out)
    return args


class Stages:
    def __init__(self, opts: argparse.Namespace):
        self.opts = opts
        self.out: Path = opts.out
        self.repos = self.out / "repos"
        self.duplicates = self.out / "duplicates.jsonl"
        self.splits = self.out / "splits.csv"
        self.projects = self.out / "projects"
        self.archive = self.out / "dataset.zip"
        self.partial = False

    def _manifest(self):
        if not self.opts.manifest:
            raise UsageError("--manifest is required for this command")
        return load_manifest(self.opts.manifest)

    def fetch(self) -> None:
        entries = self._manifest()

        def one(entry):
            try:
                fetch_project(entry, self.repos / entry.author / entry.repo)
                return None
            except (FetchFailed, CommitNotFound) as exc:
                return f"{entry.name}: {exc}"

        with ThreadPoolExecutor(max_workers=self.opts.jobs) as pool:
            errors = [e for e in pool.map(one, entries) if e]
        for err in errors:
            print(f"fetch failed: {err}", file=sys.stderr)
        self.partial |= bool(errors)
        log.info("fetched %d of %d projects", len(entries) - len(errors), len(entries))

    def _require(self, path: Path, stage: str) -> Path:
        if not path.exists():
            raise FileNotFoundError(f"{path} not found; run '{stage}' first")
        return path

    def dedup(self) -> None:
        files = discover_corpus(self._require(self.repos, "fetch"))
        clusters, report = find_duplicates(files, self.opts.k, self.opts.threshold, self.opts.jobs)
        self.out.mkdir(parents=True, exist_ok=True)
        write_duplicates(clusters, self.duplicates)
        (self.out / "dedup_report.json").write_text(
            json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8"
        )
        log.info("%d files, %d clusters, %d removed", report.total_files, report.clusters,
                 report.removed_files)

    def split(self) -> None:
        files = discover_corpus(self._require(self.repos, "fetch"))
        clusters = read_duplicates(self._require(self.duplicates, "dedup"))
        removed = {m for c in clusters for m in c.members[1:]}
        kept, skipped = [], []
        for entry in files:
            if entry.file_id in removed:
                continue
            if any(ch in entry.file_id for ch in ',"\n\r'):
                skipped.append(entry.file_id)
            else:
                kept.append(entry.file_id)
        for file_id in skipped:
            print(f"skipped (path not representable in CSV): {file_id!r}", file=sys.stderr)
        self.partial |= bool(skipped)
        if not kept:
            raise RuntimeError("no source files left to split")
        assignment = assign_splits(kept, self.opts.ratios, self.opts.seed)
        write_split_csv(assignment, self.splits)
        log.info("split counts %s", assignment.counts())

    def process(self) -> None:
        assignment = read_split_csv(self._require(self.splits, "split"))
        records, failures = process_corpus(
            self._require(self.repos, "fetch"), assignment, self.opts.jobs, self.opts.nlp
        )
        if self.projects.exists():
            for stale in self.projects.glob("*.json"):
                stale.unlink()
        self.projects.mkdir(parents=True, exist_ok=True)
        for record in records:
            write_project_json(record, self.projects)
        (self.out / "failures.json").write_text(
            json.dumps([{"file": f.file_path, "reason": f.reason} for f in failures], indent=2)
            + "\n",
            encoding="utf-8",
        )
        for f in failures:
            print(f"parse failed: {f.file_path}: {f.reason}", file=sys.stderr)
        print(f"processed {len(assignment.entries) - len(failures)} files, "
              f"{len(failures)} failed to parse", file=sys.stderr)
        self.partial |= bool(failures)

    def stats(self) -> None:
        paths = sorted(self._require(self.projects, "process").glob("*.json"))
        records = [load_project_json(p) for p in paths]
        sloc = sloc_for(self.repos, records) if self.repos.exists() else None
        stats = corpus_stats(records, sloc=sloc)
        top = top_n_types(records, self.opts.top)
        write_stats_json(stats, self.out / "stats.json", top)
        write_type_csv(top, self.out / "type_frequencies.csv")
        sys.stdout.write(render_table(stats))

    def bundle(self) -> None:
        if not self.opts.manifest:
            raise UsageError("--manifest is required for this command")
        bundle(self.projects, self.opts.manifest, self.duplicates, self.splits, self.archive)
        log.info("wrote %s", self.archive)

    def all(self) -> None:
        for stage in (self.fetch, self.dedup, self.split, self.process, self.stats, self.bundle):
            stage()


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        opts = resolve_options(args)
        stages = Stages(opts)
        getattr(stages, opts.command)()
    except UsageError as exc:
        print(f"typecorpus: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - any unexpected failure is fatal
        log.debug("fatal error", exc_info=True)
        print(f"typecorpus: fatal: {exc}", file=sys.stderr)
        return EXIT_FATAL
    return EXIT_PARTIAL if stages.partial else EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

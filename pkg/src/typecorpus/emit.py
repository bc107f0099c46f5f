"""Project JSON serialization and the four-part dataset archive."""

from __future__ import annotations

import json
import os
import zipfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .docstrings import DocstringRecord
from .extraction import SET_LABELS, ClassRecord, FunctionRecord, ModuleRecord

__all__ = [
    "BUNDLE_MANIFEST",
    "BUNDLE_DUPLICATES",
    "BUNDLE_PROJECTS",
    "BUNDLE_SPLITS",
    "IncompleteRecord",
    "MissingInput",
    "ProjectRecord",
    "bundle",
    "emit_project_json",
    "load_project_json",
    "parse_project_json",
    "project_filename",
    "write_project_json",
]

BUNDLE_PROJECTS = "projects"
BUNDLE_MANIFEST = "manifest.txt"
BUNDLE_DUPLICATES = "duplicates.jsonl"
BUNDLE_SPLITS = "splits.csv"
_ZIP_EPOCH = (1980, 1, 1, 0, 0, 0)


class IncompleteRecord(ValueError):
    pass


class MissingInput(FileNotFoundError):
    def __init__(self, name: str, path: str | os.PathLike = ""):
        super().__init__(f"missing bundle input {name}: {path}")
        self.name = name


@dataclass
class ProjectRecord:
    author: str
    repo: str
    src_files: dict[str, ModuleRecord] = field(default_factory=dict)

    @property
    def name(self) -> str:
        return f"{self.author}/{self.repo}"


def _docstring_obj(d: DocstringRecord) -> dict[str, str]:
    return {"func": d.func, "ret": d.ret, "long_descr": d.long_descr}


def _function_obj(f: FunctionRecord) -> dict[str, Any]:
    return {
        "name": f.name,
        "params": dict(f.params),
        "ret_exprs": list(f.ret_exprs),
        "ret_type": f.ret_type,
        "variables": dict(f.variables),
        "params_occur": {k: [list(w) for w in v] for k, v in f.params_occur.items()},
        "docstring": _docstring_obj(f.docstring),
    }


def _class_obj(c: ClassRecord) -> dict[str, Any]:
    return {
        "name": c.name,
        "variables": dict(c.variables),
        "funcs": [_function_obj(f) for f in c.funcs],
    }


def _module_obj(m: ModuleRecord) -> dict[str, Any]:
    if m.set_label not in SET_LABELS:
        raise IncompleteRecord(f"{m.file_path}: set label is {m.set_label!r}")
    return {
        "untyped_seq": m.untyped_seq,
        "typed_seq": m.typed_seq,
        "imports": list(m.imports),
        "variables": dict(m.variables),
        "classes": [_class_obj(c) for c in m.classes],
        "funcs": [_function_obj(f) for f in m.funcs],
        "set": m.set_label,
    }


def emit_project_json(record: ProjectRecord) -> str:
    body = {path: _module_obj(record.src_files[path]) for path in sorted(record.src_files)}
    return json.dumps({record.name: {"src_files": body}}, ensure_ascii=False) + "\n"


def _function_from(obj: dict) -> FunctionRecord:
    d = obj["docstring"]
    return FunctionRecord(
        name=obj["name"],
        params=dict(obj["params"]),
        ret_exprs=list(obj["ret_exprs"]),
        ret_type=obj["ret_type"],
        variables=dict(obj["variables"]),
        params_occur={k: [list(w) for w in v] for k, v in obj["params_occur"].items()},
        docstring=DocstringRecord(d["func"], d["ret"], d["long_descr"]),
    )


def parse_project_json(text: str) -> ProjectRecord:
    data = json.loads(text)
    if len(data) != 1:
        raise ValueError("project JSON must hold exactly one author/repo key")
    (name, project), = data.items()
    author, _, repo = name.partition("/")
    record = ProjectRecord(author, repo)
    for path, m in project["src_files"].items():
        record.src_files[path] = ModuleRecord(
            file_path=path,
            untyped_seq=m["untyped_seq"],
            typed_seq=m["typed_seq"],
            imports=list(m["imports"]),
            variables=dict(m["variables"]),
            classes=[
                ClassRecord(c["name"], dict(c["variables"]), [_function_from(f) for f in c["funcs"]])
                for c in m["classes"]
            ],
            funcs=[_function_from(f) for f in m["funcs"]],
            set_label=m["set"],
        )
    return record


def project_filename(name: str) -> str:
    return name.replace("/", "$") + ".json"


def write_project_json(record: ProjectRecord, directory: str | os.PathLike) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / project_filename(record.name)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(emit_project_json(record))
    return path


def load_project_json(path: str | os.PathLike) -> ProjectRecord:
    return parse_project_json(Path(path).read_text(encoding="utf-8"))


def _zip_write(zf: zipfile.ZipFile, arcname: str, data: bytes | None) -> None:
    info = zipfile.ZipInfo(arcname, date_time=_ZIP_EPOCH)
    if data is None:
        info.external_attr = (0o40755 << 16) | 0x10
        zf.writestr(info, b"")
    else:
        info.external_attr = 0o100644 << 16
        info.compress_type = zipfile.ZIP_DEFLATED
        zf.writestr(info, data)


def bundle(
    json_dir: str | os.PathLike,
    manifest: str | os.PathLike,
    duplicates_file: str | os.PathLike,
    split_csv: str | os.PathLike,
    out_path: str | os.PathLike,
) -> Path:
    """Zip the project JSON files, manifest, duplicate clusters and split CSV."""
    json_dir = Path(json_dir)
    if not json_dir.is_dir():
        raise MissingInput("project JSON directory", json_dir)
    singles = {
        BUNDLE_MANIFEST: Path(manifest),
        BUNDLE_DUPLICATES: Path(duplicates_file),
        BUNDLE_SPLITS: Path(split_csv),
    }
    for name, path in singles.items():
        if not path.is_file():
            raise MissingInput(name, path)

    entries: dict[str, bytes | None] = {BUNDLE_PROJECTS + "/": None}
    for path in sorted(json_dir.glob("*.json")):
        entries[f"{BUNDLE_PROJECTS}/{path.name}"] = path.read_bytes()
    for name, path in singles.items():
        entries[name] = path.read_bytes()

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with zipfile.ZipFile(out_path, "w") as zf:
        for arcname in sorted(entries):
            _zip_write(zf, arcname, entries[arcname])
    return out_path

from __future__ import annotations

import json
import zipfile

import jsonschema
import pytest

from oracles import PROJECT_SCHEMA
from typecorpus.emit import (
    IncompleteRecord,
    MissingInput,
    ProjectRecord,
    bundle,
    emit_project_json,
    load_project_json,
    parse_project_json,
    project_filename,
    write_project_json,
)
from typecorpus.extraction import ModuleRecord
from typecorpus.pipeline import process_source

ADD = "def add(a: int, b: int) -> int:\n    return a + b\n"


def project(**files: str) -> ProjectRecord:
    rec = ProjectRecord("alice", "tool")
    for name, src in files.items():
        rec.src_files[f"{name}.py"] = process_source(src, f"{name}.py", "train")
    return rec


def test_empty_module_has_every_key():
    rec = ProjectRecord("a", "b", {"e.py": ModuleRecord("e.py", set_label="test")})
    data = json.loads(emit_project_json(rec))
    module = data["a/b"]["src_files"]["e.py"]
    assert module == {"untyped_seq": "", "typed_seq": "", "imports": [], "variables": {},
                      "classes": [], "funcs": [], "set": "test"}
    jsonschema.validate(data, PROJECT_SCHEMA)


def test_function_object_and_determinism():
    rec = project(m=ADD)
    text = emit_project_json(rec)
    assert text == emit_project_json(project(m=ADD))
    (fn,) = json.loads(text)["alice/tool"]["src_files"]["m.py"]["funcs"]
    assert fn["ret_type"] == "int"
    assert list(fn) == ["name", "params", "ret_exprs", "ret_type", "variables", "params_occur", "docstring"]
    jsonschema.validate(json.loads(text), PROJECT_SCHEMA)


def test_unassigned_module_rejected():
    rec = ProjectRecord("a", "b", {"e.py": ModuleRecord("e.py")})
    with pytest.raises(IncompleteRecord):
        emit_project_json(rec)


def test_round_trip(tmp_path):
    rec = project(m=ADD, n="class C:\n    x: str = ''\n    def f(self, y):\n        '''Doc.'''\n        return y\n")
    path = write_project_json(rec, tmp_path)
    assert path.name == "alice$tool.json"
    back = load_project_json(path)
    assert emit_project_json(back) == emit_project_json(rec)
    assert parse_project_json(path.read_text()).src_files["n.py"].classes[0].funcs[0].docstring.func == "Doc."
    assert project_filename("x/y") == "x$y.json"


def test_unicode_written_raw():
    text = emit_project_json(project(u="s = 'é'\ndef café(x: 'Ünï'): pass\n"))
    assert "café" in text and "\\u" not in text


def _inputs(tmp_path):
    write_project_json(project(m=ADD), tmp_path / "json")
    (tmp_path / "m.txt").write_text("https://x/alice/tool " + "a" * 40 + "\n")
    (tmp_path / "d.jsonl").write_text("")
    (tmp_path / "s.csv").write_text("file,set\nalice/tool/m.py,train\n")
    return tmp_path / "json", tmp_path / "m.txt", tmp_path / "d.jsonl", tmp_path / "s.csv"


def test_bundle_layout_and_repeatability(tmp_path):
    inputs = _inputs(tmp_path)
    first = bundle(*inputs, tmp_path / "one.zip")
    second = bundle(*inputs, tmp_path / "two.zip")
    assert first.read_bytes() == second.read_bytes()
    with zipfile.ZipFile(first) as zf:
        names = zf.namelist()
    top = {n.split("/")[0] + ("/" if "/" in n else "") for n in names}
    assert top == {"projects/", "manifest.txt", "duplicates.jsonl", "splits.csv"}
    assert "projects/alice$tool.json" in names


def test_bundle_missing_input(tmp_path):
    json_dir, manifest, dups, splits = _inputs(tmp_path)
    splits.unlink()
    with pytest.raises(MissingInput):
        bundle(json_dir, manifest, dups, splits, tmp_path / "out.zip")

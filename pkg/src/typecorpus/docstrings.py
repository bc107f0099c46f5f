"""Docstring sectioning for Google, reST and NumPy layouts.

Only three things are pulled out of a docstring: the one-line summary, the
description of the return value and the remaining long description.  The
long description keeps parameter sections verbatim, which is what
:func:`documented_params` reads back when counting documented arguments.
"""

from __future__ import annotations

import inspect
import re
import textwrap
from dataclasses import dataclass

__all__ = ["DocstringRecord", "detect_style", "documented_params", "parse_docstring"]

_GOOGLE_SECTIONS = {
    "args", "arguments", "attributes", "example", "examples", "keyword args",
    "keyword arguments", "kwargs", "methods", "note", "notes", "other parameters",
    "parameters", "params", "raises", "references", "return", "returns", "see also",
    "todo", "warning", "warnings", "warns", "yield", "yields",
}
_GOOGLE_PARAM_SECTIONS = {
    "args", "arguments", "keyword args", "keyword arguments", "kwargs",
    "other parameters", "parameters", "params",
}
_NUMPY_PARAM_SECTIONS = {"parameters", "other parameters", "keyword arguments", "params"}
_RETURN_SECTIONS = {"return", "returns"}

_GOOGLE_HEADER = re.compile(r"^([A-Za-z][A-Za-z ]*):\s*$")
_NUMPY_RULE = re.compile(r"^\s*-{3,}\s*$")
_REST_FIELD = re.compile(r"^:([A-Za-z]+)([^:]*):(.*)$")
_REST_PARAM_FIELDS = {"param", "parameter", "arg", "argument", "key", "keyword"}
_REST_RETURN_FIELDS = {"return", "returns"}

_GOOGLE_ENTRY = re.compile(r"^\*{0,2}([A-Za-z_]\w*)\s*(?:\([^)]*\))?\s*:")
_NUMPY_ENTRY = re.compile(r"^(\*{0,2}[A-Za-z_]\w*(?:\s*,\s*\*{0,2}[A-Za-z_]\w*)*)\s*(?::.*)?$")


@dataclass(frozen=True)
class DocstringRecord:
    func: str = ""
    ret: str = ""
    long_descr: str = ""

    @property
    def empty(self) -> bool:
        return not (self.func or self.ret or self.long_descr)


def _indent(line: str) -> int:
    return len(line) - len(line.lstrip())


def _is_numpy_header(lines: list[str], i: int) -> bool:
    return (
        i + 1 < len(lines)
        and lines[i].strip() != ""
        and _NUMPY_RULE.match(lines[i + 1]) is not None
        and _indent(lines[i]) == _indent(lines[i + 1])
    )


def _is_google_header(line: str) -> bool:
    m = _GOOGLE_HEADER.match(line)
    return m is not None and m.group(1).strip().lower() in _GOOGLE_SECTIONS


def detect_style(text: str) -> str | None:
    """Return ``"numpy"``, ``"google"``, ``"rest"`` or None."""
    lines = inspect.cleandoc(text).splitlines()
    if any(_is_numpy_header(lines, i) for i in range(len(lines))):
        return "numpy"
    if any(_is_google_header(line) for line in lines):
        return "google"
    if any(_REST_FIELD.match(line) for line in lines):
        return "rest"
    return None


def _sections(lines: list[str], style: str | None) -> list[tuple[str | None, list[str], list[str]]]:
    """Split into (section name or None for prose, header lines, body lines)."""
    blocks: list[tuple[str | None, list[str], list[str]]] = [(None, [], [])]
    i = 0
    while i < len(lines):
        line = lines[i]
        if style == "numpy" and _is_numpy_header(lines, i):
            blocks.append((line.strip().lower(), lines[i : i + 2], []))
            i += 2
            continue
        if style == "google" and _indent(line) == 0 and _is_google_header(line):
            blocks.append((line.strip()[:-1].strip().lower(), [line], []))
            i += 1
            continue
        if style == "rest" and _REST_FIELD.match(line):
            blocks.append((":" + _REST_FIELD.match(line).group(1).lower(), [line], []))
            i += 1
            continue
        if blocks[-1][0] is not None and style != "numpy" and line.strip() and _indent(line) == 0:
            # dedented prose closes a Google section or a reST field
            blocks.append((None, [], []))
        blocks[-1][2].append(line)
        i += 1
    return blocks


def _return_text(header: list[str], body: list[str], style: str) -> str:
    content = [ln for ln in body if ln.strip()]
    if style == "rest":
        content = [_REST_FIELD.match(header[0]).group(3)] + content
    elif style == "numpy":
        described = [ln for ln in content if _indent(ln) > 0]
        if described and len(described) < len(content):
            content = described
    return " ".join(ln.strip() for ln in content if ln.strip())


def _is_return_section(name: str | None) -> bool:
    return name is not None and name.lstrip(":") in _RETURN_SECTIONS


def parse_docstring(raw: str | None) -> DocstringRecord:
    if not raw or not raw.strip():
        return DocstringRecord()
    lines = inspect.cleandoc(raw).splitlines()
    style = detect_style(raw)
    blocks = _sections(lines, style)

    func = ""
    prose = blocks[0][2]
    while prose and not prose[0].strip():
        prose.pop(0)
    if prose:
        func = prose.pop(0).strip()

    ret_parts: list[str] = []
    rest: list[str] = []
    for name, header, body in blocks:
        if _is_return_section(name):
            ret_parts.append(_return_text(header, body, style or ""))
        else:
            rest.extend(header)
            rest.extend(body)
    ret = " ".join(p for p in ret_parts if p)
    return DocstringRecord(func=func, ret=ret, long_descr="\n".join(rest).strip())


def documented_params(text: str) -> list[str]:
    """Parameter names documented anywhere in ``text``, in order, without stars."""
    if not text:
        return []
    lines = textwrap.dedent(text.expandtabs()).splitlines()
    names: list[str] = []

    def add(name: str) -> None:
        name = name.lstrip("*")
        if name and name not in names:
            names.append(name)

    i = 0
    while i < len(lines):
        line = lines[i]
        m = _REST_FIELD.match(line.strip())
        if m and m.group(1).lower() in _REST_PARAM_FIELDS:
            words = m.group(2).split()
            if words:
                add(words[-1])
            i += 1
            continue
        if _is_numpy_header(lines, i) and line.strip().lower() in _NUMPY_PARAM_SECTIONS:
            i += 2
            body, i = _take_block(lines, i, stop=lambda j: _is_numpy_header(lines, j))
            for entry in _top_level(body):
                m = _NUMPY_ENTRY.match(entry)
                if m:
                    for part in m.group(1).split(","):
                        add(part.strip())
            continue
        hm = _GOOGLE_HEADER.match(line.strip())
        if hm and hm.group(1).strip().lower() in _GOOGLE_PARAM_SECTIONS:
            base = _indent(line)
            i += 1
            body, i = _take_block(
                lines, i, stop=lambda j: lines[j].strip() != "" and _indent(lines[j]) <= base
            )
            for entry in _top_level(body):
                m = _GOOGLE_ENTRY.match(entry)
                if m:
                    add(m.group(1))
            continue
        i += 1
    return names


def _take_block(lines, i, stop):
    body = []
    while i < len(lines) and not stop(i):
        body.append(lines[i])
        i += 1
    return body, i


def _top_level(body: list[str]) -> list[str]:
    content = [ln for ln in body if ln.strip()]
    if not content:
        return []
    base = min(_indent(ln) for ln in content)
    return [ln.strip() for ln in content if _indent(ln) == base]

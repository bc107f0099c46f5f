"""Syntax-tree extraction of module, class and function records.

Nested functions and classes are flattened: a function defined inside another
function lands in the same ``funcs`` list as its parent (right after it), and
every class, however deeply nested, lands in the module's ``classes`` list.
Lambdas are not functions here.
"""

from __future__ import annotations

import ast
import bisect
import re
import tokenize
from dataclasses import dataclass, field
from typing import Iterator, Union

from ._source import Lexeme, byte_to_char_col, collapse_ws, lex
from .docstrings import DocstringRecord, parse_docstring

__all__ = [
    "ClassRecord",
    "FunctionRecord",
    "ModuleRecord",
    "ParseFailure",
    "RECEIVER_NAMES",
    "SourceIndex",
    "extract_function",
    "extract_module",
    "parse_module",
    "type_text",
]

SET_LABELS = ("train", "valid", "test")
UNASSIGNED = "unassigned"
RECEIVER_NAMES = ("self", "cls")

_WINDOW_DROP = frozenset("()[]{},;")
_FUNC_NODES = (ast.FunctionDef, ast.AsyncFunctionDef)


@dataclass
class FunctionRecord:
    name: str
    params: dict[str, str] = field(default_factory=dict)
    ret_exprs: list[str] = field(default_factory=list)
    ret_type: str = ""
    variables: dict[str, str] = field(default_factory=dict)
    params_occur: dict[str, list[list[str]]] = field(default_factory=dict)
    docstring: DocstringRecord = field(default_factory=DocstringRecord)

    def typed_params(self) -> dict[str, str]:
        """Parameters that count as arguments, i.e. without the leading receiver."""
        items = list(self.params.items())
        if items and items[0][0] in RECEIVER_NAMES:
            items = items[1:]
        return dict(items)

    @property
    def has_annotations(self) -> bool:
        return bool(self.ret_type) or any(self.params.values())


@dataclass
class ClassRecord:
    name: str
    variables: dict[str, str] = field(default_factory=dict)
    funcs: list[FunctionRecord] = field(default_factory=list)


@dataclass
class ModuleRecord:
    file_path: str
    untyped_seq: str = ""
    typed_seq: str = ""
    imports: list[str] = field(default_factory=list)
    variables: dict[str, str] = field(default_factory=dict)
    classes: list[ClassRecord] = field(default_factory=list)
    funcs: list[FunctionRecord] = field(default_factory=list)
    set_label: str = UNASSIGNED

    def all_functions(self) -> Iterator[FunctionRecord]:
        yield from self.funcs
        for cls in self.classes:
            yield from cls.funcs

    @property
    def has_annotations(self) -> bool:
        return any(f.has_annotations for f in self.all_functions())


@dataclass(frozen=True)
class ParseFailure:
    file_path: str
    reason: str


def parse_module(source_text: str, file_path: str = "") -> Union[ast.Module, ParseFailure]:
    try:
        return ast.parse(source_text, filename=file_path or "<unknown>")
    except SyntaxError as exc:
        where = f" (line {exc.lineno})" if exc.lineno else ""
        return ParseFailure(file_path, f"{type(exc).__name__}: {exc.msg}{where}")
    except (ValueError, RecursionError, MemoryError) as exc:
        return ParseFailure(file_path, f"{type(exc).__name__}: {exc}")


def type_text(node: ast.expr | None) -> str:
    """Annotation as a canonical string; string forward references are unquoted."""
    if node is None:
        return ""
    if isinstance(node, ast.Constant) and isinstance(node.value, str):
        try:
            node = ast.parse(node.value.strip(), mode="eval").body
        except SyntaxError:
            return collapse_ws(node.value)
    return collapse_ws(ast.unparse(node))


_LINE_RE = re.compile(r"[^\r\n]*(?:\r\n|\r|\n)|[^\r\n]+$")


class SourceIndex:
    """Source text plus its lexemes, for slicing token windows by AST span."""

    def __init__(self, source: str):
        self.source = source
        # only \r\n, \r and \n end a line for the parser; str.splitlines also breaks on \f etc.
        self.lines = _LINE_RE.findall(source)
        try:
            self.lexemes = lex(source)
        except (tokenize.TokenError, IndentationError, SyntaxError):
            self.lexemes = []
        self._starts = [lx.start for lx in self.lexemes]

    def char_pos(self, lineno: int, col: int) -> tuple[int, int]:
        line = self.lines[lineno - 1] if 0 < lineno <= len(self.lines) else ""
        return lineno, byte_to_char_col(line, col)

    def start_of(self, node: ast.AST) -> tuple[int, int]:
        return self.char_pos(node.lineno, node.col_offset)

    def end_of(self, node: ast.AST) -> tuple[int, int]:
        return self.char_pos(node.end_lineno, node.end_col_offset)

    def between(self, start: tuple[int, int], end: tuple[int, int]) -> list[Lexeme]:
        lo = bisect.bisect_left(self._starts, start)
        hi = bisect.bisect_left(self._starts, end)
        return self.lexemes[lo:hi]

    def segment(self, node: ast.AST) -> str:
        """Source text of ``node``; like ``ast.get_source_segment`` without re-splitting the file."""
        if getattr(node, "end_lineno", None) is None:
            return ""
        first, last = node.lineno - 1, node.end_lineno - 1
        start, end = self.start_of(node)[1], self.end_of(node)[1]
        if first == last:
            return self.lines[first][start:end]
        parts = [self.lines[first][start:], *self.lines[first + 1:last], self.lines[last][:end]]
        return "".join(parts)


def _store_names(target: ast.expr) -> Iterator[str]:
    if isinstance(target, ast.Name):
        yield target.id
    elif isinstance(target, (ast.Tuple, ast.List)):
        for elt in target.elts:
            yield from _store_names(elt)
    elif isinstance(target, ast.Starred):
        yield from _store_names(target.value)


def _child_blocks(stmt: ast.stmt) -> list[list[ast.stmt]]:
    blocks = []
    for name in ("body", "orelse", "finalbody"):
        block = getattr(stmt, name, None)
        if isinstance(block, list) and block and isinstance(block[0], ast.stmt):
            blocks.append(block)
    for handler in getattr(stmt, "handlers", ()):
        blocks.append(handler.body)
    for case in getattr(stmt, "cases", ()):
        blocks.append(case.body)
    return blocks


def _scope_statements(body: list[ast.stmt]) -> Iterator[ast.stmt]:
    """Statements of one scope in source order; nested def/class bodies are not entered."""
    for stmt in body:
        yield stmt
        if isinstance(stmt, (*_FUNC_NODES, ast.ClassDef)):
            continue
        for block in _child_blocks(stmt):
            yield from _scope_statements(block)


def _collect_variables(body: list[ast.stmt]) -> dict[str, str]:
    variables: dict[str, str] = {}
    for stmt in _scope_statements(body):
        if isinstance(stmt, ast.Assign):
            for target in stmt.targets:
                for name in _store_names(target):
                    variables.setdefault(name, "")
        elif isinstance(stmt, ast.AnnAssign) and isinstance(stmt.target, ast.Name):
            ann = type_text(stmt.annotation)
            if not variables.get(stmt.target.id):
                variables[stmt.target.id] = ann
    return variables


def _windows(body: list[ast.stmt], index: SourceIndex) -> Iterator[list[Lexeme]]:
    """One lexeme window per simple statement, plus one per compound-statement header."""
    for stmt in body:
        if isinstance(stmt, (*_FUNC_NODES, ast.ClassDef)):
            continue
        blocks = _child_blocks(stmt)
        if not blocks:
            yield index.between(index.start_of(stmt), index.end_of(stmt))
            continue
        first = stmt.body[0] if getattr(stmt, "body", None) else None
        if isinstance(stmt, ast.Match):
            first = stmt.cases[0].pattern
        if first is not None and not isinstance(stmt, ast.Try):
            yield index.between(index.start_of(stmt), index.start_of(first))
        for handler in getattr(stmt, "handlers", ()):
            yield index.between(index.start_of(handler), index.start_of(handler.body[0]))
        for case in getattr(stmt, "cases", ()):
            yield index.between(index.start_of(case.pattern), index.start_of(case.body[0]))
        for block in blocks:
            yield from _windows(block, index)


def _uses(window: list[Lexeme], name: str) -> bool:
    for i, lx in enumerate(window):
        if lx.kind == "name" and lx.text == name and not (i and window[i - 1].text == "."):
            return True
    return False


def _window_tokens(window: list[Lexeme]) -> list[str]:
    return [
        lx.text
        for lx in window
        if lx.kind in ("name", "keyword") or (lx.kind == "op" and lx.text not in _WINDOW_DROP)
    ]


def all_args(args: ast.arguments) -> list[ast.arg]:
    out = [*args.posonlyargs, *args.args]
    if args.vararg:
        out.append(args.vararg)
    out.extend(args.kwonlyargs)
    if args.kwarg:
        out.append(args.kwarg)
    return out


def _returns(body: list[ast.stmt]) -> Iterator[ast.Return]:
    for stmt in _scope_statements(body):
        if isinstance(stmt, ast.Return):
            yield stmt


def extract_function(node: ast.FunctionDef | ast.AsyncFunctionDef, index: SourceIndex) -> FunctionRecord:
    params = {arg.arg: type_text(arg.annotation) for arg in all_args(node.args)}
    windows = list(_windows(node.body, index))
    params_occur = {
        name: [_window_tokens(w) for w in windows if _uses(w, name)] for name in params
    }
    return FunctionRecord(
        name=node.name,
        params=params,
        ret_exprs=[index.segment(r) for r in _returns(node.body)],
        ret_type=type_text(node.returns),
        variables=_collect_variables(node.body),
        params_occur=params_occur,
        docstring=parse_docstring(ast.get_docstring(node, clean=False)),
    )


def _imports(tree: ast.AST) -> list[str]:
    names: list[str] = []

    def visit(node: ast.AST) -> None:
        if isinstance(node, (ast.Import, ast.ImportFrom)):
            for alias in node.names:
                bound = alias.asname or alias.name
                if bound != "*" and bound not in names:
                    names.append(bound)
        for child in ast.iter_child_nodes(node):
            visit(child)

    visit(tree)
    return names


def _collect_defs(
    body: list[ast.stmt],
    funcs: list[FunctionRecord],
    classes: list[ClassRecord],
    index: SourceIndex,
) -> None:
    for stmt in _scope_statements(body):
        if isinstance(stmt, _FUNC_NODES):
            funcs.append(extract_function(stmt, index))
            _collect_defs(stmt.body, funcs, classes, index)
        elif isinstance(stmt, ast.ClassDef):
            record = ClassRecord(name=stmt.name, variables=_collect_variables(stmt.body))
            classes.append(record)
            _collect_defs(stmt.body, record.funcs, classes, index)


def extract_module(tree: ast.Module, file_path: str, source: str | SourceIndex) -> ModuleRecord:
    index = source if isinstance(source, SourceIndex) else SourceIndex(source)
    record = ModuleRecord(
        file_path=file_path,
        imports=_imports(tree),
        variables=_collect_variables(tree.body),
    )
    _collect_defs(tree.body, record.funcs, record.classes, index)
    return record

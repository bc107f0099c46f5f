"""Normalized token streams and their position-aligned type streams.

Comments are dropped, string literals become ``[string]`` and numbers become
``[number]``.  The type stream holds, for every token, the declared type of
the identifier at that position or ``"0"``.  A declared type reaches every
occurrence of the name inside the scope that binds it, including nested
functions, until an inner scope binds the same name again.
"""

from __future__ import annotations

import ast
import logging
from dataclasses import dataclass
from typing import Mapping, Sequence

from ._source import KEYWORDS, NUMBER_MASK, STRING_MASK, Lexeme, lex
from .extraction import SourceIndex, all_args, type_text

__all__ = [
    "NO_TYPE",
    "TokenSequencePair",
    "align_types",
    "normalize_tokens",
    "render_tokens",
    "sequence_pair",
]

log = logging.getLogger(__name__)

NO_TYPE = "0"


@dataclass(frozen=True)
class TokenSequencePair:
    untyped_seq: tuple[str, ...]
    typed_seq: tuple[str, ...]

    def __post_init__(self):
        if len(self.untyped_seq) != len(self.typed_seq):
            raise ValueError("token and type sequences differ in length")

    def as_strings(self) -> tuple[str, str]:
        return " ".join(self.untyped_seq), " ".join(self.typed_seq)


def _masked(lx: Lexeme) -> str:
    if lx.kind == "string":
        return STRING_MASK
    if lx.kind == "number":
        return NUMBER_MASK
    return lx.text


def normalize_tokens(source_text: str) -> list[str]:
    return [_masked(lx) for lx in lex(source_text)]


def render_tokens(tokens: Sequence[str]) -> str:
    """Render a token stream back to one line of text that lexes to the same stream."""
    swap = {STRING_MASK: '""', NUMBER_MASK: "0"}
    return " ".join(swap.get(t, t) for t in tokens)


def _compact(type_str: str) -> str:
    """Types go into a space-joined stream, so they must not contain spaces."""
    return "".join(type_str.split()) or NO_TYPE


def _is_identifier(token: str) -> bool:
    return token.isidentifier() and token not in KEYWORDS


def align_types(tokens: Sequence[str], annotations: Mapping[str, str]) -> TokenSequencePair:
    """Single-scope alignment: every identifier token named in ``annotations`` gets its type.

    Attribute names (tokens right after ``.``) are never typed.
    """
    typed = []
    seen = set()
    for i, t in enumerate(tokens):
        if _is_identifier(t) and t in annotations and not (i and tokens[i - 1] == "."):
            typed.append(_compact(annotations[t]))
            seen.add(t)
        else:
            typed.append(NO_TYPE)
    for name in annotations:
        if name not in seen:
            log.warning("ScopeMismatch: annotated name %r never occurs as an identifier", name)
    return TokenSequencePair(tuple(tokens), tuple(typed))


# -- scoped alignment over a parsed module -----------------------------------

_SCOPE_NODES = (
    ast.FunctionDef, ast.AsyncFunctionDef, ast.Lambda, ast.ClassDef,
    ast.ListComp, ast.SetComp, ast.DictComp, ast.GeneratorExp,
)


class _Scope:
    __slots__ = ("kind", "parent", "bindings")

    def __init__(self, kind: str, parent: _Scope | None):
        self.kind = kind
        self.parent = parent
        self.bindings: dict[str, str] = {}

    def bind(self, name: str, type_str: str = "") -> None:
        if type_str or name not in self.bindings:
            self.bindings[name] = type_str

    def resolve(self, name: str) -> str:
        scope, innermost = self, True
        while scope is not None:
            if (scope.kind != "class" or innermost) and name in scope.bindings:
                return scope.bindings[name]
            scope, innermost = scope.parent, False
        return ""


def _scope_nodes(nodes: Sequence[ast.AST]):
    """Walk nodes of one scope without entering nested scopes (which are yielded)."""
    stack = list(reversed(nodes))
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, _SCOPE_NODES) or isinstance(node, ast.JoinedStr):
            continue
        stack.extend(reversed(list(ast.iter_child_nodes(node))))


def _bind_body(scope: _Scope, body: Sequence[ast.AST]) -> None:
    declared_elsewhere: set[str] = set()
    for node in _scope_nodes(body):
        if isinstance(node, ast.Name) and isinstance(node.ctx, (ast.Store, ast.Del)):
            scope.bind(node.id)
        elif isinstance(node, ast.AnnAssign) and isinstance(node.target, ast.Name):
            scope.bind(node.target.id, type_text(node.annotation))
        elif isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            scope.bind(node.name)
        elif isinstance(node, (ast.Import, ast.ImportFrom)):
            for alias in node.names:
                if alias.name != "*":
                    scope.bind((alias.asname or alias.name).split(".")[0])
        elif isinstance(node, ast.ExceptHandler) and node.name:
            scope.bind(node.name)
        elif isinstance(node, (ast.MatchAs, ast.MatchStar)) and node.name:
            scope.bind(node.name)
        elif isinstance(node, ast.MatchMapping) and node.rest:
            scope.bind(node.rest)
        elif isinstance(node, (ast.Global, ast.Nonlocal)):
            declared_elsewhere.update(node.names)
    for name in declared_elsewhere:
        scope.bindings.pop(name, None)


class _TypeMapper:
    def __init__(self, index: SourceIndex):
        self.index = index
        self.types: dict[tuple[int, int], str] = {}
        self._lexeme_at = {lx.start: i for i, lx in enumerate(index.lexemes)}

    def _mark(self, node: ast.AST, type_str: str) -> None:
        if type_str:
            self.types[self.index.start_of(node)] = type_str

    def _mark_def_name(self, node: ast.AST, type_str: str) -> None:
        if not type_str:
            return
        i = self._lexeme_at.get(self.index.start_of(node))
        lexemes = self.index.lexemes
        if i is None:
            return
        while i < len(lexemes) - 1 and lexemes[i].text != "def":
            i += 1
        if i + 1 < len(lexemes) and lexemes[i + 1].text == node.name:
            self.types[lexemes[i + 1].start] = type_str

    def visit_nodes(self, nodes: Sequence[ast.AST], scope: _Scope) -> None:
        for node in nodes:
            self.visit(node, scope)

    def visit(self, node: ast.AST, scope: _Scope) -> None:
        if isinstance(node, ast.Name):
            self._mark(node, scope.resolve(node.id))
        elif isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            self._function(node, scope)
        elif isinstance(node, ast.Lambda):
            self.visit_nodes(node.args.defaults + [d for d in node.args.kw_defaults if d], scope)
            inner = _Scope("function", scope)
            for arg in all_args(node.args):
                inner.bind(arg.arg)
            _bind_body(inner, [node.body])
            self.visit(node.body, inner)
        elif isinstance(node, ast.ClassDef):
            self.visit_nodes(node.decorator_list + node.bases + node.keywords, scope)
            inner = _Scope("class", scope)
            _bind_body(inner, node.body)
            self.visit_nodes(node.body, inner)
        elif isinstance(node, (ast.ListComp, ast.SetComp, ast.DictComp, ast.GeneratorExp)):
            self._comprehension(node, scope)
        elif isinstance(node, ast.JoinedStr):
            return  # masked wholesale in the token stream
        else:
            self.visit_nodes(list(ast.iter_child_nodes(node)), scope)

    def _function(self, node: ast.FunctionDef | ast.AsyncFunctionDef, scope: _Scope) -> None:
        args = node.args
        outer = node.decorator_list + args.defaults + [d for d in args.kw_defaults if d]
        outer += [a.annotation for a in all_args(args) if a.annotation]
        if node.returns:
            outer.append(node.returns)
        self.visit_nodes(outer, scope)
        self._mark_def_name(node, type_text(node.returns))
        inner = _Scope("function", scope)
        for arg in all_args(args):
            inner.bind(arg.arg, type_text(arg.annotation))
        _bind_body(inner, node.body)
        for arg in all_args(args):
            self._mark(arg, inner.resolve(arg.arg))
        self.visit_nodes(node.body, inner)

    def _comprehension(self, node: ast.AST, scope: _Scope) -> None:
        gens = node.generators
        self.visit(gens[0].iter, scope)
        inner = _Scope("comprehension", scope)
        for gen in gens:
            for name_node in ast.walk(gen.target):
                if isinstance(name_node, ast.Name):
                    inner.bind(name_node.id)
        for i, gen in enumerate(gens):
            self.visit(gen.target, inner)
            if i:
                self.visit(gen.iter, inner)
            self.visit_nodes(gen.ifs, inner)
        if isinstance(node, ast.DictComp):
            self.visit_nodes([node.key, node.value], inner)
        else:
            self.visit(node.elt, inner)


def sequence_pair(source: str | SourceIndex, tree: ast.Module | None = None) -> TokenSequencePair:
    """Token stream of a whole file with scope-aware type propagation."""
    index = source if isinstance(source, SourceIndex) else SourceIndex(source)
    if tree is None:
        tree = ast.parse(index.source)
    module = _Scope("module", None)
    _bind_body(module, tree.body)
    mapper = _TypeMapper(index)
    mapper.visit_nodes(tree.body, module)
    untyped, typed = [], []
    for lx in index.lexemes:
        untyped.append(_masked(lx))
        type_str = mapper.types.get(lx.start, "") if lx.kind == "name" else ""
        typed.append(_compact(type_str))
    return TokenSequencePair(tuple(untyped), tuple(typed))

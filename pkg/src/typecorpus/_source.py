"""Decoding and lexing helpers used by several stages."""

from __future__ import annotations

import io
import keyword
import re
import token as tok
import tokenize
from typing import NamedTuple

_SKIP = {tok.COMMENT, tok.NL, tok.NEWLINE, tok.INDENT, tok.DEDENT, tok.ENDMARKER, tok.ENCODING}
# Python >= 3.12 splits f-strings into several tokens.
_FSTRING_START = getattr(tok, "FSTRING_START", None)
_FSTRING_END = getattr(tok, "FSTRING_END", None)

KEYWORDS = frozenset(keyword.kwlist)
STRING_MASK = "[string]"
NUMBER_MASK = "[number]"


class Lexeme(NamedTuple):
    text: str
    kind: str  # "name", "keyword", "op", "string", "number"
    start: tuple[int, int]  # (line, char column)
    end: tuple[int, int]


def decode_source(data: bytes) -> str:
    """UTF-8 first, then the encoding declared in the file's coding cookie.

    Raises ``UnicodeDecodeError`` (or ``SyntaxError`` for a bogus cookie) when
    neither works.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        encoding, _ = tokenize.detect_encoding(io.BytesIO(data).readline)
        if encoding in ("utf-8", "utf-8-sig"):
            raise
        text = data.decode(encoding)
    if text.startswith("\ufeff"):
        text = text[1:]
    return text


def lex(source: str) -> list[Lexeme]:
    """Significant tokens of ``source`` with comments and layout removed.

    An f-string comes back as a single ``string`` lexeme.  Raises
    ``tokenize.TokenError`` / ``IndentationError`` on untokenizable input.
    """
    out: list[Lexeme] = []
    fstring_depth = 0
    fstring_start = None
    for t in tokenize.generate_tokens(io.StringIO(source).readline):
        if _FSTRING_START is not None and t.type == _FSTRING_START:
            if fstring_depth == 0:
                fstring_start = t.start
            fstring_depth += 1
            continue
        if fstring_depth:
            if t.type == _FSTRING_END:
                fstring_depth -= 1
                if fstring_depth == 0:
                    out.append(Lexeme(STRING_MASK, "string", fstring_start, t.end))
            continue
        if t.type in _SKIP:
            continue
        if t.type == tok.NAME:
            kind = "keyword" if t.string in KEYWORDS else "name"
        elif t.type == tok.STRING:
            kind = "string"
        elif t.type == tok.NUMBER:
            kind = "number"
        elif t.type == tok.ERRORTOKEN and t.string.isspace():
            continue
        else:
            kind = "op"
        out.append(Lexeme(t.string, kind, t.start, t.end))
    return out


_IDENT_RE = re.compile(r"[^\W\d]\w*")
_STRING_RE = re.compile(r"('''|\"\"\"|'|\")(?:\\.|(?!\1).)*?\1", re.S)
_COMMENT_RE = re.compile(r"#[^\n]*")


def rough_identifiers(source: str) -> list[str]:
    """Regex fallback for text the tokenizer rejects (e.g. stray Python 2)."""
    text = _STRING_RE.sub(" ", source)
    text = _COMMENT_RE.sub(" ", text)
    return [w for w in _IDENT_RE.findall(text) if w not in KEYWORDS]


def byte_to_char_col(line: str, col: int) -> int:
    """Convert an AST UTF-8 byte offset into a character offset within ``line``."""
    if line.isascii():
        return col
    return len(line.encode("utf-8")[:col].decode("utf-8", errors="ignore"))


def collapse_ws(text: str) -> str:
    return " ".join(text.split())

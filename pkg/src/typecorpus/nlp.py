"""Identifier splitting and a small rule-based lemmatizer."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

__all__ = ["lemmatize", "load_exceptions", "normalize_identifier", "split_identifier"]

_VOWELS = set("aeiouy")
_ES_SUFFIXES = ("sses", "shes", "ches", "xes", "zes")
_S_BLOCKERS = ("ss", "us", "is")
_E_RESTORE = ("at", "iz", "bl", "rs")
# -ing words that are not gerunds, also as the tail of compounds (docstring)
_ING_BLOCKERS = ("string", "thing", "spring", "bring", "ceiling", "during", "morning", "evening")


@lru_cache(maxsize=None)
def load_exceptions() -> dict[str, str]:
    table = {}
    text = resources.files("typecorpus").joinpath("data/lemma_exceptions.txt").read_text("utf-8")
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        word, lemma = line.split("\t")
        table[word] = lemma
    return table


def _kind(ch: str) -> str:
    if ch.isdigit():
        return "D"
    if ch.isupper():
        return "U"
    return "L"


def split_identifier(name: str) -> list[str]:
    """Split on underscores, case changes and digit runs; lowercase the parts.

    A run of capitals stays together except for its last letter when that
    letter starts a lowercase word, so ``HTTPServer`` gives http, server.
    """
    parts: list[str] = []
    for chunk in name.replace("_", " ").split():
        cur = chunk[0]
        for prev, ch, nxt in zip(chunk, chunk[1:], chunk[2:] + " "):
            a, b = _kind(prev), _kind(ch)
            boundary = (
                (a == "D") != (b == "D")
                or (a == "L" and b == "U")
                or (a == "U" and b == "U" and nxt != " " and _kind(nxt) == "L")
            )
            if boundary:
                parts.append(cur)
                cur = ch
            else:
                cur += ch
        parts.append(cur)
    return [p.lower() for p in parts if p]


def _restore(stem: str) -> str:
    if len(stem) >= 4 and stem[-1] == stem[-2] and stem[-1] not in _VOWELS | set("lsz"):
        return stem[:-1]
    if stem.endswith(_E_RESTORE):
        return stem + "e"
    return stem


def _strip_once(word: str) -> str:
    if word.endswith("ies") and len(word) > 4:
        return word[:-3] + "y"
    if word.endswith(_ES_SUFFIXES):
        return word[:-2]
    if word.endswith("s") and len(word) >= 3 and not word.endswith(_S_BLOCKERS):
        return word[:-1]
    if word.endswith("ing") and len(word) >= 6 and not word.endswith(_ING_BLOCKERS):
        stem = word[:-3]
        if _VOWELS & set(stem):
            return _restore(stem)
    if word.endswith("ed") and not word.endswith("eed") and len(word) >= 5:
        stem = word[:-2]
        if _VOWELS & set(stem):
            return _restore(stem)
    return word


@lru_cache(maxsize=65536)
def lemmatize(token: str) -> str:
    exceptions = load_exceptions()
    protected = _protected()
    word = token
    while True:  # every rule shortens the word
        if word in exceptions:
            return exceptions[word]
        if word in protected or not word.isalpha():
            return word
        nxt = _strip_once(word)
        if nxt == word:
            return word
        word = nxt


@lru_cache(maxsize=1)
def _protected() -> frozenset[str]:
    return frozenset(load_exceptions().values())


def normalize_identifier(name: str) -> str:
    return " ".join(lemmatize(t) for t in split_identifier(name))

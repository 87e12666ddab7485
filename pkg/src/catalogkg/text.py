"""String normalization shared by catalog values and query tokens.

Catalog values and query text go through the same rules so that a value
counted in the graph and a phrase matched in a query compare equal:
lowercase, trim, collapse internal whitespace, strip leading/trailing
punctuation.
"""
from __future__ import annotations

import re
import unicodedata
from typing import NamedTuple

_WS = re.compile(r"\s+")
_NONSPACE = re.compile(r"\S+")


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _strip_span(s: str, start: int, end: int) -> tuple[int, int]:
    while start < end and _is_punct(s[start]):
        start += 1
    while end > start and _is_punct(s[end - 1]):
        end -= 1
    return start, end


def normalize_value(raw: str) -> str:
    """Canonical form of a catalog value; may return ``""``."""
    s = _WS.sub(" ", raw.lower()).strip()
    start, end = _strip_span(s, 0, len(s))
    return s[start:end].strip()


class Token(NamedTuple):
    text: str
    start: int
    end: int


def tokenize(raw: str) -> list[Token]:
    """Split on whitespace and normalize each token.

    Offsets index into ``raw`` and cover the token after punctuation
    stripping. Tokens that are pure punctuation are dropped.
    """
    tokens = []
    for m in _NONSPACE.finditer(raw):
        start, end = _strip_span(raw, m.start(), m.end())
        if start < end:
            tokens.append(Token(raw[start:end].lower(), start, end))
    return tokens


def phrase_tokens(value: str) -> tuple[str, ...]:
    """Token tuple under which a catalog value is matched in queries."""
    return tuple(t.text for t in tokenize(value))

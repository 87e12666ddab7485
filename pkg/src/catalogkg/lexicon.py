"""Attribute dictionary and candidate span extraction.

Matching is token-based: a phrase matches only on token boundaries of the
normalized query, so ``maroon`` never fires inside ``maroonish``. Every
match is reported, overlapping and nested ones included; resolving which
of several conflicting readings is right is the job of the classifier.
"""
from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple

from .catalog import KnowledgeGraph
from .errors import InputFormatError
from .text import Token, phrase_tokens, tokenize

_END = None  # trie key holding the (attribute, value) pairs of a complete phrase


@dataclass(frozen=True)
class Query:
    raw: str
    tokens: tuple[Token, ...]

    @classmethod
    def parse(cls, raw: str) -> "Query":
        return cls(raw, tuple(tokenize(raw)))

    @property
    def words(self) -> tuple[str, ...]:
        return tuple(t.text for t in self.tokens)


class CandidateSpan(NamedTuple):
    attribute: str
    value: str
    first: int  # token range, inclusive
    last: int
    start: int  # character range in the raw query, end exclusive
    end: int
    text: str  # normalized matched phrase (a dictionary key)

    def overlaps(self, other: "CandidateSpan") -> bool:
        return self.first <= other.last and other.first <= self.last

    @property
    def pair(self) -> tuple[str, str]:
        return self.attribute, self.value


class AnchorAssignment(NamedTuple):
    attribute: str
    value: str
    confidence: float


def surface_forms(phrase: tuple[str, ...]) -> list[tuple[str, ...]]:
    """The phrase itself plus, for single tokens, a naive plural/singular twin."""
    forms = [phrase]
    if len(phrase) == 1:
        tok = phrase[0]
        if tok.endswith("s"):
            if len(tok) > 1:
                forms.append((tok[:-1],))
        else:
            forms.append((tok + "s",))
    return forms


class Dictionary:
    """Map from normalized phrase to the (attribute, value) pairs it can denote.

    Immutable after construction. Lookups walk a token trie, so a scan from
    each query position stops as soon as no phrase can continue.
    """

    def __init__(self, entries: dict[str, frozenset]):
        self.entries = {p: frozenset(v) for p, v in entries.items() if p and v}
        self._trie: dict = {}
        for phrase, pairs in self.entries.items():
            node = self._trie
            for tok in phrase.split(" "):
                node = node.setdefault(tok, {})
            node[_END] = tuple(sorted(pairs))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]], plurals: bool = True) -> "Dictionary":
        entries = defaultdict(set)
        for attr, value in pairs:
            toks = phrase_tokens(value)
            if not toks:
                continue
            forms = surface_forms(toks) if plurals else [toks]
            for form in forms:
                entries[" ".join(form)].add((attr, value))
        return cls(entries)

    def __len__(self):
        return len(self.entries)

    def __contains__(self, phrase):
        return phrase in self.entries

    def __getitem__(self, phrase) -> frozenset:
        return self.entries[phrase]

    def __eq__(self, other):
        return isinstance(other, Dictionary) and self.entries == other.entries

    def scan(self, words: tuple[str, ...]):
        """Yield ``(first, last, pairs)`` for every phrase occurrence in ``words``."""
        trie = self._trie
        for i in range(len(words)):
            node = trie
            for j in range(i, len(words)):
                node = node.get(words[j])
                if node is None:
                    break
                pairs = node.get(_END)
                if pairs:
                    yield i, j, pairs

    def save(self, path) -> None:
        with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
            for phrase in sorted(self.entries):
                for attr, value in sorted(self.entries[phrase]):
                    fh.write(json.dumps([phrase, attr, value], ensure_ascii=False) + "\n")

    @classmethod
    def load(cls, path) -> "Dictionary":
        entries = defaultdict(set)
        with Path(path).open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    phrase, attr, value = json.loads(line)
                except (ValueError, TypeError):
                    raise InputFormatError("expected [phrase, attribute, value]", path, lineno) from None
                entries[phrase].add((attr, value))
        return cls(entries)


def build_dictionary(kg: KnowledgeGraph, min_support: int = 1) -> Dictionary:
    if min_support < 1:
        raise ValueError("min_support must be >= 1")
    return Dictionary.from_pairs(
        (n, x) for (n, x), deg in kg.degrees.items() if deg >= min_support)


def _as_query(query) -> Query:
    return query if isinstance(query, Query) else Query.parse(query)


def extract_candidates(query, dictionary: Dictionary) -> list[CandidateSpan]:
    """All dictionary matches in ``query``, ordered by start token, longest first."""
    q = _as_query(query)
    words = q.words
    spans = []
    for i, j, pairs in dictionary.scan(words):
        text = " ".join(words[i:j + 1])
        start, end = q.tokens[i].start, q.tokens[j].end
        for attr, value in pairs:
            spans.append(CandidateSpan(attr, value, i, j, start, end, text))
    spans.sort(key=span_order)
    return spans


def span_order(s: CandidateSpan):
    return s.first, -s.last, s.attribute, s.value


def detect_conflicts(spans: list[CandidateSpan]) -> list[list[CandidateSpan]]:
    """Group spans linked by overlap between differing attributes.

    Groups are connected components (transitive closure) of the pairwise
    conflict relation; only groups of two or more spans are returned.
    """
    spans = sorted(set(spans), key=span_order)
    parent = list(range(len(spans)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, a in enumerate(spans):
        for j in range(i + 1, len(spans)):
            b = spans[j]
            if a.attribute != b.attribute and a.overlaps(b):
                parent[find(i)] = find(j)

    groups = defaultdict(list)
    for i, s in enumerate(spans):
        groups[find(i)].append(s)
    return [g for g in sorted(groups.values(), key=lambda g: span_order(g[0])) if len(g) > 1]


def anchors(spans: list[CandidateSpan], target: str) -> list[AnchorAssignment]:
    """Evidence attributes for ``target``: every other attribute with a candidate.

    Each of the ``k`` distinct candidate values of an attribute gets
    confidence ``1/k``. Anchors overlapping a target span are kept; they are
    the evidence that decides the conflict.
    """
    by_attr = defaultdict(set)
    for s in spans:
        if s.attribute != target:
            by_attr[s.attribute].add(s.value)
    out = []
    for attr in sorted(by_attr):
        vals = sorted(by_attr[attr])
        conf = 1.0 / len(vals)
        out.extend(AnchorAssignment(attr, v, conf) for v in vals)
    return out

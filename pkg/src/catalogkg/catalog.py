"""Catalog ingestion and the attribute co-occurrence graph.

The graph holds three sparse count tables over a catalog:

* ``degrees[(n, x)]`` -- items with value ``x`` for attribute ``n``
* ``pair_counts[(n, x, m)]`` -- of those, items with any value for ``m``
* ``triple_counts[(n, x, m, l)]`` -- of those, items with ``m = l``

Counts are over items, not item-value instances, so an item carrying two
colors adds one to each color's degree.
"""
from __future__ import annotations

import hashlib
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

from .errors import InputFormatError, SchemaError, SnapshotError
from .text import normalize_value

DEFAULT_ATTRIBUTES = ("product_type", "brand", "color")

GRAPH_FORMAT = "catalogkg-graph"
GRAPH_VERSION = 1


@dataclass(frozen=True)
class AttributeSchema:
    """Ordered, duplicate-free list of attribute identifiers."""

    attributes: tuple[str, ...] = DEFAULT_ATTRIBUTES

    def __post_init__(self):
        attrs = tuple(self.attributes)
        object.__setattr__(self, "attributes", attrs)
        if not attrs:
            raise ValueError("schema must contain at least one attribute")
        for a in attrs:
            if not isinstance(a, str) or not a.strip():
                raise ValueError(f"invalid attribute identifier {a!r}")
            if a != a.lower():
                raise ValueError(f"attribute identifiers are lowercase: {a!r}")
        if len(set(attrs)) != len(attrs):
            raise ValueError(f"duplicate attribute identifiers in {attrs}")

    @classmethod
    def parse(cls, text: str) -> "AttributeSchema":
        """Build from a comma-separated list such as ``"product_type,brand,color"``."""
        return cls(tuple(a.strip() for a in text.split(",") if a.strip()))

    def __len__(self):
        return len(self.attributes)

    def __iter__(self):
        return iter(self.attributes)

    def __contains__(self, attr):
        return attr in self.attributes

    def index(self, attr: str) -> int:
        self.require(attr)
        return self.attributes.index(attr)

    def require(self, attr: str) -> None:
        if attr not in self.attributes:
            raise SchemaError(f"attribute {attr!r} is not in schema {list(self.attributes)}")

    def fingerprint(self) -> str:
        return hashlib.sha256("\x1f".join(self.attributes).encode()).hexdigest()[:16]


@dataclass(frozen=True)
class Item:
    item_id: str
    values: Mapping[str, frozenset] = field(default_factory=dict)

    @classmethod
    def from_raw(cls, item_id: str, attributes: Mapping[str, Iterable[str]],
                 schema: AttributeSchema) -> "Item":
        """Validate against ``schema`` and normalize every value.

        Values that normalize to the empty string are dropped, and so are
        attributes left with no values.
        """
        values = {}
        for attr, raw_values in attributes.items():
            if attr not in schema:
                raise SchemaError(f"unknown attribute {attr!r} (schema: {list(schema)})")
            if isinstance(raw_values, str):
                raw_values = [raw_values]
            normed = frozenset(v for v in (normalize_value(r) for r in raw_values) if v)
            if normed:
                values[attr] = normed
        return cls(str(item_id), values)

    def has(self, attr: str) -> bool:
        return bool(self.values.get(attr))

    def to_record(self) -> dict:
        return {"item_id": self.item_id,
                "attributes": {a: sorted(v) for a, v in sorted(self.values.items())}}


def parse_item_line(line: str, schema: AttributeSchema, lineno=None, path=None) -> Item:
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"malformed JSON: {exc.msg}", path, lineno) from None
    if not isinstance(rec, dict) or "item_id" not in rec:
        raise InputFormatError("record must be an object with an 'item_id'", path, lineno)
    attrs = rec.get("attributes", {})
    if not isinstance(attrs, dict):
        raise InputFormatError("'attributes' must be an object", path, lineno)
    for attr, vals in attrs.items():
        ok = isinstance(vals, str) or (
            isinstance(vals, list) and all(isinstance(v, str) for v in vals))
        if not ok:
            raise InputFormatError(f"values of {attr!r} must be a list of strings", path, lineno)
    try:
        return Item.from_raw(rec["item_id"], attrs, schema)
    except SchemaError as exc:
        raise InputFormatError(str(exc), path, lineno) from None


def load_catalog(path, schema: AttributeSchema = AttributeSchema()) -> Iterator[Item]:
    """Yield items from a newline-delimited JSON catalog, in file order.

    Blank lines are skipped. Errors carry the 1-based line number and, for
    schema violations, the offending attribute name.
    """
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if line.strip():
                yield parse_item_line(line, schema, lineno, path)


def write_catalog(items: Iterable[Item], path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for item in items:
            fh.write(json.dumps(item.to_record(), ensure_ascii=False, sort_keys=True))
            fh.write("\n")


@dataclass(frozen=True, eq=True)
class KnowledgeGraph:
    """Immutable co-occurrence statistics; safe to share across threads."""

    schema: AttributeSchema
    item_count: int
    degrees: Mapping[tuple, int]
    pair_counts: Mapping[tuple, int]
    triple_counts: Mapping[tuple, int]

    def __post_init__(self):
        for name in ("degrees", "pair_counts", "triple_counts"):
            table = getattr(self, name)
            if not isinstance(table, MappingProxyType):
                object.__setattr__(self, name, MappingProxyType(dict(table)))

    def degree(self, n: str, x: str) -> int:
        self.schema.require(n)
        return self.degrees.get((n, x), 0)

    def pair_count(self, n: str, x: str, m: str) -> int:
        self.schema.require(n)
        self.schema.require(m)
        return self.pair_counts.get((n, x, m), 0)

    def triple_count(self, n: str, x: str, m: str, l: str) -> int:
        self.schema.require(n)
        self.schema.require(m)
        return self.triple_counts.get((n, x, m, l), 0)

    def values(self, attr: str) -> list[str]:
        """Observed values of ``attr``, sorted."""
        self.schema.require(attr)
        return sorted(x for (n, x) in self.degrees if n == attr)


def build_graph(items: Iterable[Item], schema: AttributeSchema) -> KnowledgeGraph:
    degrees: Counter = Counter()
    pairs: Counter = Counter()
    triples: Counter = Counter()
    count = 0
    for item in items:
        count += 1
        present = [(a, vals) for a, vals in item.values.items() if vals]
        for a, _ in present:
            schema.require(a)
        for n, xs in present:
            for x in xs:
                degrees[n, x] += 1
                for m, ls in present:
                    if m == n:
                        continue
                    pairs[n, x, m] += 1
                    for l in ls:
                        triples[n, x, m, l] += 1
    return KnowledgeGraph(schema, count, dict(degrees), dict(pairs), dict(triples))


def _graph_body(kg: KnowledgeGraph) -> bytes:
    lines = []
    for key in sorted(kg.degrees):
        lines.append(json.dumps(["d", *key, kg.degrees[key]], ensure_ascii=False))
    for key in sorted(kg.pair_counts):
        lines.append(json.dumps(["p", *key, kg.pair_counts[key]], ensure_ascii=False))
    for key in sorted(kg.triple_counts):
        lines.append(json.dumps(["t", *key, kg.triple_counts[key]], ensure_ascii=False))
    return ("".join(line + "\n" for line in lines)).encode("utf-8")


def save_graph(kg: KnowledgeGraph, path) -> None:
    """Write a versioned JSON-lines snapshot.

    The first line is a header carrying the format version, schema, record
    count and a SHA-256 of the body; output is byte-stable for equal graphs.
    """
    body = _graph_body(kg)
    header = {
        "format": GRAPH_FORMAT,
        "version": GRAPH_VERSION,
        "schema": list(kg.schema.attributes),
        "item_count": kg.item_count,
        "records": len(kg.degrees) + len(kg.pair_counts) + len(kg.triple_counts),
        "sha256": hashlib.sha256(body).hexdigest(),
    }
    with Path(path).open("wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        fh.write(body)


def load_graph(path) -> KnowledgeGraph:
    data = Path(path).read_bytes()
    head, sep, body = data.partition(b"\n")
    try:
        header = json.loads(head)
    except (json.JSONDecodeError, UnicodeDecodeError):
        raise SnapshotError(f"{path}: missing or corrupt header") from None
    if not isinstance(header, dict) or header.get("format") != GRAPH_FORMAT:
        raise SnapshotError(f"{path}: not a {GRAPH_FORMAT} file")
    if header.get("version") != GRAPH_VERSION:
        raise SnapshotError(
            f"{path}: unsupported snapshot version {header.get('version')!r} "
            f"(expected {GRAPH_VERSION})")
    if not sep or hashlib.sha256(body).hexdigest() != header.get("sha256"):
        raise SnapshotError(f"{path}: body checksum mismatch (truncated or corrupt)")
    degrees, pairs, triples = {}, {}, {}
    tables = {"d": (degrees, 2), "p": (pairs, 3), "t": (triples, 4)}
    lines = body.decode("utf-8").splitlines()
    if len(lines) != header.get("records"):
        raise SnapshotError(f"{path}: expected {header.get('records')} records, found {len(lines)}")
    for i, line in enumerate(lines, 2):
        try:
            kind, *rest = json.loads(line)
            table, width = tables[kind]
            if len(rest) != width + 1:
                raise ValueError
        except (ValueError, KeyError, TypeError):
            raise SnapshotError(f"{path}:{i}: corrupt record") from None
        table[tuple(rest[:-1])] = int(rest[-1])
    return KnowledgeGraph(AttributeSchema(tuple(header["schema"])), int(header["item_count"]),
                          degrees, pairs, triples)

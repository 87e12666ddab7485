import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from catalogkg import (AttributeSchema, InputFormatError, Item, SchemaError, SnapshotError,
                       build_graph, load_catalog, load_graph, save_graph)
from catalogkg.text import normalize_value, tokenize

from conftest import SCHEMA
from oracles import count_oracle


def test_normalize_value():
    assert normalize_value("  Maroon   5 ") == "maroon 5"
    assert normalize_value("\"Red!\"") == "red"
    assert normalize_value("t-shirt") == "t-shirt"
    assert normalize_value("...") == ""


def test_tokenize_offsets():
    raw = "Maroon 5, DVDs!"
    toks = tokenize(raw)
    assert [t.text for t in toks] == ["maroon", "5", "dvds"]
    assert [raw[t.start:t.end] for t in toks] == ["Maroon", "5", "DVDs"]


def test_schema_validation():
    with pytest.raises(ValueError):
        AttributeSchema(())
    with pytest.raises(ValueError):
        AttributeSchema(("color", "color"))
    with pytest.raises(ValueError):
        AttributeSchema(("color", ""))
    assert len(AttributeSchema.parse("product_type, brand,color")) == 3


def test_load_catalog_single_record(tmp_path, schema):
    p = tmp_path / "c.jsonl"
    p.write_text('{"item_id":"i1","attributes":{"color":["Maroon"]}}\n')
    items = list(load_catalog(p, schema))
    assert items == [Item("i1", {"color": frozenset({"maroon"})})]


def test_load_catalog_empty(tmp_path, schema):
    p = tmp_path / "c.jsonl"
    p.write_text("")
    assert list(load_catalog(p, schema)) == []


def test_load_catalog_unknown_attribute(tmp_path, schema):
    p = tmp_path / "c.jsonl"
    p.write_text('{"item_id":"i1","attributes":{"color":["red"]}}\n'
                 '{"item_id":"i2","attributes":{"sku_weight":["2kg"]}}\n')
    with pytest.raises(InputFormatError, match="sku_weight") as info:
        list(load_catalog(p, schema))
    assert info.value.lineno == 2


def test_load_catalog_malformed_line(tmp_path, schema):
    p = tmp_path / "c.jsonl"
    p.write_text('{"item_id":"i1","attributes":{}}\n\n{"item_id": oops}\n')
    with pytest.raises(InputFormatError) as info:
        list(load_catalog(p, schema))
    assert info.value.lineno == 3


def test_fixture_counts(fixture_kg):
    kg = fixture_kg
    assert kg.item_count == 15
    assert kg.degree("product_type", "dvd") == 10
    assert kg.pair_count("product_type", "dvd", "brand") == 8
    assert kg.triple_count("product_type", "dvd", "color", "maroon") == 1
    assert kg.degree("color", "chartreuse") == 0
    with pytest.raises(SchemaError):
        kg.degree("nonexistent_attr", "x")
    assert ("product_type", "dvd", "product_type") not in kg.pair_counts


def test_empty_graph(schema):
    kg = build_graph([], schema)
    assert kg.item_count == 0
    assert not kg.degrees and not kg.pair_counts and not kg.triple_counts


def test_single_item_graph(schema):
    item = Item.from_raw("x", {"brand": ["maroon 5"], "color": ["red"]}, schema)
    kg = build_graph([item], schema)
    assert kg.degree("brand", "maroon 5") == 1
    assert kg.triple_count("brand", "maroon 5", "color", "red") == 1


def test_graph_is_immutable(fixture_kg):
    with pytest.raises(TypeError):
        fixture_kg.degrees["product_type", "dvd"] = 3
    with pytest.raises(AttributeError):
        fixture_kg.item_count = 3


def test_snapshot_roundtrip(tmp_path, fixture_kg, schema):
    p = tmp_path / "g.kg"
    save_graph(fixture_kg, p)
    assert load_graph(p) == fixture_kg
    empty = build_graph([], schema)
    save_graph(empty, p)
    assert load_graph(p) == empty


def test_snapshot_truncated(tmp_path, fixture_kg):
    p = tmp_path / "g.kg"
    save_graph(fixture_kg, p)
    data = p.read_bytes()
    p.write_bytes(data[:len(data) - 20])
    with pytest.raises(SnapshotError, match="truncated"):
        load_graph(p)


def test_snapshot_unknown_version(tmp_path, fixture_kg):
    p = tmp_path / "g.kg"
    save_graph(fixture_kg, p)
    head, body = p.read_bytes().split(b"\n", 1)
    header = json.loads(head)
    header["version"] = 99
    p.write_bytes(json.dumps(header).encode() + b"\n" + body)
    with pytest.raises(SnapshotError, match="version"):
        load_graph(p)


values = st.sampled_from(["a", "b", "c", "d"])
raw_items = st.lists(
    st.dictionaries(st.sampled_from(["product_type", "brand", "color"]),
                    st.sets(values, min_size=0, max_size=3), max_size=3),
    max_size=30)


@settings(max_examples=60, deadline=None)
@given(raw=raw_items)
def test_build_matches_oracle_and_chain(raw):
    schema = SCHEMA
    items = [Item.from_raw(f"i{k}", {a: sorted(v) for a, v in d.items()}, schema)
             for k, d in enumerate(raw)]
    kg = build_graph(items, schema)
    n, deg, pairs, triples = count_oracle([(i.item_id, dict(i.values)) for i in items], schema)
    assert (kg.item_count, dict(kg.degrees), dict(kg.pair_counts), dict(kg.triple_counts)) == \
        (n, deg, pairs, triples)
    for (a, x, m, l), c in kg.triple_counts.items():
        assert 0 < c <= kg.pair_counts[a, x, m] <= kg.degrees[a, x] <= kg.item_count
    for (a, x, m), c in kg.pair_counts.items():
        assert sum(v for k, v in kg.triple_counts.items() if k[:3] == (a, x, m)) >= c
    shuffled = list(items)
    random.Random(0).shuffle(shuffled)
    assert build_graph(shuffled, schema) == kg

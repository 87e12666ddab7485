import numpy as np
import pytest

from catalogkg import (AttributeResolver, SynthConfig, build_graph, generate_catalog,
                       generate_labeled_queries)
from catalogkg.catalog import parse_item_line
from catalogkg.synth import ZipfSampler, generate_judgments, read_config
from catalogkg.text import phrase_tokens

SMALL = SynthConfig(item_count=2000, query_count=400)


@pytest.fixture(scope="module")
def small_corpus():
    catalog = generate_catalog(SMALL)
    return catalog, generate_labeled_queries(catalog, SMALL)


def test_catalog_deterministic(small_corpus):
    assert generate_catalog(SMALL) == small_corpus[0]
    assert generate_labeled_queries(small_corpus[0], SMALL) == small_corpus[1]


def test_no_conflicts_when_rate_zero():
    catalog = generate_catalog(SynthConfig(item_count=3000, conflict_rate=0.0))
    colors = {c for it in catalog for c in it.values.get("color", ())}
    brands = {b for it in catalog for b in it.values.get("brand", ())}
    assert brands
    for b in brands:
        assert not set(phrase_tokens(b)) & colors


def test_conflict_brands_are_color_prefixed(small_corpus):
    catalog, _ = small_corpus
    colors = {c for it in catalog for c in it.values.get("color", ())}
    brands = {b for it in catalog for b in it.values.get("brand", ())}
    assert any(phrase_tokens(b)[0] in colors and len(phrase_tokens(b)) == 2 for b in brands)


def test_zipf_sampler_skew():
    rng = np.random.default_rng(0)
    draws = ZipfSampler(100, 1.0).sample(rng, size=10_000)
    counts = np.bincount(draws, minlength=100)
    assert counts[0] > counts[49]


def test_generated_items_validate(small_corpus, schema):
    import json
    for it in small_corpus[0][:200]:
        assert parse_item_line(json.dumps(it.to_record()), schema) == it


def test_every_query_has_target_candidate(small_corpus):
    catalog, queries = small_corpus
    resolver = AttributeResolver(build_graph(catalog, SMALL.schema))
    for q in queries:
        spans = resolver.candidates(q.query)
        assert any(s.attribute == q.target and s.value == q.value for s in spans), q


def test_label_balance_band(small_corpus):
    _, queries = small_corpus
    absent = sum(not q.label for q in queries) / len(queries)
    assert 0.2 <= absent <= 0.8


def test_absent_queries_come_from_brands(small_corpus):
    _, queries = small_corpus
    for q in queries:
        if not q.label:
            brand = dict(q.intent)["brand"]
            assert q.value in phrase_tokens(brand) and q.query.startswith(brand)
        else:
            assert q.query.split()[0] == q.value == q.gold


def test_label_noise_flips_some():
    catalog = generate_catalog(SMALL)
    clean = generate_labeled_queries(catalog, SMALL)
    noisy = generate_labeled_queries(catalog, SynthConfig(item_count=2000, query_count=400,
                                                          label_noise=0.2))
    flips = sum(a.label != b.label for a, b in zip(clean, noisy))
    assert 0 < flips < len(clean)


def test_judgments_point_at_matching_items(small_corpus):
    catalog, queries = small_corpus
    by_id = {it.item_id: it for it in catalog}
    intents = {q.query: q.intent for q in queries}
    recs = generate_judgments(catalog, queries, SMALL)
    assert recs
    for query, iid, orders in recs:
        assert orders >= 1
        for attr, value in intents[query]:
            assert value in by_id[iid].values[attr]


def test_config_file(tmp_path):
    p = tmp_path / "synth.cfg"
    p.write_text("item_count = 50  # small\nconflict-rate = 0.25\n")
    cfg = SynthConfig.from_file(p)
    assert (cfg.item_count, cfg.conflict_rate) == (50, 0.25)
    assert read_config(p)["item_count"] == "50"
    p.write_text("bogus = 1\n")
    with pytest.raises(KeyError, match="bogus"):
        SynthConfig.from_file(p)
    with pytest.raises(ValueError):
        SynthConfig(conflict_rate=1.5)

import pytest
from hypothesis import given, settings, strategies as st

from catalogkg import Judgment, Ranker, extract_candidates, ndcg_at_k, prf1, rank_items
from catalogkg.evaluation import load_judgments, write_judgments
from catalogkg.pipeline import resolved_pairs

from oracles import best_permutation_ndcg


def test_prf1_perfect():
    r = prf1([True, False, True], [True, False, True])
    assert (r.precision, r.recall, r.f1) == (1.0, 1.0, 1.0)


def test_prf1_hand_example():
    preds = [True, True, True, False, False, False]
    labels = [True, True, False, True, True, True]
    r = prf1(preds, labels)
    assert (r.tp, r.fp, r.fn) == (2, 1, 3)
    assert r.precision == pytest.approx(2 / 3)
    assert r.recall == pytest.approx(0.4)
    assert r.f1 == pytest.approx(0.5)


def test_prf1_degenerate():
    r = prf1([False, False], [True, False])
    assert (r.precision, r.recall, r.f1) == (0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        prf1([True], [True, False])


@given(st.lists(st.tuples(st.booleans(), st.booleans()), min_size=1))
def test_prf1_counts_cover_all(pairs):
    r = prf1([p for p, _ in pairs], [y for _, y in pairs])
    assert r.tp + r.fp + r.tn + r.fn == len(pairs)


def test_ndcg_examples():
    js = [Judgment("q", "a", 1), Judgment("q", "b", 0)]
    assert ndcg_at_k(["a", "b"], js, 2) == 1.0
    assert ndcg_at_k(["b", "a"], js, 2) == pytest.approx(0.6309297535714575, abs=1e-6)
    assert ndcg_at_k(["a", "b"], {"a": 0, "b": 0}) == 0.0
    with pytest.raises(ValueError):
        ndcg_at_k(["a"], js, 0)


def test_gain_is_capped():
    assert Judgment.from_orders("q", "i", 17).gain == 4
    with pytest.raises(ValueError):
        Judgment("q", "i", -1)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=1, max_size=6), st.integers(1, 6))
def test_ndcg_permutation_oracle(gains, k):
    items = [f"i{n}" for n in range(len(gains))]
    g = dict(zip(items, gains))
    ideal = sorted(items, key=lambda i: -g[i])
    best = best_permutation_ndcg(items, g, k, ndcg_at_k)
    if any(gains):
        assert ndcg_at_k(ideal, g, k) == pytest.approx(1.0)
    assert best <= ndcg_at_k(ideal, g, k) + 1e-12


@given(st.lists(st.integers(0, 4), min_size=4, max_size=8), st.randoms())
def test_ndcg_ignores_order_below_k(gains, rnd):
    items = [f"i{n}" for n in range(len(gains))]
    g = dict(zip(items, gains))
    tail = items[3:]
    rnd.shuffle(tail)
    assert ndcg_at_k(items, g, 3) == ndcg_at_k(items[:3] + tail, g, 3)


def test_judgment_file_roundtrip(tmp_path):
    p = tmp_path / "j.jsonl"
    write_judgments([("red mug", "i1", 2), ("red mug", "i2", 9)], p)
    assert load_judgments(p) == {"red mug": {"i1": 2.0, "i2": 4.0}}


def test_ranker_prefers_band_over_color(fixture_kg, fixture_items, fixture_dict):
    spans = extract_candidates("maroon 5 dvds", fixture_dict)
    pairs = resolved_pairs(spans, "color", "maroon", present=False)
    assert pairs == [("brand", "maroon 5"), ("product_type", "dvd")]
    ranking = rank_items(fixture_kg, fixture_items, "maroon 5 dvds", pairs)
    band = {f"dvd{i}" for i in range(8)}
    assert set(ranking[:8]) == band
    assert ranking.index("dvd8") > max(ranking.index(i) for i in band)
    assert len(set(ranking)) == len(ranking) == len(fixture_items)


def test_ranker_demotes_conflicting_values(fixture_kg, fixture_items):
    ranking = rank_items(fixture_kg, fixture_items, "maroon shirt",
                         [("color", "maroon"), ("product_type", "shirt")])
    assert ranking[:3] == ["shirt0", "shirt1", "shirt2"]
    ranking = rank_items(fixture_kg, fixture_items, "maroon", [("color", "maroon")])
    # blue shirts carry a different color: below dvds without any color
    assert ranking.index("shirt3") > ranking.index("dvd0")
    assert ranking[-2:] == ["shirt3", "shirt4"]


def test_ranker_fallbacks(fixture_kg, fixture_items):
    r = Ranker(fixture_kg, fixture_items)
    pops = [r.popularity[i] for i in r.rank([])]
    assert pops == sorted(pops, reverse=True)
    single = Ranker(fixture_kg, fixture_items[:1])
    assert single.rank([("color", "maroon")]) == [fixture_items[0].item_id]


def test_ranker_limit_matches_full(fixture_kg, fixture_items):
    r = Ranker(fixture_kg, fixture_items)
    for pairs in ([("color", "maroon")], [("brand", "maroon 5"), ("color", "maroon")]):
        full = r.rank(pairs)
        for k in (1, 5, 12, 20):
            assert r.rank(pairs, limit=k) == full[:k]


def test_ranker_filter_mode(fixture_kg, fixture_items):
    r = Ranker(fixture_kg, fixture_items)
    got = r.rank([("color", "maroon"), ("product_type", "shirt")], mode="filter")
    assert got == ["shirt0", "shirt1", "shirt2"]

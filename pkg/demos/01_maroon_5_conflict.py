"""The "maroon 5 dvds" conflict, end to end on a fifteen-item catalog.

Run:  python demos/01_maroon_5_conflict.py
"""
from catalogkg import (AttributeSchema, Item, anchors, baseline_predict, build_dictionary,
                       build_graph, detect_conflicts, extract_candidates, featurize)

schema = AttributeSchema(("product_type", "brand", "color"))

# Ten dvds, eight of them by the band; five shirts, three of them maroon.
records = [(f"dvd{i}", {"product_type": ["dvd"], "brand": ["Maroon 5"]}) for i in range(8)]
records += [("dvd8", {"product_type": ["dvd"], "color": ["maroon"]}),
            ("dvd9", {"product_type": ["dvd"]})]
records += [(f"shirt{i}", {"product_type": ["shirt"], "color": ["maroon" if i < 3 else "blue"]})
            for i in range(5)]
items = [Item.from_raw(iid, vals, schema) for iid, vals in records]

kg = build_graph(items, schema)
print("degree(product_type=dvd)         =", kg.degree("product_type", "dvd"))
print("N(product_type=dvd, brand)       =", kg.pair_count("product_type", "dvd", "brand"))
print("N(product_type=dvd, color)       =", kg.pair_count("product_type", "dvd", "color"))

dictionary = build_dictionary(kg)

# %% Candidate spans: every reading is kept, including the overlapping ones.
for query in ["maroon 5 dvds", "maroon shirt"]:
    spans = extract_candidates(query, dictionary)
    print(f"\n{query!r}")
    for s in spans:
        print(f"  tokens {s.first}-{s.last}  {s.attribute:<12} {s.value}")
    for group in detect_conflicts(spans):
        print("  conflict:", " vs ".join(f"{s.attribute}={s.value}" for s in group))
    print("  anchors for color:", anchors(spans, "color"))

    # %% The two feature families for the color reading.
    fv = featurize(kg, spans, "color", "maroon")
    print("  presence features:", dict(fv.presence_features))
    print("  value features:   ", {k: round(v, 4) for k, v in fv.value_features.items()})
    print("  Dict Lookup says color present:", baseline_predict(spans, "color"))

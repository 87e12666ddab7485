"""Train the presence classifier on a synthetic catalog and compare it with
Dict Lookup on held-out queries, for both identification and ranking.

Run:  python demos/02_synthetic_evaluation.py
"""
import time

from catalogkg import (AttributeResolver, SynthConfig, TrainConfig, build_graph, evaluate,
                       generate_catalog, generate_judgments, generate_labeled_queries, train,
                       train_test_split)
from catalogkg.evaluation import Judgment, Ranker

t0 = time.perf_counter()
config = SynthConfig()  # 10k items, 2k queries, half the brands color-prefixed
catalog = generate_catalog(config)
queries = generate_labeled_queries(catalog, config)
print(f"{len(catalog)} items, {len(queries)} queries, "
      f"{sum(not q.label for q in queries)} of them without a real color")
print("a few queries:")
for q in queries[:6]:
    print(f"  {q.query!r:<32} candidate color={q.value!r:<10} "
          f"{'present' if q.label else 'absent'}")

judgments = {}
for text, iid, orders in generate_judgments(catalog, queries, config):
    judgments.setdefault(text, {})[iid] = Judgment.from_orders(text, iid, orders).gain

kg = build_graph(catalog, config.schema)
resolver = AttributeResolver(kg)

# %% Fit on 70% of the queries.
train_q, test_q = train_test_split(queries, 0.3, config.seed)
examples = [(resolver.features(q.query, q.target, q.value), q.label) for q in train_q]
model = train(examples, TrainConfig(), kg.schema)
print("\nweights (presence: product_type, brand | value: product_type, brand):")
print("  ", [round(w, 3) for w in model.weights], "bias", round(model.bias, 3))

# %% Score both systems on the remaining 30%, ranking with the same ranker.
resolver = AttributeResolver(kg, model, resolver.dictionary)
reports = evaluate(resolver, test_q, judgments, Ranker(kg, catalog))
print(f"\n{'system':<10} {'P':>7} {'R':>7} {'F1':>7} {'nDCG@20':>8} {'conflict':>9}")
for name, r in reports.items():
    m = r.prf1
    print(f"{name:<10} {m.precision:>7.4f} {m.recall:>7.4f} {m.f1:>7.4f} "
          f"{r.ndcg:>8.4f} {r.ndcg_conflict:>9.4f}")
print(f"\n({time.perf_counter() - t0:.1f}s)")

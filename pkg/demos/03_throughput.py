"""Queries per second for extract + featurize + predict against a 10k-item graph.

Run:  python demos/03_throughput.py [worker counts, default 1,2,4]
"""
import os
import sys

from catalogkg import (AttributeResolver, Model, SynthConfig, build_graph, generate_catalog,
                       generate_labeled_queries)
from catalogkg import bench

workers = [int(w) for w in (sys.argv[1] if len(sys.argv) > 1 else "1,2,4").split(",")]
config = SynthConfig()
catalog = generate_catalog(config)
texts = [q.query for q in generate_labeled_queries(catalog, config)] * 25
kg = build_graph(catalog, config.schema)
# Timing does not depend on the weights, so a zero model is enough here.
model = Model((0.0,) * 4, 0.0, 0.5, {"schema_fingerprint": kg.schema.fingerprint()})
resolver = AttributeResolver(kg, model)

print(f"{len(texts)} queries, {os.cpu_count()} cpu(s)")
for n in workers:
    r = bench.run(resolver, texts, n)
    print(f"workers={n}  {r.qps:>9.0f} q/s   p50 {r.p50_us:6.1f}us  p99 {r.p99_us:6.1f}us")

"""Throughput and latency harness for extract + featurize + predict.

Workers read one shared resolver. The process executor forks after the
resolver is set, so children inherit the graph without copying it; the
thread executor shares it directly but is serialized by the GIL on
standard CPython builds.
"""
from __future__ import annotations

import multiprocessing as mp
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .features import featurize
from .model import predict
from .pipeline import AttributeResolver

_RESOLVER: AttributeResolver | None = None
_TARGET = "color"


def _work(chunk: Sequence[str]) -> list[int]:
    resolver, target = _RESOLVER, _TARGET
    kg, model = resolver.kg, resolver.model
    lat = []
    clock = time.perf_counter_ns
    for text in chunk:
        t0 = clock()
        spans = resolver.candidates(text)
        for value in sorted({s.value for s in spans if s.attribute == target}):
            predict(model, featurize(kg, spans, target, value))
        lat.append(clock() - t0)
    return lat


@dataclass
class BenchResult:
    workers: int
    executor: str
    samples: int
    seconds: float
    qps: float
    p50_us: float
    p95_us: float
    p99_us: float

    def as_record(self) -> dict:
        return dict(self.__dict__)


def _chunks(items, n):
    size = max(1, -(-len(items) // n))
    return [items[i:i + size] for i in range(0, len(items), size)]


def run(resolver: AttributeResolver, queries: Sequence[str], workers: int = 1,
        executor: str = "process", target: str = "color") -> BenchResult | None:
    """Time one pass over ``queries`` with ``workers`` parallel workers.

    Returns ``None`` for an empty query list. Pool start-up happens before
    the clock starts.
    """
    global _RESOLVER, _TARGET
    if not queries:
        return None
    if resolver.model is None:
        raise ValueError("benchmark needs a model")
    _RESOLVER, _TARGET = resolver, target
    chunks = _chunks(list(queries), workers * 8)
    if workers == 1:
        t0 = time.perf_counter()
        lat = [x for c in chunks for x in _work(c)]
        elapsed = time.perf_counter() - t0
    elif executor == "thread":
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(_work, [[]] * workers))
            t0 = time.perf_counter()
            parts = list(pool.map(_work, chunks))
            elapsed = time.perf_counter() - t0
        lat = [x for p in parts for x in p]
    elif executor == "process":
        with mp.get_context("fork").Pool(workers) as pool:
            pool.map(_work, [[]] * workers)
            t0 = time.perf_counter()
            parts = pool.map(_work, chunks, chunksize=1)
            elapsed = time.perf_counter() - t0
        lat = [x for p in parts for x in p]
    else:
        raise ValueError(f"unknown executor {executor!r}")
    us = np.asarray(lat, dtype=float) / 1000.0
    p50, p95, p99 = (float(v) for v in np.percentile(us, [50, 95, 99]))
    return BenchResult(workers, executor if workers > 1 else "inline", len(lat), elapsed,
                       len(lat) / elapsed if elapsed > 0 else float("inf"), p50, p95, p99)

"""Catalog-derived features for a (query, target attribute, candidate value).

For a target attribute ``m`` and every other schema attribute ``n`` the
query supplies anchor values ``n = x`` (with confidences). Two scores are
read off the graph per anchor attribute:

presence
    ``N(n=x, m) / degree(n=x)``: how often items carrying the anchor value
    carry any value for ``m`` at all.
value
    ``log N(n=x, m=l) / log degree(n=x)``: log-smoothed rate at which those
    items carry the specific candidate value ``l``.

Multiple anchor values of one attribute are summed, weighted by confidence.
A missing anchor attribute contributes 0, so the dense vector always has
``2 * (N_a - 1)`` entries: presence scores in schema order, then value
scores in schema order.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

from .catalog import KnowledgeGraph
from .errors import SchemaError
from .lexicon import AnchorAssignment, CandidateSpan, anchors


@dataclass(frozen=True)
class FeatureVector:
    target: str
    candidate_value: str
    presence_features: Mapping[str, float]
    value_features: Mapping[str, float]
    dense: tuple[float, ...]

    def __len__(self):
        return len(self.dense)


def _check_anchor(assignments: Iterable[AnchorAssignment], m: str):
    assignments = list(assignments)
    for a in assignments:
        if a.attribute == m:
            raise SchemaError(f"attribute {m!r} cannot anchor itself")
    return assignments


def log_ratio(count: int, degree: int, log: Callable[[float], float] = math.log) -> float:
    """Guarded ``log(count) / log(degree)``, clipped to [0, 1].

    0 when ``count`` is 0 or ``degree <= 1``; 1 when ``count == degree``.
    """
    if count <= 0:
        return 0.0
    if count >= degree:
        return 1.0
    if degree <= 1:
        return 0.0
    return min(1.0, log(count) / log(degree))


def presence_score(kg: KnowledgeGraph, assignments: Iterable[AnchorAssignment], m: str) -> float:
    kg.schema.require(m)
    total = 0.0
    for n, x, conf in _check_anchor(assignments, m):
        deg = kg.degrees.get((n, x), 0)
        if deg:
            total += kg.pair_counts.get((n, x, m), 0) / deg * conf
    return total


def value_score(kg: KnowledgeGraph, assignments: Iterable[AnchorAssignment], m: str, l: str,
                log: Callable[[float], float] = math.log) -> float:
    kg.schema.require(m)
    total = 0.0
    for n, x, conf in _check_anchor(assignments, m):
        deg = kg.degrees.get((n, x), 0)
        total += log_ratio(kg.triple_counts.get((n, x, m, l), 0), deg, log) * conf
    return total


def featurize(kg: KnowledgeGraph, spans: list[CandidateSpan], m: str, l: str) -> FeatureVector:
    schema = kg.schema
    schema.require(m)
    if len(schema) < 2:
        raise ValueError("featurize needs a schema with at least two attributes")
    if not any(s.attribute == m and s.value == l for s in spans):
        raise ValueError(f"({m!r}, {l!r}) is not a candidate span of the query")
    grouped = defaultdict(list)
    for a in anchors(spans, m):
        grouped[a.attribute].append(a)
    presence, value = {}, {}
    for n in schema:
        if n == m:
            continue
        group = grouped.get(n, ())
        presence[n] = presence_score(kg, group, m)
        value[n] = value_score(kg, group, m, l)
    dense = tuple(presence.values()) + tuple(value.values())
    return FeatureVector(m, l, presence, value, dense)

"""End-to-end resolution: extract, featurize, classify, rank, score."""
from __future__ import annotations

from dataclasses import dataclass
from statistics import fmean
from typing import Sequence

from .catalog import KnowledgeGraph
from .evaluation import PRF1Report, Ranker, ndcg_at_k, prf1
from .features import FeatureVector, featurize
from .lexicon import CandidateSpan, Dictionary, Query, build_dictionary, detect_conflicts, \
    extract_candidates
from .model import Model, baseline_predict, predict
from .synth import LabeledQuery

SYSTEMS = ("framework", "baseline")


class AttributeResolver:
    """Bundle of graph, dictionary and (optionally) model.

    The model's schema fingerprint is checked against the graph on
    construction. Instances are read-only and may be shared between threads.
    """

    def __init__(self, kg: KnowledgeGraph, model: Model | None = None,
                 dictionary: Dictionary | None = None, min_support: int = 1):
        if model is not None:
            model.check_schema(kg.schema)
        self.kg = kg
        self.model = model
        self.dictionary = dictionary if dictionary is not None else build_dictionary(kg, min_support)

    def candidates(self, query) -> list[CandidateSpan]:
        return extract_candidates(query, self.dictionary)

    def features(self, query, target: str, value: str) -> FeatureVector:
        return featurize(self.kg, self.candidates(query), target, value)

    def predict(self, query, target: str, value: str) -> tuple[float, bool]:
        if self.model is None:
            raise ValueError("no model loaded")
        return predict(self.model, self.features(query, target, value))

    def baseline(self, query, target: str) -> bool:
        return baseline_predict(self.candidates(query), target)


def resolved_pairs(spans: Sequence[CandidateSpan], target: str, value: str,
                   present: bool) -> list[tuple[str, str]]:
    """Attribute assertions handed to the ranker after a decision on ``(target, value)``.

    Accepting the target drops every other-attribute span that overlaps it;
    rejecting it drops the target span and keeps its rivals.
    """
    tspans = [s for s in spans if s.attribute == target and s.value == value]
    keep = []
    for s in spans:
        if s.attribute == target and s.value == value:
            if present:
                keep.append(s)
        elif present and s.attribute != target and any(s.overlaps(t) for t in tspans):
            continue
        else:
            keep.append(s)
    return sorted({s.pair for s in keep})


def is_conflicted(spans: Sequence[CandidateSpan], target: str, value: str) -> bool:
    return any(any(s.attribute == target and s.value == value for s in g)
               for g in detect_conflicts(spans))


@dataclass
class SystemReport:
    system: str
    prf1: PRF1Report
    ndcg: float
    ndcg_conflict: float
    n_conflict: int


@dataclass
class QueryOutcome:
    query: LabeledQuery
    spans: list
    conflicted: bool
    decisions: dict  # system -> bool
    probability: float | None = None


def decide(resolver: AttributeResolver, queries: Sequence[LabeledQuery],
           systems: Sequence[str] = SYSTEMS) -> list[QueryOutcome]:
    out = []
    for q in queries:
        spans = resolver.candidates(Query.parse(q.query))
        decisions, prob = {}, None
        if "baseline" in systems:
            decisions["baseline"] = baseline_predict(spans, q.target)
        if "framework" in systems:
            prob, decisions["framework"] = predict(
                resolver.model, featurize(resolver.kg, spans, q.target, q.value))
        out.append(QueryOutcome(q, spans, is_conflicted(spans, q.target, q.value), decisions, prob))
    return out


def evaluate(resolver: AttributeResolver, queries: Sequence[LabeledQuery],
             judgments: dict | None = None, ranker: Ranker | None = None,
             systems: Sequence[str] = SYSTEMS, k: int = 20, rank_mode: str = "boost",
             external: Sequence[bool] | None = None) -> dict[str, SystemReport]:
    """PRF1 for each system, plus mean nDCG@k when judgments and a ranker are given.

    ``external`` supplies precomputed decisions, reported as system ``external``.
    """
    outcomes = decide(resolver, queries, [s for s in systems if s != "external"])
    if external is not None:
        if len(external) != len(queries):
            raise ValueError(f"{len(external)} external decisions for {len(queries)} queries")
        for o, d in zip(outcomes, external):
            o.decisions["external"] = bool(d)
        systems = list(systems) + (["external"] if "external" not in systems else [])
    labels = [q.label for q in queries]
    reports = {}
    for system in systems:
        preds = [o.decisions[system] for o in outcomes]
        scores, conflict_scores = [], []
        if judgments is not None and ranker is not None:
            for o in outcomes:
                gains = judgments.get(o.query.query, {})
                pairs = resolved_pairs(o.spans, o.query.target, o.query.value,
                                       o.decisions[system])
                score = ndcg_at_k(ranker.rank(pairs, rank_mode, limit=k), gains, k)
                scores.append(score)
                if o.conflicted:
                    conflict_scores.append(score)
        reports[system] = SystemReport(
            system, prf1(preds, labels),
            fmean(scores) if scores else float("nan"),
            fmean(conflict_scores) if conflict_scores else float("nan"),
            sum(o.conflicted for o in outcomes))
    return reports

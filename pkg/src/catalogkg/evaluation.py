"""Identification metrics, nDCG, and a minimal attribute-driven ranker."""
from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .catalog import Item, KnowledgeGraph
from .errors import InputFormatError

MAX_GAIN = 4


@dataclass(frozen=True)
class PRF1Report:
    tp: int
    fp: int
    tn: int
    fn: int
    precision: float
    recall: float
    f1: float

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def prf1(predictions: Sequence[bool], labels: Sequence[bool]) -> PRF1Report:
    if len(predictions) != len(labels):
        raise ValueError(f"{len(predictions)} predictions for {len(labels)} labels")
    if not labels:
        raise ValueError("prf1 needs at least one example")
    tp = fp = tn = fn = 0
    for p, y in zip(predictions, labels):
        if p and y:
            tp += 1
        elif p:
            fp += 1
        elif y:
            fn += 1
        else:
            tn += 1
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return PRF1Report(tp, fp, tn, fn, precision, recall, f1)


@dataclass(frozen=True)
class Judgment:
    query: str
    item_id: str
    gain: float

    def __post_init__(self):
        if self.gain < 0:
            raise ValueError(f"gain must be non-negative, got {self.gain}")

    @classmethod
    def from_orders(cls, query: str, item_id: str, orders: float) -> "Judgment":
        return cls(query, item_id, min(float(orders), MAX_GAIN))


def _gains(judgments) -> dict[str, float]:
    if isinstance(judgments, Mapping):
        return dict(judgments)
    return {j.item_id: j.gain for j in judgments}


def dcg(gains: Iterable[float]) -> float:
    return sum((2.0 ** g - 1.0) / math.log2(i + 2) for i, g in enumerate(gains))


def ndcg_at_k(ranking: Sequence[str], judgments, k: int = 20) -> float:
    """nDCG@k with exponential gain ``2^g - 1`` and ``log2(rank + 1)`` discount.

    ``judgments`` is a collection of :class:`Judgment` or an
    ``item_id -> gain`` mapping; unjudged items have gain 0. Returns 0 when
    no judged item has positive gain.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    gains = _gains(judgments)
    ideal = dcg(sorted(gains.values(), reverse=True)[:k])
    if ideal == 0:
        return 0.0
    return dcg(gains.get(i, 0.0) for i in ranking[:k]) / ideal


def load_judgments(path) -> dict[str, dict[str, float]]:
    """Read ``{"query", "item_id", "orders"}`` records into ``query -> item -> gain``."""
    out: dict = defaultdict(dict)
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                j = Judgment.from_orders(rec["query"], str(rec["item_id"]), rec["orders"])
            except (ValueError, KeyError, TypeError) as exc:
                raise InputFormatError(f"bad judgment record ({exc})", path, lineno) from None
            out[j.query][j.item_id] = j.gain
    return dict(out)


def write_judgments(records: Iterable[tuple[str, str, int]], path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for query, item_id, orders in records:
            fh.write(json.dumps({"query": query, "item_id": item_id, "orders": orders},
                                ensure_ascii=False, sort_keys=True) + "\n")


class Ranker:
    """Score catalog items against resolved (attribute, value) pairs.

    In ``boost`` mode items are ordered by the number of matched pairs;
    items whose value for a resolved attribute differs from the resolved
    value sink below all non-matching items. ``filter`` mode keeps only
    items matching every pair. Remaining ties fall back to popularity (sum
    of the item's value degrees) and then ``item_id``.
    """

    def __init__(self, kg: KnowledgeGraph, items: Iterable[Item]):
        self.items = {it.item_id: it for it in items}
        self.popularity = {
            iid: sum(kg.degrees.get((a, x), 0) for a, xs in it.values.items() for x in xs)
            for iid, it in self.items.items()
        }
        self.by_pair = defaultdict(list)
        for iid, it in self.items.items():
            for a, xs in it.values.items():
                for x in xs:
                    self.by_pair[a, x].append(iid)
        self.order = sorted(self.items, key=self._tiebreak)

    def _tiebreak(self, iid):
        return -self.popularity[iid], iid

    def _assess(self, iid, resolved):
        vals = self.items[iid].values
        matched = 0
        conflict = False
        for a, x in resolved:
            have = vals.get(a)
            if have:
                if x in have:
                    matched += 1
                else:
                    conflict = True
        return matched, conflict

    def rank(self, resolved: Iterable[tuple[str, str]], mode: str = "boost",
             limit: int | None = None) -> list[str]:
        resolved = sorted(set(resolved))
        if mode not in ("boost", "filter"):
            raise ValueError(f"unknown rank mode {mode!r}")
        if not resolved:
            return self.order[:limit] if limit is not None else list(self.order)
        touched = {iid for pair in resolved for iid in self.by_pair.get(pair, ())}
        scored = {iid: self._assess(iid, resolved) for iid in touched}
        if mode == "filter":
            keep = [i for i, (m, _) in scored.items() if m == len(resolved)]
            keep.sort(key=self._tiebreak)
            return keep[:limit] if limit is not None else keep
        head = [i for i, (m, c) in scored.items() if not c]
        head.sort(key=lambda i: (-scored[i][0],) + self._tiebreak(i))
        out = head
        resolved_attrs = {a for a, _ in resolved}
        tail = [i for i, (_, c) in scored.items() if c]
        for iid in self.order:
            if limit is not None and len(out) >= limit:
                return out[:limit]
            if iid in scored:
                continue
            if resolved_attrs.intersection(self.items[iid].values):
                tail.append(iid)  # has a resolved attribute, but a different value
                continue
            out.append(iid)
        tail.sort(key=lambda i: (-scored.get(i, (0,))[0],) + self._tiebreak(i))
        out.extend(tail)
        return out[:limit] if limit is not None else out


def rank_items(kg: KnowledgeGraph, items: Iterable[Item], query: str,
               resolved: Iterable[tuple[str, str]], mode: str = "boost",
               limit: int | None = None) -> list[str]:
    """One-shot ranking; build a :class:`Ranker` once when ranking many queries.

    ``query`` is accepted for symmetry with the judgment records; ranking
    depends only on ``resolved``.
    """
    return Ranker(kg, items).rank(resolved, mode, limit)

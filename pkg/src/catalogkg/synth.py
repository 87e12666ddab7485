"""Seeded synthetic catalogs, labeled queries and relevance judgments.

The generator reproduces the situation the classifier is meant to fix:
some brand names start with a color word ("maroon 5"), so a dictionary
lookup sees a color in queries that never asked for one. Product types
come in two kinds, ones whose items usually carry a color (shirts) and
ones whose items rarely do (dvds), which is the catalog signal the
features pick up.

All value popularities are Zipf-distributed. Every random draw comes from
one ``numpy.random.Generator`` seeded by ``SynthConfig.seed``.
"""
from __future__ import annotations

import configparser
import json
from collections import defaultdict
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .catalog import AttributeSchema, Item
from .errors import InputFormatError
from .lexicon import surface_forms
from .text import phrase_tokens

COLOR_WORDS = (
    "black", "white", "red", "blue", "navy", "gray", "green", "pink", "brown", "beige",
    "maroon", "purple", "yellow", "orange", "silver", "gold", "teal", "ivory", "olive",
    "coral", "tan", "khaki", "lavender", "magenta", "cyan", "turquoise", "burgundy",
    "charcoal", "crimson", "indigo", "mint", "peach", "plum", "rust", "salmon", "scarlet",
    "amber", "aqua", "lime", "mauve",
)

PRODUCT_WORDS = (
    "shirt", "dvd", "lamp", "mug", "sofa", "jacket", "cd", "book", "blender", "backpack",
    "sneaker", "dress", "towel", "pillow", "blanket", "vinyl", "poster", "notebook",
    "umbrella", "wallet", "helmet", "kettle", "toaster", "monitor", "keyboard", "mouse",
    "headphone", "speaker", "printer", "guitar", "drum", "vase", "candle", "rug", "curtain",
    "hoodie", "sweater", "scarf", "hat", "sandal",
)

_ONSETS = "bdfgklmnprstvz"
_VOWELS = "aeiou"


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 42
    item_count: int = 10_000
    attributes: tuple[str, ...] = ("product_type", "brand", "color")
    product_vocab: int = 40
    brand_vocab: int = 400
    color_vocab: int = 30
    exponent: float = 1.0
    conflict_rate: float = 0.5
    query_count: int = 2_000
    label_noise: float = 0.0
    target: str = "color"
    # catalog shape
    brand_rate: float = 0.85
    colorful_fraction: float = 0.5
    colorful_rate: float = 0.9
    plain_rate: float = 0.05
    multi_color_rate: float = 0.1
    # query shape
    traffic_exponent: float = 0.5
    brand_in_query_rate: float = 0.5
    type_in_query_rate: float = 0.85
    plural_rate: float = 0.3
    judged_per_query: int = 30

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))
        if not 0.0 <= self.conflict_rate <= 1.0:
            raise ValueError("conflict_rate must lie in [0, 1]")
        if not 0.0 <= self.label_noise <= 1.0:
            raise ValueError("label_noise must lie in [0, 1]")
        if self.exponent <= 0 or self.traffic_exponent < 0:
            raise ValueError("exponent must be > 0")
        for name in ("item_count", "product_vocab", "brand_vocab", "color_vocab", "query_count"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if set(self.attributes) != {"product_type", "brand", "color"} or self.target != "color":
            raise ValueError("the generator models the product_type/brand/color schema "
                             "with color as target")

    @property
    def schema(self) -> AttributeSchema:
        return AttributeSchema(self.attributes)

    @classmethod
    def from_mapping(cls, values: dict) -> "SynthConfig":
        """Build from string or typed values; unknown keys raise ``KeyError`` naming the key."""
        types = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            key = key.strip().replace("-", "_")
            if key not in types:
                raise KeyError(key)
            kwargs[key] = _coerce(types[key], raw)
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "SynthConfig":
        return cls.from_mapping(read_config(path))

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["attributes"] = list(self.attributes)
        return d


def read_config(path) -> dict[str, str]:
    """Raw ``key = value`` pairs from a config file (``#`` comments allowed)."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.optionxform = str
    text = Path(path).read_text(encoding="utf-8")
    try:
        parser.read_string("[synth]\n" + text)
    except configparser.Error as exc:
        raise InputFormatError(f"bad config file ({exc})", path) from None
    return dict(parser["synth"])


def _coerce(type_name, raw):
    if not isinstance(raw, str):
        return tuple(raw) if isinstance(raw, list) else raw
    t = str(type_name)
    if t == "int":
        return int(raw)
    if t == "float":
        return float(raw)
    if "tuple" in t:
        return tuple(a.strip() for a in raw.split(",") if a.strip())
    return raw


class ZipfSampler:
    """Finite Zipf law over ranks ``1..n`` with weight ``rank ** -exponent``."""

    def __init__(self, n: int, exponent: float):
        if n < 1:
            raise ValueError("n must be >= 1")
        w = np.arange(1, n + 1, dtype=float) ** -float(exponent)
        self.probabilities = w / w.sum()

    def __len__(self):
        return len(self.probabilities)

    def sample(self, rng: np.random.Generator, size=None):
        return rng.choice(len(self.probabilities), size=size, p=self.probabilities)


@dataclass(frozen=True)
class LabeledQuery:
    query: str
    target: str
    value: str
    label: bool
    gold: str | None = None
    intent: tuple = field(default=(), compare=True)

    def to_record(self) -> dict:
        return {"query": self.query, "target": self.target, "value": self.value,
                "label": "present" if self.label else "absent", "gold": self.gold,
                "intent": [list(p) for p in self.intent]}

    @classmethod
    def from_record(cls, rec: dict) -> "LabeledQuery":
        label = rec["label"]
        if label not in ("present", "absent", True, False):
            raise ValueError(f"label must be 'present' or 'absent', got {label!r}")
        return cls(rec["query"], rec["target"], rec["value"], label in ("present", True),
                   rec.get("gold"), tuple(tuple(p) for p in rec.get("intent") or ()))


def write_queries(queries: Sequence[LabeledQuery], path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for q in queries:
            fh.write(json.dumps(q.to_record(), ensure_ascii=False, sort_keys=True) + "\n")


def load_queries(path) -> list[LabeledQuery]:
    out = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(LabeledQuery.from_record(json.loads(line)))
            except (ValueError, KeyError, TypeError) as exc:
                raise InputFormatError(f"bad query record ({exc})", path, lineno) from None
    return out


def _pseudo_words(rng, n, banned):
    words, seen = [], set(banned)
    while len(words) < n:
        k = int(rng.integers(2, 4))
        w = "".join(_ONSETS[rng.integers(len(_ONSETS))] + _VOWELS[rng.integers(len(_VOWELS))]
                    for _ in range(k))
        if rng.random() < 0.5:
            w += _ONSETS[rng.integers(len(_ONSETS))]
        forms = {f[0] for f in surface_forms((w,))}
        if forms & seen:
            continue
        seen |= forms
        words.append(w)
    return words


def _vocab(rng, base, n, banned):
    if n <= len(base):
        return list(base[:n])
    return list(base) + _pseudo_words(rng, n - len(base), banned | set(base))


def _banned(words):
    return {f[0] for w in words for f in surface_forms((w,))}


def generate_catalog(config: SynthConfig = SynthConfig()) -> list[Item]:
    """Items with Zipf-popular values and ``conflict_rate`` color-prefixed brands.

    Item order is the popularity order used for query sampling: the item at
    position ``i`` has traffic weight ``(i + 1) ** -traffic_exponent``.
    """
    rng = np.random.default_rng(config.seed)
    colors = _vocab(rng, COLOR_WORDS, config.color_vocab, _banned(PRODUCT_WORDS))
    products = _vocab(rng, PRODUCT_WORDS, config.product_vocab, _banned(COLOR_WORDS + PRODUCT_WORDS))
    banned = _banned(colors) | _banned(products)

    color_law = ZipfSampler(len(colors), config.exponent)
    product_law = ZipfSampler(len(products), config.exponent)
    colorful = rng.random(len(products)) < config.colorful_fraction
    color_rate = np.where(colorful, config.colorful_rate, config.plain_rate)

    n_conflict = int(round(config.brand_vocab * config.conflict_rate))
    plain_names = _pseudo_words(rng, config.brand_vocab, banned)
    brands = []
    for i in range(config.brand_vocab):
        if i < n_conflict:
            prefix = colors[color_law.sample(rng)]
            suffix = (str(int(rng.integers(1, 100))) if rng.random() < 0.5
                      else plain_names[i])
            name = f"{prefix} {suffix}"
        else:
            name = plain_names[i]
        brands.append(name)
    brands = list(dict.fromkeys(brands))  # prefix+number may repeat
    order = rng.permutation(len(brands))  # popularity rank independent of conflict status
    brands = [brands[i] for i in order]
    home = product_law.sample(rng, size=len(brands))
    brands_of = defaultdict(list)
    for b, p in zip(brands, home):
        brands_of[int(p)].append(b)
    brand_law = {p: ZipfSampler(len(bs), config.exponent) for p, bs in brands_of.items()}

    items = []
    for idx in range(config.item_count):
        p = int(product_law.sample(rng))
        values = {"product_type": [products[p]]}
        if p in brands_of and rng.random() < config.brand_rate:
            values["brand"] = [brands_of[p][brand_law[p].sample(rng)]]
        if rng.random() < color_rate[p]:
            cs = {colors[color_law.sample(rng)]}
            if rng.random() < config.multi_color_rate:
                cs.add(colors[color_law.sample(rng)])
            values["color"] = sorted(cs)
        items.append(Item.from_raw(f"i{idx:06d}", values, config.schema))
    return items


def _pluralize(word):
    return word + "s" if not word.endswith("s") else word


def generate_labeled_queries(catalog: Sequence[Item],
                             config: SynthConfig = SynthConfig()) -> list[LabeledQuery]:
    """Sample queries from items, weighted by catalog position (traffic).

    A query either asks for one of the item's colors (label present) or
    names a color-prefixed brand without asking for a color (label absent,
    the candidate value being the color word inside the brand).
    """
    if not catalog:
        raise ValueError("catalog is empty")
    rng = np.random.default_rng([config.seed, 1])
    colors = {c for it in catalog for c in it.values.get("color", ())}
    traffic = ZipfSampler(len(catalog), config.traffic_exponent) if config.traffic_exponent \
        else None

    def conflict_word(brand):
        for tok in phrase_tokens(brand):
            if tok in colors:
                return tok
        return None

    out = []
    attempts = 0
    while len(out) < config.query_count:
        attempts += 1
        if attempts > 100 * config.query_count + 1000:
            raise ValueError("catalog yields no color candidates; cannot build queries")
        i = int(traffic.sample(rng)) if traffic else int(rng.integers(len(catalog)))
        item = catalog[i]
        item_colors = sorted(item.values.get("color", ()))
        brand = sorted(item.values.get("brand", ()))
        brand = brand[0] if brand else None
        cw = conflict_word(brand) if brand else None
        kinds = (["present"] if item_colors else []) + (["absent"] if cw else [])
        if not kinds:
            continue
        kind = kinds[int(rng.integers(len(kinds)))]
        ptype = sorted(item.values["product_type"])[0]
        with_type = rng.random() < config.type_in_query_rate
        type_word = _pluralize(ptype) if rng.random() < config.plural_rate else ptype
        if kind == "present":
            color = item_colors[int(rng.integers(len(item_colors)))]
            with_brand = brand is not None and rng.random() < config.brand_in_query_rate
            words = [color] + ([brand] if with_brand else []) + ([type_word] if with_type else [])
            intent = [("color", color)] + ([("brand", brand)] if with_brand else [])
            value, label, gold = color, True, color
        else:
            words = [brand] + ([type_word] if with_type else [])
            intent = [("brand", brand)]
            value, label, gold = cw, False, None
        if with_type:
            intent.append(("product_type", ptype))
        if config.label_noise and rng.random() < config.label_noise:
            label = not label
        out.append(LabeledQuery(" ".join(words), "color", value, label, gold,
                                tuple(sorted(intent))))
    return out


def generate_judgments(catalog: Sequence[Item], queries: Sequence[LabeledQuery],
                       config: SynthConfig = SynthConfig()) -> list[tuple[str, str, int]]:
    """Synthetic order counts for items satisfying each query's intent.

    Returns ``(query, item_id, orders)`` records; the first occurrence of a
    query text defines its judgments. More popular (earlier) items get more
    orders.
    """
    rng = np.random.default_rng([config.seed, 2])
    by_pair = defaultdict(set)
    for pos, it in enumerate(catalog):
        for a, xs in it.values.items():
            for x in xs:
                by_pair[a, x].add(pos)
    records, seen = [], set()
    for q in queries:
        if q.query in seen or not q.intent:
            continue
        seen.add(q.query)
        pools = [by_pair.get(tuple(p), set()) for p in q.intent]
        hits = sorted(set.intersection(*pools))[:config.judged_per_query]
        for rank, pos in enumerate(hits):
            orders = 1 + int(rng.poisson(3.0 / (1.0 + 0.25 * rank)))
            records.append((q.query, catalog[pos].item_id, orders))
    return records

"""Attribute-presence classifier and the dictionary-lookup baseline.

The classifier is L2-regularized logistic regression fit by full-batch
gradient descent from a zero start, so a given config always produces
the same weights. Examples are weighted by inverse class frequency by
default.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .catalog import AttributeSchema
from .errors import FingerprintMismatch, SnapshotError
from .lexicon import CandidateSpan

MODEL_FORMAT = "catalogkg-model"
MODEL_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    l2: float = 1e-4
    epochs: int = 2000
    seed: int = 42
    balance: bool = True
    threshold: float = 0.5


@dataclass(frozen=True)
class Model:
    weights: tuple[float, ...]
    bias: float
    threshold: float = 0.5
    training_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if not 0.0 < self.threshold < 1.0:
            raise ValueError(f"threshold must lie in (0, 1), got {self.threshold}")

    @property
    def width(self) -> int:
        return len(self.weights)

    @property
    def fingerprint(self):
        return self.training_meta.get("schema_fingerprint")

    def with_threshold(self, threshold: float) -> "Model":
        return Model(self.weights, self.bias, threshold, dict(self.training_meta))

    def check_schema(self, schema: AttributeSchema) -> None:
        expected = schema.fingerprint()
        if self.fingerprint != expected:
            raise FingerprintMismatch(
                f"model schema fingerprint {self.fingerprint!r} does not match "
                f"graph schema {list(schema)} ({expected!r})")
        if self.width != 2 * (len(schema) - 1):
            raise FingerprintMismatch(
                f"model has {self.width} weights, schema needs {2 * (len(schema) - 1)}")


def sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def _log_sigmoid(z):
    # log(sigmoid(z)) without overflow
    return -np.logaddexp(0.0, -z)


def class_weights(y: np.ndarray, balance: bool = True) -> np.ndarray:
    """Per-example weights; inverse class frequency when ``balance``."""
    y = np.asarray(y, dtype=float)
    if not balance:
        return np.ones_like(y)
    n_pos = y.sum()
    n_neg = len(y) - n_pos
    return np.where(y > 0.5, len(y) / (2.0 * n_pos), len(y) / (2.0 * n_neg))


def loss_and_grad(params: np.ndarray, X: np.ndarray, y: np.ndarray,
                  sample_weight: np.ndarray, l2: float):
    """Weighted mean log-loss plus ``l2/2 * |w|^2``; ``params[-1]`` is the bias.

    The bias is not regularized. Returns ``(loss, gradient)``.
    """
    w, b = params[:-1], params[-1]
    z = X @ w + b
    sw = sample_weight / sample_weight.sum()
    loss = -np.sum(sw * (y * _log_sigmoid(z) + (1 - y) * _log_sigmoid(-z)))
    loss += 0.5 * l2 * float(w @ w)
    p = np.exp(_log_sigmoid(z))
    r = sw * (p - y)
    grad = np.empty_like(params)
    grad[:-1] = X.T @ r + l2 * w
    grad[-1] = r.sum()
    return float(loss), grad


def fit_logistic(X, y, config: TrainConfig = TrainConfig()):
    """Gradient descent on :func:`loss_and_grad`.

    Returns ``(weights, bias, loss_history)`` where ``loss_history[e]`` is
    the loss before epoch ``e`` plus a final entry after the last step.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be 2-D with one row per label")
    classes = set(np.unique(y).tolist())
    if classes != {0.0, 1.0}:
        raise ValueError(f"training needs both classes present, got labels {sorted(classes)}")
    sw = class_weights(y, config.balance)
    params = np.zeros(X.shape[1] + 1)
    history = []
    for _ in range(config.epochs):
        loss, grad = loss_and_grad(params, X, y, sw, config.l2)
        history.append(loss)
        params = params - config.learning_rate * grad
    history.append(loss_and_grad(params, X, y, sw, config.l2)[0])
    return params[:-1].copy(), float(params[-1]), history


def train(examples: Sequence, config: TrainConfig = TrainConfig(),
          schema: AttributeSchema | None = None) -> Model:
    """Fit a model on ``(FeatureVector or sequence, label)`` pairs.

    Labels are booleans or 0/1. All feature vectors must share one width.
    """
    if not examples:
        raise ValueError("no training examples")
    rows = [_dense(fv) for fv, _ in examples]
    width = len(rows[0])
    for r in rows:
        if len(r) != width:
            raise ValueError(f"feature width mismatch: {len(r)} != {width}")
    if schema is not None and width != 2 * (len(schema) - 1):
        raise ValueError(f"feature width {width} does not fit schema {list(schema)}")
    y = [1.0 if label else 0.0 for _, label in examples]
    w, b, history = fit_logistic(rows, y, config)
    meta = asdict(config)
    meta.pop("threshold")
    meta["schema_fingerprint"] = schema.fingerprint() if schema is not None else None
    meta["final_loss"] = history[-1]
    return Model(tuple(w.tolist()), b, config.threshold, meta)


def _dense(fv) -> tuple:
    return tuple(getattr(fv, "dense", fv))


def predict(model: Model, fv) -> tuple[float, bool]:
    """``(probability, present)`` with ``present = probability >= threshold``."""
    x = _dense(fv)
    if len(x) != len(model.weights):
        raise ValueError(f"feature width {len(x)} does not match model width {model.width}")
    z = model.bias
    for w, v in zip(model.weights, x):
        z += w * v
    p = sigmoid(z)
    return p, p >= model.threshold


def baseline_predict(spans: Sequence[CandidateSpan], m: str) -> bool:
    """Dictionary lookup: the attribute is present if any span claims it."""
    return any(s.attribute == m for s in spans)


def save_model(model: Model, path) -> None:
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "schema_fingerprint": model.fingerprint,
        "weights": list(model.weights),
        "bias": model.bias,
        "threshold": model.threshold,
        "training_meta": model.training_meta,
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_model(path) -> Model:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise SnapshotError(f"{path}: corrupt model file ({exc})") from None
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        raise SnapshotError(f"{path}: not a {MODEL_FORMAT} file")
    if doc.get("version") != MODEL_VERSION:
        raise SnapshotError(f"{path}: unsupported model version {doc.get('version')!r}")
    try:
        meta = dict(doc["training_meta"])
        meta["schema_fingerprint"] = doc["schema_fingerprint"]
        return Model(tuple(doc["weights"]), float(doc["bias"]), float(doc["threshold"]), meta)
    except (KeyError, TypeError, ValueError) as exc:
        raise SnapshotError(f"{path}: incomplete model file ({exc})") from None


def train_test_split(rows: Sequence, test_fraction: float = 0.3, seed: int = 42):
    """Shuffle with ``seed`` and split into ``(train, test)`` lists."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie in (0, 1)")
    order = list(range(len(rows)))
    random.Random(seed).shuffle(order)
    cut = len(rows) - int(round(len(rows) * test_fraction))
    return [rows[i] for i in order[:cut]], [rows[i] for i in order[cut:]]

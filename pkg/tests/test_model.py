import math

import numpy as np
import pytest

from catalogkg import (AttributeSchema, FingerprintMismatch, Model, SnapshotError, TrainConfig,
                       baseline_predict, extract_candidates, load_model, predict, save_model,
                       train)
from catalogkg.model import fit_logistic, loss_and_grad, sigmoid, train_test_split

from oracles import central_difference


def _separable(n=40, seed=0):
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n):
        label = i % 2 == 0
        x1 = rng.uniform(0.6, 1.0) if label else rng.uniform(0.0, 0.4)
        rows.append(((x1, rng.uniform(0, 1)), label))
    return rows


def test_separable_reaches_full_accuracy():
    rows = _separable()
    model = train(rows, TrainConfig(epochs=500))
    assert all(predict(model, x)[1] == y for x, y in rows)


def test_zero_features_give_half():
    rows = [((0.0, 0.0), i % 2 == 0) for i in range(10)]
    model = train(rows)
    assert np.allclose(model.weights, 0.0)
    assert predict(model, (0.0, 0.0))[0] == pytest.approx(0.5)


def test_training_is_deterministic():
    rows = _separable(seed=3)
    assert train(rows).weights == train(rows).weights


def test_training_errors():
    with pytest.raises(ValueError, match="both classes"):
        train([((0.1,), True), ((0.2,), True)])
    with pytest.raises(ValueError, match="width"):
        train([((0.1,), True), ((0.2, 0.3), False)])


def test_loss_non_increasing():
    rng = np.random.default_rng(7)
    X = rng.uniform(0, 1, size=(200, 4))
    y = (X[:, 0] + 0.3 * rng.normal(size=200) > 0.5).astype(float)
    _, _, history = fit_logistic(X, y, TrainConfig())
    assert all(b <= a + 1e-15 for a, b in zip(history, history[1:]))


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(1)
    X = rng.uniform(0, 1, size=(30, 4))
    y = (rng.uniform(size=30) > 0.4).astype(float)
    sw = np.where(y > 0, 2.0, 1.0)
    for _ in range(5):
        params = rng.normal(size=5)
        _, g = loss_and_grad(params, X, y, sw, 1e-2)
        fd = central_difference(lambda p: loss_and_grad(np.array(p), X, y, sw, 1e-2)[0],
                                params.tolist())
        assert np.linalg.norm(g - fd) / max(np.linalg.norm(g), 1e-12) <= 1e-5


def test_predict_rules():
    zero = Model((0.0, 0.0), 0.0)
    assert predict(zero, (3.0, -2.0)) == (0.5, True)
    assert predict(Model((1.0,), 0.0), (30.0,))[0] > 0.999999
    m = Model((0.0,), math.log(0.65 / 0.35), threshold=0.7)
    p, present = predict(m, (0.0,))
    assert p == pytest.approx(0.65) and present is False
    with pytest.raises(ValueError):
        predict(zero, (1.0,))


def test_threshold_logit_equivalence():
    rng = np.random.default_rng(5)
    for _ in range(200):
        z = rng.normal(scale=5)
        t = rng.uniform(0.01, 0.99)
        assert (sigmoid(z) >= t) == (z >= math.log(t / (1 - t))) or abs(sigmoid(z) - t) < 1e-12


def test_model_roundtrip_and_fingerprint(tmp_path):
    schema = AttributeSchema(("product_type", "brand", "color"))
    model = train(_separable(), schema=AttributeSchema(("a", "b")))
    p = tmp_path / "m.json"
    save_model(model, p)
    assert load_model(p) == model
    with pytest.raises(FingerprintMismatch):
        load_model(p).check_schema(schema)
    p.write_text('{"format": "catalogkg-model", "version": 7}')
    with pytest.raises(SnapshotError):
        load_model(p)


def test_baseline(fixture_dict):
    assert baseline_predict(extract_candidates("maroon 5 dvds", fixture_dict), "color")
    assert not baseline_predict(extract_candidates("dvds", fixture_dict), "color")
    assert baseline_predict(extract_candidates("maroon shirt", fixture_dict), "color")


def test_baseline_definition(fixture_dict):
    for q in ["maroon 5 dvds", "blue shirt", "dvd", "", "maroon 5"]:
        spans = extract_candidates(q, fixture_dict)
        assert baseline_predict(spans, "color") == ("color" in {s.attribute for s in spans})


def test_train_test_split():
    train_rows, test_rows = train_test_split(list(range(100)), 0.3, seed=1)
    assert len(test_rows) == 30 and sorted(train_rows + test_rows) == list(range(100))
    assert train_test_split(list(range(100)), 0.3, seed=1) == (train_rows, test_rows)

import math

import numpy as np
import pytest

from augpet.lexicons import EmbeddingTable
from augpet.model import (
    BowClassifier,
    BowConfig,
    init_params,
    loss_and_grads,
    predict,
    soft_cross_entropy,
    softmax,
    temper,
    train_bow,
)
from conftest import write_embeddings


def numeric_grads(params, X, Q, mask, step=1e-4):
    out = {}
    for k, p in params.items():
        g = np.zeros_like(p)
        for idx in np.ndindex(p.shape):
            orig = p[idx]
            p[idx] = orig + step
            up, _ = loss_and_grads(params, X, Q, mask)
            p[idx] = orig - step
            down, _ = loss_and_grads(params, X, Q, mask)
            p[idx] = orig
            g[idx] = (up - down) / (2 * step)
        out[k] = g
    return out


def max_rel_error(params, X, Q, mask):
    _, analytic = loss_and_grads(params, X, Q, mask)
    numeric = numeric_grads(params, X, Q, mask)
    errs = []
    for k in params:
        a, n = analytic[k], numeric[k]
        errs.append(np.linalg.norm(a - n) / max(np.linalg.norm(a) + np.linalg.norm(n), 1e-12))
    return max(errs)


@pytest.mark.parametrize("with_mask", [False, True])
def test_gradient_check(with_mask):
    rng = np.random.default_rng(0)
    params = init_params(6, 7, 3, rng)
    params["b1"] = rng.normal(0, 0.1, 7)
    X = rng.normal(size=(5, 6))
    Q = softmax(rng.normal(size=(5, 3)))
    mask = (rng.random((5, 7)) < 0.5) / 0.5 if with_mask else None
    assert max_rel_error(params, X, Q, mask) < 1e-4


def test_soft_cross_entropy_values():
    assert soft_cross_entropy([[1.0, 0.0]], [[1.0, 0.0]]) == pytest.approx(0.0, abs=1e-12)
    assert soft_cross_entropy([[0.5, 0.5]], [[1.0, 0.0]]) == pytest.approx(math.log(2), abs=1e-12)
    assert soft_cross_entropy([[0.7, 0.3]], [[0.7, 0.3]]) == pytest.approx(
        -(0.7 * math.log(0.7) + 0.3 * math.log(0.3)), abs=1e-12)
    assert np.isfinite(soft_cross_entropy([[0.0, 1.0]], [[1.0, 0.0]]))


def test_temper():
    one_hot = np.array([[0.0, 1.0, 0.0]])
    assert np.array_equal(temper(one_hot, 2.0), one_hot)
    q = temper([[0.8, 0.2]], 2.0)
    assert q[0, 0] == pytest.approx(math.sqrt(0.8) / (math.sqrt(0.8) + math.sqrt(0.2)))


def test_separable_training(alpha_beta):
    d, table = alpha_beta
    model = train_bow(d, table, BowConfig(), seed=0)
    assert np.mean(model.predict(d.texts) == np.array(d.y)) >= 0.95
    assert model.predict(["alpha alpha"])[0] == "A"
    probs = predict(model, d)
    assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-9)


def test_determinism(alpha_beta):
    d, table = alpha_beta
    a = train_bow(d, table, BowConfig(epochs=2), seed=5)
    b = train_bow(d, table, BowConfig(epochs=2), seed=5)
    for k in a.params_:
        assert np.array_equal(a.params_[k], b.params_[k])


def test_embeddings_stay_frozen(alpha_beta):
    d, table = alpha_beta
    before = table.matrix.tobytes()
    train_bow(d, table, BowConfig(epochs=2), seed=0)
    assert table.matrix.tobytes() == before


def test_zero_model_is_uniform(alpha_beta):
    d, table = alpha_beta
    model = train_bow(d, table, BowConfig(epochs=1), seed=0)
    model.params_ = {k: np.zeros_like(v) for k, v in model.params_.items()}
    assert np.array_equal(model.predict_proba(d.texts[:3]), np.full((3, 2), 0.5))


def test_uniform_soft_targets(alpha_beta):
    d, table = alpha_beta
    model = BowClassifier(table, random_state=0).fit_soft(d.texts, np.full((len(d), 2), 0.5), ["A", "B"])
    assert model.loss_curve_[-1] >= math.log(2) - 1e-9
    assert np.abs(model.predict_proba(d.texts) - 0.5).max() < 0.1


def test_validation_errors(alpha_beta):
    d, table = alpha_beta
    m = BowClassifier(table)
    with pytest.raises(ValueError):
        m.fit([], [])
    with pytest.raises(ValueError):
        m.fit_soft(d.texts, np.full((len(d), 3), 1 / 3), ["A", "B"])
    with pytest.raises(ValueError):
        m.fit(d.texts[:2], ["A", "A"], classes=["A", "B"])
    with pytest.raises(ValueError):
        BowConfig(dropout=1.0)


def test_checkpoint_roundtrip(alpha_beta, tmp_path):
    d, table = alpha_beta
    path = write_embeddings(table, tmp_path / "emb.txt")
    from augpet.lexicons import load_embeddings

    loaded_table = load_embeddings(path)
    model = train_bow(d, loaded_table, BowConfig(epochs=2), seed=1)
    model.save(tmp_path / "m.json")
    back = BowClassifier.load(tmp_path / "m.json")
    assert np.array_equal(back.predict_proba(d.texts), model.predict_proba(d.texts))
    other = EmbeddingTable.from_dict({w: table[w] + 1 for w in table.vocab})
    with pytest.raises(ValueError, match="does not match"):
        BowClassifier.load(tmp_path / "m.json", other)


def test_sklearn_params(alpha_beta):
    _, table = alpha_beta
    m = BowClassifier(table, hidden_units=8)
    assert m.get_params()["hidden_units"] == 8
    assert m.set_params(dropout=0.2).dropout == 0.2

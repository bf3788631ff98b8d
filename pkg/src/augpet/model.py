"""Neural bag-of-words classifier.

Mean of frozen word vectors -> dense ReLU layer -> dropout -> softmax output,
trained by plain mini-batch gradient descent on (soft-target) cross-entropy.
Gradients are derived by hand; :func:`loss_and_grads` is exposed so they
can be checked against finite differences.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ._text import tokenize
from .lexicons import EmbeddingTable, load_embeddings

EPS = 1e-12
CHECKPOINT_FORMAT = "augpet-bow/1"


@dataclass(frozen=True)
class BowConfig:
    hidden_units: int = 256
    dropout: float = 0.5
    learning_rate: float = 0.1
    epochs: int = 10
    batch_size: int = 16
    distill_temperature: float = 2.0
    # extends training on tiny sets (few labeled examples) to at least this many updates
    min_steps: int = 0

    def __post_init__(self):
        if self.hidden_units < 1 or self.epochs < 1 or self.batch_size < 1:
            raise ValueError("hidden_units, epochs and batch_size must be >= 1")
        if self.min_steps < 0:
            raise ValueError("min_steps must be >= 0")
        if not 0 <= self.dropout < 1:
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.learning_rate <= 0 or self.distill_temperature <= 0:
            raise ValueError("learning_rate and distill_temperature must be positive")


def softmax(z):
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _log_softmax(z):
    z = z - z.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def temper(q, temperature: float):
    """Rescale target distributions as ``q ** (1/T)``, renormalized.

    Equivalent to dividing the teacher's log-probabilities by ``T``; one-hot
    rows are returned unchanged.
    """
    q = np.asarray(q, dtype=np.float64)
    if temperature == 1.0:
        return q
    with np.errstate(divide="ignore"):
        logq = np.log(q) / temperature
    logq[q == 0] = -np.inf
    logq -= logq.max(axis=-1, keepdims=True)
    w = np.exp(logq)
    return w / w.sum(axis=-1, keepdims=True)


def soft_cross_entropy(p, q, temperature: float = 1.0) -> float:
    """``-sum_k q~_k log p_k`` with ``q~ = temper(q, temperature)``.

    Zero entries of ``p`` are clamped to 1e-12.
    """
    p = np.asarray(p, dtype=np.float64)
    qt = temper(q, temperature)
    return float(-(qt * np.log(np.maximum(p, EPS))).sum(axis=-1).mean())


def forward(params, X, mask=None):
    z1 = X @ params["W1"] + params["b1"]
    a1 = np.maximum(z1, 0.0)
    h = a1 * mask if mask is not None else a1
    logits = h @ params["W2"] + params["b2"]
    return z1, h, logits


def loss_and_grads(params, X, Q, mask=None):
    """Mean soft cross-entropy over the batch and its gradients.

    ``mask`` is the (already rescaled) dropout mask on the hidden layer.
    """
    n = X.shape[0]
    z1, h, logits = forward(params, X, mask)
    loss = float(-(Q * _log_softmax(logits)).sum() / n)
    # assumes rows of Q sum to one
    d_logits = (softmax(logits) - Q) / n
    d_h = d_logits @ params["W2"].T
    if mask is not None:
        d_h = d_h * mask
    d_z1 = d_h * (z1 > 0)
    grads = {
        "W2": h.T @ d_logits,
        "b2": d_logits.sum(axis=0),
        "W1": X.T @ d_z1,
        "b1": d_z1.sum(axis=0),
    }
    return loss, grads


def init_params(dim, hidden, n_classes, rng):
    def uniform(fan_in, shape):
        bound = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=shape)

    return {
        "W1": uniform(dim, (dim, hidden)),
        "b1": np.zeros(hidden),
        "W2": uniform(hidden, (hidden, n_classes)),
        "b2": np.zeros(n_classes),
    }


class BowClassifier(ClassifierMixin, BaseEstimator):
    """Bag-of-words classifier over a frozen :class:`EmbeddingTable`.

    Parameters
    ----------
    embeddings : EmbeddingTable
        Word vectors, never updated by training.
    hidden_units, dropout, learning_rate, epochs, batch_size
        Architecture and optimizer settings.
    distill_temperature : float
        Temperature applied to soft targets in :meth:`fit_soft`.
    min_steps : int
        Lower bound on gradient updates; adds epochs when the data is small.
    random_state : int or sequence of int
        Seeds initialization, shuffling and dropout.
    """

    def __init__(self, embeddings=None, hidden_units=256, dropout=0.5, learning_rate=0.1, epochs=10,
                 batch_size=16, distill_temperature=2.0, min_steps=0, random_state=0):
        self.embeddings = embeddings
        self.hidden_units = hidden_units
        self.dropout = dropout
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.distill_temperature = distill_temperature
        self.min_steps = min_steps
        self.random_state = random_state

    @classmethod
    def from_config(cls, embeddings: EmbeddingTable, cfg: BowConfig, seed=0) -> "BowClassifier":
        return cls(embeddings=embeddings, random_state=seed, **asdict(cfg))

    @property
    def config(self) -> BowConfig:
        return BowConfig(self.hidden_units, self.dropout, self.learning_rate, self.epochs, self.batch_size,
                         self.distill_temperature, self.min_steps)

    def embed(self, X: Sequence[str]) -> np.ndarray:
        """Sentence features: mean word vector per text, zeros for all-OOV text."""
        if self.embeddings is None:
            raise ValueError("BowClassifier needs an embedding table")
        if isinstance(X, str):
            raise TypeError("expected a sequence of texts, got a single string")
        out = np.zeros((len(X), self.embeddings.dim))
        for i, text in enumerate(X):
            out[i], _ = self.embeddings.pool(tokenize(text))
        return out

    def fit(self, X, y, classes=None):
        """Train on hard labels.

        ``classes`` fixes the output order; by default the sorted unique
        labels. Every class must occur in ``y``.
        """
        y = [str(v) for v in y]
        if len(X) != len(y):
            raise ValueError(f"X and y have different lengths ({len(X)} != {len(y)})")
        if not y:
            raise ValueError("cannot train on an empty dataset")
        classes = list(classes) if classes is not None else sorted(set(y))
        col = {c: k for k, c in enumerate(classes)}
        unknown = set(y) - set(col)
        if unknown:
            raise ValueError(f"labels {sorted(unknown)} not in classes {classes}")
        missing = set(classes) - set(y)
        if missing:
            raise ValueError(f"classes {sorted(missing)} have no training examples")
        Q = np.zeros((len(y), len(classes)))
        Q[np.arange(len(y)), [col[v] for v in y]] = 1.0
        return self._fit(self.embed(X), Q, classes)

    def fit_soft(self, X, Q, classes, temperature=None):
        """Train on soft targets ``Q`` (one row per text, columns in ``classes`` order)."""
        Q = np.asarray(Q, dtype=np.float64)
        if Q.ndim != 2 or Q.shape[0] != len(X):
            raise ValueError(f"soft targets of shape {Q.shape} do not match {len(X)} texts")
        if Q.shape[1] != len(classes):
            raise ValueError(f"soft-label width {Q.shape[1]} != class count {len(classes)}")
        if len(X) == 0:
            raise ValueError("cannot train on an empty dataset")
        if np.any(Q < 0) or not np.allclose(Q.sum(axis=1), 1.0, atol=1e-9):
            raise ValueError("soft targets must be probability rows")
        T = self.distill_temperature if temperature is None else temperature
        return self._fit(self.embed(X), temper(Q, T), list(classes))

    def _fit(self, F, Q, classes):
        self.config  # validates hyperparameters
        rng = np.random.default_rng(self.random_state)
        params = init_params(F.shape[1], self.hidden_units, len(classes), rng)
        keep = 1.0 - self.dropout
        n = F.shape[0]
        batches = -(-n // self.batch_size)
        epochs = max(self.epochs, -(-self.min_steps // batches))
        self.loss_curve_ = []
        for _ in range(epochs):
            order = rng.permutation(n)
            total = 0.0
            for start in range(0, n, self.batch_size):
                idx = order[start : start + self.batch_size]
                mask = None
                if self.dropout > 0:
                    mask = (rng.random((len(idx), self.hidden_units)) < keep) / keep
                loss, grads = loss_and_grads(params, F[idx], Q[idx], mask)
                for k in params:
                    params[k] -= self.learning_rate * grads[k]
                total += loss * len(idx)
            self.loss_curve_.append(total / n)
        self.params_ = params
        self.classes_ = np.array(classes, dtype=object)
        return self

    def decision_function(self, X):
        check_is_fitted(self, "params_")
        return forward(self.params_, self.embed(X))[2]

    def predict_proba(self, X):
        return softmax(self.decision_function(X))

    def predict(self, X):
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]

    def save(self, path) -> None:
        """Write a JSON checkpoint: hyperparameters, classes, weights, embedding reference."""
        check_is_fitted(self, "params_")
        emb = self.embeddings
        doc = {
            "format": CHECKPOINT_FORMAT,
            "config": asdict(self.config),
            "random_state": self.random_state,
            "classes": [str(c) for c in self.classes_],
            "embeddings": {"path": emb.source, "sha256": emb.digest(), "dim": emb.dim},
            "weights": {k: v.tolist() for k, v in self.params_.items()},
        }
        Path(path).write_text(json.dumps(doc), encoding="utf-8")

    @classmethod
    def load(cls, path, embeddings: EmbeddingTable | None = None) -> "BowClassifier":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        if doc.get("format") != CHECKPOINT_FORMAT:
            raise ValueError(f"{path}: not a {CHECKPOINT_FORMAT} checkpoint")
        ref = doc["embeddings"]
        if embeddings is None:
            if not ref.get("path"):
                raise ValueError(f"{path}: checkpoint does not record an embeddings path")
            embeddings = load_embeddings(ref["path"])
        if embeddings.digest() != ref["sha256"]:
            raise ValueError(f"{path}: embedding table does not match the one used for training")
        model = cls(embeddings=embeddings, random_state=doc["random_state"], **doc["config"])
        model.params_ = {k: np.asarray(v, dtype=np.float64) for k, v in doc["weights"].items()}
        model.classes_ = np.array(doc["classes"], dtype=object)
        return model


def train_bow(train, t: EmbeddingTable, cfg: BowConfig = BowConfig(), seed=0, classes=None) -> BowClassifier:
    """Train on a :class:`~augpet.corpus.Dataset` (hard labels) or a soft-labeled set."""
    model = BowClassifier.from_config(t, cfg, seed)
    if hasattr(train, "soft_labels"):
        return model.fit_soft(train.texts, train.soft_labels, train.labels)
    return model.fit(train.texts, train.y, classes=classes if classes is not None else train.labels)


def predict(m: BowClassifier, examples) -> np.ndarray:
    texts = examples.texts if hasattr(examples, "texts") else list(examples)
    return m.predict_proba(texts)

"""Context-similarity scoring of augmented examples and bottom-quantile filtering."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from ._text import tokenize
from .augment import AugmentedExample
from .corpus import Dataset
from .lexicons import EmbeddingTable


class UnembeddableError(ValueError):
    """A text whose sentence vector is all zeros has no direction to compare."""


def embed_text(t: EmbeddingTable, text: str) -> np.ndarray:
    """Mean of the in-vocabulary word vectors; zeros when none are known."""
    vec, _ = t.pool(tokenize(text))
    return vec


def angular_similarity(u, v) -> float:
    """``1 - arccos(cos(u, v)) / pi``, in [0, 1].

    The angle is taken as ``2 * atan2(|u^ - v^|, |u^ + v^|)`` over the unit
    vectors, which equals ``arccos(cos)`` but keeps full precision near
    parallel and antiparallel pairs, where ``arccos`` loses half the digits.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    mu, mv = np.max(np.abs(u), initial=0.0), np.max(np.abs(v), initial=0.0)
    if mu == 0 or mv == 0:
        raise UnembeddableError("angular similarity is undefined for a zero vector")
    # prescale by the largest entry so the norms neither underflow nor overflow
    uh, vh = u / mu, v / mv
    uh, vh = uh / np.linalg.norm(uh), vh / np.linalg.norm(vh)
    angle = 2.0 * math.atan2(float(np.linalg.norm(uh - vh)), float(np.linalg.norm(uh + vh)))
    return min(1.0, max(0.0, 1.0 - angle / math.pi))


@dataclass(frozen=True)
class ScoredItem:
    item: AugmentedExample
    score: float
    degenerate: bool = False


@dataclass(frozen=True)
class ScoredSet:
    items: tuple[ScoredItem, ...]

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        for it in self.items:
            if not 0.0 <= it.score <= 1.0:
                raise ValueError(f"score {it.score} of {it.item.id!r} outside [0, 1]")

    def __len__(self):
        return len(self.items)

    @property
    def scores(self) -> list[float]:
        return [it.score for it in self.items]

    @classmethod
    def from_scores(cls, items: Sequence[AugmentedExample], scores: Sequence[float]) -> "ScoredSet":
        return cls(tuple(ScoredItem(a, float(s)) for a, s in zip(items, scores)))


Encoder = Callable[[str], np.ndarray]


def score_augmented(items: Sequence[AugmentedExample], origins: Dataset, t: EmbeddingTable | None = None,
                    encoder: Encoder | None = None) -> ScoredSet:
    """Score each augmented example against its origin text.

    Sentence vectors come from ``encoder`` when given, otherwise from the
    mean word vector over ``t``. Pairs where either side embeds to zeros
    score 0 and are flagged degenerate.
    """
    if encoder is None:
        if t is None:
            raise ValueError("score_augmented needs an embedding table or an encoder")
        encoder = lambda text: embed_text(t, text)  # noqa: E731
    lookup = origins.by_id()
    cache: dict[str, np.ndarray] = {}
    out = []
    for a in items:
        origin = lookup.get(a.origin_id)
        if origin is None:
            raise KeyError(f"origin {a.origin_id!r} of {a.id!r} not found")
        if origin.id not in cache:
            cache[origin.id] = encoder(origin.text)
        try:
            score = angular_similarity(cache[origin.id], encoder(a.text))
            out.append(ScoredItem(a.with_score(score), score))
        except UnembeddableError:
            out.append(ScoredItem(a.with_score(0.0), 0.0, degenerate=True))
    return ScoredSet(tuple(out))


def quartile_filter(s: ScoredSet, quantile: float = 0.25) -> list[AugmentedExample]:
    """Drop the ``floor(quantile * N)`` lowest-scored items.

    Among equal scores the later items go first, so earlier ones survive.
    Survivors keep their input order.
    """
    if len(s) == 0:
        raise ValueError("cannot filter an empty scored set")
    if not 0.0 <= quantile < 1.0:
        raise ValueError(f"quantile must be in [0, 1), got {quantile}")
    n_drop = math.floor(quantile * len(s))
    order = sorted(range(len(s)), key=lambda i: (s.items[i].score, -i))
    dropped = set(order[:n_drop])
    return [it.item for i, it in enumerate(s.items) if i not in dropped]


def nearest_rank(sorted_values: Sequence[float], q: float) -> float:
    # position q*(N-1) rounded to the nearest index, the lower one on exact halves
    pos = q * (len(sorted_values) - 1)
    idx = math.ceil(pos - 0.5)
    return sorted_values[min(max(idx, 0), len(sorted_values) - 1)]


def score_distribution(s: ScoredSet) -> dict:
    if len(s) == 0:
        raise ValueError("score distribution of an empty set")
    vals = sorted(s.scores)
    return {
        "n": len(vals),
        "min": vals[0],
        "q1": nearest_rank(vals, 0.25),
        "median": nearest_rank(vals, 0.5),
        "q3": nearest_rank(vals, 0.75),
        "max": vals[-1],
        "degenerate": sum(it.degenerate for it in s.items),
    }


class SimilarityFilter(BaseEstimator):
    """Keep augmented examples whose context stays close to the original.

    ``fit`` records the origin dataset; ``transform`` scores a list of
    augmented examples and returns the survivors with ``score`` set.
    """

    def __init__(self, embeddings=None, quantile=0.25, encoder=None):
        self.embeddings = embeddings
        self.quantile = quantile
        self.encoder = encoder

    def fit(self, origins: Dataset, y=None):
        self.origins_ = origins
        return self

    def transform(self, items):
        from sklearn.utils.validation import check_is_fitted

        check_is_fitted(self, "origins_")
        scored = score_augmented(items, self.origins_, self.embeddings, self.encoder)
        self.distribution_ = score_distribution(scored)
        return quartile_filter(scored, self.quantile)

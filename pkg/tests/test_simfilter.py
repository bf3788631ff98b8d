import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from augpet.augment import AugmentedExample
from augpet.corpus import Example
from augpet.lexicons import EmbeddingTable
from augpet.simfilter import (
    ScoredItem,
    ScoredSet,
    SimilarityFilter,
    UnembeddableError,
    angular_similarity,
    embed_text,
    nearest_rank,
    quartile_filter,
    score_augmented,
    score_distribution,
)
from conftest import dataset


def _aug(i, text="t", origin="0"):
    return AugmentedExample(Example(f"{origin}~{i}", text, "A"), origin, "eda_sr", {})


def test_embed_text():
    t = EmbeddingTable.from_dict({"a": [1.0, 0.0], "b": [0.0, 3.0]})
    assert np.array_equal(embed_text(t, "a"), [1.0, 0.0])
    assert np.allclose(embed_text(t, "a b"), [0.5, 1.5])
    assert not embed_text(t, "zzz").any()


def test_similarity_identities():
    u = np.array([1.0, 2.0, 3.0])
    assert abs(angular_similarity(u, u) - 1.0) <= 1e-12
    assert abs(angular_similarity([1, 0], [0, 5]) - 0.5) <= 1e-12
    assert abs(angular_similarity(u, -u)) <= 1e-12
    with pytest.raises(UnembeddableError):
        angular_similarity([0, 0], [1, 0])


@settings(max_examples=200)
@given(st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3), st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3))
def test_similarity_range_and_symmetry(u, v):
    if not np.any(u) or not np.any(v):
        return
    s = angular_similarity(u, v)
    assert 0.0 <= s <= 1.0
    assert s == angular_similarity(v, u)


def test_score_augmented():
    t = EmbeddingTable.from_dict({"good": [1.0, 0.0], "film": [0.0, 1.0], "bad": [-1.0, 0.2]})
    origins = dataset([("good film", "A")])
    items = [_aug(0, "good film"), _aug(1, "bad film"), _aug(2, "zzz")]
    s = score_augmented(items, origins, t)
    assert s.items[0].score == pytest.approx(1.0, abs=1e-12)
    assert s.items[1].score < s.items[0].score
    assert s.items[2].degenerate and s.items[2].score == 0.0
    assert all(0 <= x <= 1 for x in s.scores)
    with pytest.raises(KeyError):
        score_augmented([_aug(0, origin="missing")], origins, t)


def test_quartile_filter_examples():
    items = [_aug(i) for i in range(8)]
    s = ScoredSet.from_scores(items, [0.9] * 6 + [0.4, 0.3])
    kept = quartile_filter(s)
    assert [a.id for a in kept] == [a.id for a in items[:6]]
    assert len(quartile_filter(s, 0.0)) == 8
    ties = ScoredSet.from_scores(items[:5], [0.5] * 5)
    assert [a.id for a in quartile_filter(ties)] == [a.id for a in items[:4]]
    with pytest.raises(ValueError):
        quartile_filter(ScoredSet(()))


@settings(max_examples=100)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=100))
def test_quartile_cut_property(scores):
    items = [_aug(i) for i in range(len(scores))]
    kept = quartile_filter(ScoredSet.from_scores(items, scores))
    assert len(kept) == len(scores) - math.floor(len(scores) / 4)
    kept_ids = {a.id for a in kept}
    removed = [s for a, s in zip(items, scores) if a.id not in kept_ids]
    survivors = [s for a, s in zip(items, scores) if a.id in kept_ids]
    if removed:
        assert max(removed) <= min(survivors)


def test_nearest_rank_and_distribution():
    assert nearest_rank([0.1, 0.2, 0.3, 0.4], 0.5) == 0.2
    items = [_aug(i) for i in range(4)]
    d = score_distribution(ScoredSet.from_scores(items, [0.7] * 4))
    assert d["q1"] == d["median"] == d["q3"] == 0.7
    d = score_distribution(ScoredSet.from_scores(items, [0.5, 0.98, 0.99, 1.0]))
    assert d["q1"] >= 0.98
    with pytest.raises(ValueError):
        score_distribution(ScoredSet(()))


def test_scored_set_range_check():
    with pytest.raises(ValueError):
        ScoredSet((ScoredItem(_aug(0), 1.5),))


def test_similarity_filter_estimator():
    t = EmbeddingTable.from_dict({"good": [1.0, 0.0], "film": [0.0, 1.0], "bad": [-1.0, 0.2]})
    f = SimilarityFilter(embeddings=t).fit(dataset([("good film", "A")]))
    kept = f.transform([_aug(0, "good film"), _aug(1, "bad film"), _aug(2, "good"), _aug(3, "film")])
    assert "0~1" not in {a.id for a in kept} and len(kept) == 3

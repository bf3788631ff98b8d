"""Synthetic corpora and word vectors for tests, demos and trend checks."""

from __future__ import annotations

import numpy as np

from .corpus import Dataset, Example
from .lexicons import EmbeddingTable

# Class counts reproducing the published TRAC-2 English Task A training split.
TRAC2_TRAIN_COUNTS = {"NAG": 3376, "CAG": 452, "OAG": 435}

PATTERN_WORDS = ("in", "summary", "this", "is", "you", "are", "just", "it", "was")


def keyword_vocabulary(n_classes=2, keywords_per_class=60, n_fillers=200):
    keywords = {f"c{k}": [f"kw{k}x{j}" for j in range(keywords_per_class)] for k in range(n_classes)}
    fillers = [f"w{j}" for j in range(n_fillers)]
    return keywords, fillers


def make_keyword_corpus(n=1000, n_classes=2, keywords_per_class=60, keywords_per_example=3,
                        fillers_per_example=6, n_fillers=200, seed=0, id_prefix="") -> Dataset:
    """Balanced corpus where each text plants class-specific keywords among shared filler words.

    Classes are perfectly separable by their keywords, but each example
    only carries a few of a large keyword pool, so a handful of labeled
    examples covers little of the vocabulary.
    """
    rng = np.random.default_rng(seed)
    keywords, fillers = keyword_vocabulary(n_classes, keywords_per_class, n_fillers)
    labels = list(keywords)
    examples = []
    for i in range(n):
        label = labels[i % n_classes]
        kws = rng.choice(keywords[label], size=keywords_per_example, replace=False)
        words = list(kws) + list(rng.choice(fillers, size=fillers_per_example))
        rng.shuffle(words)
        examples.append(Example(f"{id_prefix}{i}", " ".join(words), label))
    return Dataset(tuple(examples), tuple(labels))


def make_keyword_embeddings(dim=300, n_classes=2, keywords_per_class=60, n_fillers=200, class_signal=0.5,
                            scale=0.4, seed=0, extra_words=PATTERN_WORDS) -> EmbeddingTable:
    """Gaussian word vectors with GloVe-like magnitude.

    Keywords of one class share a common direction weighted by
    ``class_signal`` (relative to the per-word noise), the way polar words
    cluster in real embedding spaces; fillers and ``extra_words`` are pure
    noise.
    """
    rng = np.random.default_rng(seed)
    keywords, fillers = keyword_vocabulary(n_classes, keywords_per_class, n_fillers)
    tokens = [w for ws in keywords.values() for w in ws] + fillers + list(extra_words)
    matrix = rng.standard_normal((len(tokens), dim)) * scale
    centers = rng.standard_normal((n_classes, dim)) * scale
    for k, words in enumerate(keywords.values()):
        for j in range(len(words)):
            row = k * keywords_per_class + j
            matrix[row] = np.sqrt(1 - class_signal**2) * matrix[row] + class_signal * centers[k]
    return EmbeddingTable({t: i for i, t in enumerate(tokens)}, matrix)


def make_distribution_corpus(counts=TRAC2_TRAIN_COUNTS, seed=0) -> Dataset:
    """Placeholder texts with exactly the given per-class counts, classes interleaved at random."""
    rng = np.random.default_rng(seed)
    labels = [label for label, n in counts.items() for _ in range(n)]
    order = rng.permutation(len(labels))
    examples = tuple(
        Example(str(i), f"comment {i} about topic {int(rng.integers(1000))}", labels[j])
        for i, j in enumerate(order)
    )
    return Dataset(examples, tuple(counts))

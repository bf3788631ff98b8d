"""Lexical resources: stopwords, a synonym thesaurus, adjective half-scales and word vectors."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np


class LexiconError(ValueError):
    pass


def _lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            yield lineno, line.rstrip("\r\n")


@dataclass(frozen=True)
class StopwordSet:
    words: frozenset

    def __post_init__(self):
        words = frozenset(self.words)
        if not words:
            raise LexiconError("stopword set is empty")
        bad = [w for w in words if w != w.lower() or any(ch.isspace() for ch in w) or not w]
        if bad:
            raise LexiconError(f"stopwords must be lowercase single tokens: {sorted(bad)[:5]}")
        object.__setattr__(self, "words", words)

    def __contains__(self, token):
        return token in self.words

    def __len__(self):
        return len(self.words)


def default_stopwords() -> StopwordSet:
    """scikit-learn's English stopword list."""
    from sklearn.feature_extraction.text import ENGLISH_STOP_WORDS

    return StopwordSet(frozenset(ENGLISH_STOP_WORDS))


def load_stopwords(path) -> StopwordSet:
    words = set()
    for _, line in _lines(path):
        token = line.strip().lower()
        if token and not token.startswith("#"):
            words.add(token)
    return StopwordSet(frozenset(words))


@dataclass(frozen=True)
class Thesaurus:
    entries: Mapping[str, tuple[str, ...]]

    def __post_init__(self):
        clean = {}
        for word, syns in self.entries.items():
            word = word.lower()
            syns = tuple(dict.fromkeys(s.lower() for s in syns if s.lower() != word))
            if not syns:
                raise LexiconError(f"thesaurus entry {word!r} has no synonyms")
            clean[word] = syns
        object.__setattr__(self, "entries", clean)

    def __contains__(self, word):
        return word in self.entries

    def synonyms(self, word) -> tuple[str, ...]:
        return self.entries.get(word, ())


def load_thesaurus(path) -> Thesaurus:
    """Read ``word<TAB>syn1,syn2,...`` lines."""
    entries: dict[str, tuple[str, ...]] = {}
    for lineno, line in _lines(path):
        if not line.strip() or line.startswith("#"):
            continue
        head, sep, rest = line.partition("\t")
        head = head.strip().lower()
        if not sep or not head:
            raise LexiconError(f"line {lineno}: expected 'word<TAB>synonyms'")
        if head in entries:
            raise LexiconError(f"line {lineno}: duplicate headword {head!r}")
        syns = tuple(s.strip() for s in rest.split(",") if s.strip())
        if not [s for s in syns if s.lower() != head]:
            raise LexiconError(f"line {lineno}: {head!r} has no synonyms")
        entries[head] = syns
    return Thesaurus(entries)


SCALE_SOURCES = ("demelo", "crowd", "wilkinson", "custom")


@dataclass(frozen=True)
class HalfScale:
    """Adjectives ordered mildest first, most intense last."""

    words: tuple[str, ...]
    source: str = "custom"

    def __post_init__(self):
        words = tuple(w.strip().lower() for w in self.words)
        if len(words) < 2:
            raise LexiconError(f"half-scale needs at least 2 words, got {words}")
        if len(set(words)) != len(words):
            raise LexiconError(f"half-scale has duplicate words: {words}")
        if self.source not in SCALE_SOURCES:
            raise LexiconError(f"unknown scale source {self.source!r}")
        object.__setattr__(self, "words", words)

    def __len__(self):
        return len(self.words)


@dataclass(frozen=True)
class ScaleSet:
    scales: tuple[HalfScale, ...]
    index: Mapping[str, tuple[tuple[int, int], ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        scales = tuple(self.scales)
        object.__setattr__(self, "scales", scales)
        index: dict[str, list[tuple[int, int]]] = {}
        for s, scale in enumerate(scales):
            for pos, word in enumerate(scale.words):
                index.setdefault(word, []).append((s, pos))
        object.__setattr__(self, "index", {w: tuple(v) for w, v in index.items()})

    def __len__(self):
        return len(self.scales)

    def __contains__(self, word):
        return word in self.index

    def merge(self, other: "ScaleSet") -> "ScaleSet":
        return ScaleSet(self.scales + other.scales)


def _read_scale_file(path) -> list[HalfScale]:
    source = "custom"
    scales = []
    for lineno, line in _lines(path):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            body = stripped[1:].strip()
            if body.startswith("source="):
                source = body.split("=", 1)[1].strip().lower()
                if source not in SCALE_SOURCES:
                    raise LexiconError(f"line {lineno}: unknown scale source {source!r}")
            continue
        words = [w.strip() for w in stripped.split(",") if w.strip()]
        try:
            scales.append(HalfScale(tuple(words), source))
        except LexiconError as exc:
            raise LexiconError(f"line {lineno}: {exc}") from None
    return scales


def load_half_scales(paths) -> ScaleSet:
    """Load one scale file, or several merged in order.

    Each line is ``w1,w2,...,wk`` from mildest to most intense. A
    ``#source=demelo|crowd|wilkinson|custom`` comment tags the scales
    that follow it.
    """
    if isinstance(paths, (str, Path)):
        paths = [paths]
    scales: list[HalfScale] = []
    for p in paths:
        scales.extend(_read_scale_file(p))
    return ScaleSet(tuple(scales))


def milder_alternatives(s: ScaleSet, word: str) -> list[str]:
    """Words milder than ``word`` across every scale that contains it.

    Within a scale the nearest milder word comes first; scales are visited
    in load order and repeats are dropped.
    """
    out: dict[str, None] = {}
    for scale_idx, pos in s.index.get(word.lower(), ()):
        words = s.scales[scale_idx].words
        for w in reversed(words[:pos]):
            out.setdefault(w, None)
    return list(out)


class EmbeddingTable:
    """Frozen word vectors, looked up by lowercase token."""

    def __init__(self, vocab: Mapping[str, int], matrix):
        matrix = np.array(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[1] == 0:
            raise LexiconError("embedding matrix must be 2-D with dim > 0")
        if len(vocab) != matrix.shape[0]:
            raise LexiconError("vocabulary size does not match matrix rows")
        if not np.all(np.isfinite(matrix)):
            raise LexiconError("embedding matrix has non-finite entries")
        matrix.flags.writeable = False
        self.vocab = dict(vocab)
        self.matrix = matrix
        self.source = None

    def digest(self) -> str:
        """SHA-256 over tokens and vector bytes; identifies the table in checkpoints."""
        h = hashlib.sha256()
        for token in sorted(self.vocab, key=self.vocab.get):
            h.update(token.encode("utf-8") + b"\0")
        h.update(np.ascontiguousarray(self.matrix).tobytes())
        return h.hexdigest()

    @classmethod
    def from_dict(cls, vectors: Mapping[str, Sequence[float]]) -> "EmbeddingTable":
        tokens = list(vectors)
        dims = {len(vectors[t]) for t in tokens}
        if len(dims) != 1:
            raise LexiconError(f"inconsistent vector lengths {sorted(dims)}")
        return cls({t.lower(): i for i, t in enumerate(tokens)}, [vectors[t] for t in tokens])

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __len__(self):
        return len(self.vocab)

    def __contains__(self, token):
        return token in self.vocab

    def __getitem__(self, token):
        return self.matrix[self.vocab[token]]

    @property
    def vectors(self) -> dict[str, np.ndarray]:
        return {t: self.matrix[i] for t, i in self.vocab.items()}

    def pool(self, tokens: Iterable[str]) -> tuple[np.ndarray, int]:
        """Mean of in-vocabulary token vectors and how many tokens were found."""
        rows = [self.vocab[t] for t in tokens if t in self.vocab]
        if not rows:
            return np.zeros(self.dim), 0
        return self.matrix[rows].mean(axis=0), len(rows)

    def __eq__(self, other):
        if not isinstance(other, EmbeddingTable):
            return NotImplemented
        return self.vocab == other.vocab and np.array_equal(self.matrix, other.matrix)

    def __repr__(self):
        return f"EmbeddingTable(size={len(self)}, dim={self.dim})"


def load_embeddings(path, dim: int | None = None) -> EmbeddingTable:
    """Read GloVe-style text vectors: ``token v1 ... vdim`` per line.

    A leading ``<count> <dim>`` header (word2vec text format) declares the
    dimension; otherwise the first row fixes it. Tokens are lowercased and
    the first occurrence wins.
    """
    vocab: dict[str, int] = {}
    rows: list[list[float]] = []
    for lineno, line in _lines(path):
        parts = line.rstrip().split(" ")
        if not line.strip():
            continue
        if lineno == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
            declared = int(parts[1])
            if dim is not None and dim != declared:
                raise LexiconError(f"line 1: header declares dim {declared}, expected {dim}")
            dim = declared
            continue
        if dim is None:
            dim = len(parts) - 1
        if len(parts) - 1 != dim:
            raise LexiconError(f"line {lineno}: expected {dim} values, got {len(parts) - 1}")
        try:
            values = [float(v) for v in parts[1:]]
        except ValueError:
            raise LexiconError(f"line {lineno}: non-numeric vector value") from None
        token = parts[0].lower()
        if token in vocab:
            continue
        vocab[token] = len(rows)
        rows.append(values)
    if not rows:
        raise LexiconError(f"{path}: no vectors")
    if dim is None or dim <= 0:
        raise LexiconError(f"{path}: vector dimension must be positive")
    table = EmbeddingTable(vocab, rows)
    table.source = str(Path(path).resolve())
    return table

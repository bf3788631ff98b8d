"""Synthetic example generation: oversampling, EDA, greyscaling, back-translation.

Every generator returns :class:`AugmentedExample` records that remember
their origin, the method and its parameters, so augmented corpora can be
filtered and audited downstream.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from ._text import WORD_RE, tokenize
from .corpus import Dataset, Example
from .lexicons import ScaleSet, StopwordSet, Thesaurus, milder_alternatives
from .translation import TranslationClient, TranslationError

METHODS = ("oversample", "eda_sr", "eda_rd", "backtranslate", "greyscale")


@dataclass(frozen=True)
class AugmentedExample:
    example: Example
    origin_id: str
    method: str
    params: dict = field(default_factory=dict)
    score: float | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown augmentation method {self.method!r}")

    @property
    def id(self):
        return self.example.id

    @property
    def text(self):
        return self.example.text

    @property
    def label(self):
        return self.example.label

    def with_score(self, score: float | None) -> "AugmentedExample":
        return AugmentedExample(self.example, self.origin_id, self.method, self.params, score)

    def to_record(self) -> dict:
        rec = {
            "id": self.example.id,
            "text": self.example.text,
            "label": self.example.label,
            "origin_id": self.origin_id,
            "method": self.method,
            "params": self.params,
        }
        if self.score is not None:
            rec["score"] = self.score
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "AugmentedExample":
        return cls(
            Example(str(rec["id"]), rec["text"], rec["label"]),
            str(rec["origin_id"]),
            rec["method"],
            dict(rec.get("params") or {}),
            rec.get("score"),
        )


@dataclass(frozen=True)
class EdaConfig:
    """Synonym replacement swaps ``max(1, floor(alpha_sr * L))`` words, ``L``
    being the number of non-stopword tokens; random deletion drops each
    token with probability ``p_rd``. ``mix`` is cycled to choose the method
    of each of the ``copies_per_example`` variants."""

    alpha_sr: float = 0.1
    p_rd: float = 0.1
    copies_per_example: int = 3
    mix: tuple[str, ...] = ("sr", "sr", "rd")

    def __post_init__(self):
        if not 0 < self.alpha_sr <= 1:
            raise ValueError(f"alpha_sr must be in (0, 1], got {self.alpha_sr}")
        if not 0 <= self.p_rd < 1:
            raise ValueError(f"p_rd must be in [0, 1), got {self.p_rd}")
        if self.copies_per_example < 1:
            raise ValueError("copies_per_example must be >= 1")
        if not self.mix or set(self.mix) - {"sr", "rd"}:
            raise ValueError(f"mix must contain only 'sr'/'rd', got {self.mix}")

    def n_replacements(self, n_content_tokens: int) -> int:
        return max(1, int(np.floor(self.alpha_sr * n_content_tokens)))


def _ordered_map(fn: Callable, items: Sequence, jobs: int = 1) -> list:
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def oversample_examples(d: Dataset, seed: int = 0) -> list[AugmentedExample]:
    """Copies that bring every class up to the largest class count."""
    if len(d) == 0:
        raise ValueError("cannot oversample an empty dataset")
    rng = np.random.default_rng(seed)
    by_class: dict[str, list[Example]] = {label: [] for label in d.labels}
    for e in d:
        by_class[e.label].append(e)
    target = max(len(v) for v in by_class.values())
    copies = []
    for label in d.labels:
        pool = by_class[label]
        deficit = target - len(pool)
        if not pool or deficit == 0:
            continue
        for k, j in enumerate(rng.integers(0, len(pool), size=deficit)):
            src = pool[int(j)]
            copies.append(
                AugmentedExample(Example(f"{src.id}~os{k}", src.text, label), src.id, "oversample", {"copy": k})
            )
    return copies


def oversample(d: Dataset, seed: int = 0) -> Dataset:
    """Duplicate minority-class examples, sampled with replacement, until classes are uniform.

    Originals come first, in order, followed by the copies grouped by class.
    Classes declared in ``d.labels`` but absent from the data stay empty.
    """
    copies = oversample_examples(d, seed)
    return d.with_examples(list(d) + [c.example for c in copies])


def synonym_replacement(e: Example, t: Thesaurus, sw: StopwordSet, cfg: EdaConfig, seed=0) -> AugmentedExample:
    tokens = tokenize(e.text)
    if not tokens:
        raise ValueError(f"example {e.id!r} has no tokens")
    rng = np.random.default_rng(seed)
    n = cfg.n_replacements(sum(tok not in sw for tok in tokens))
    candidates = [i for i, tok in enumerate(tokens) if tok not in sw and tok in t]
    out = list(tokens)
    replaced = []
    if candidates:
        for i in rng.permutation(candidates)[: min(n, len(candidates))]:
            i = int(i)
            syns = t.synonyms(tokens[i])
            new = syns[int(rng.integers(len(syns)))]
            out[i] = new
            replaced.append([i, tokens[i], new])
    params = {"n": n, "replacements": sorted(replaced)}
    if not replaced:
        params["degenerate"] = True
    return AugmentedExample(Example(f"{e.id}~sr", " ".join(out), e.label), e.id, "eda_sr", params)


def random_deletion(e: Example, cfg: EdaConfig, seed=0) -> AugmentedExample:
    tokens = tokenize(e.text)
    if not tokens:
        raise ValueError(f"example {e.id!r} has no tokens")
    rng = np.random.default_rng(seed)
    keep = rng.random(len(tokens)) >= cfg.p_rd
    if not keep.any():
        keep[int(rng.integers(len(tokens)))] = True
    out = [tok for tok, k in zip(tokens, keep) if k]
    params = {"p": cfg.p_rd, "deleted": int(len(tokens) - len(out))}
    return AugmentedExample(Example(f"{e.id}~rd", " ".join(out), e.label), e.id, "eda_rd", params)


def eda_augment(
    d: Dataset, t: Thesaurus, sw: StopwordSet, cfg: EdaConfig = EdaConfig(), seed: int = 0, jobs: int = 1
) -> list[AugmentedExample]:
    """``cfg.copies_per_example`` EDA variants of each example, in input order.

    Copy ``c`` of example ``i`` uses method ``cfg.mix[c % len(cfg.mix)]``
    and the generator seeded with ``(seed, i, c)``.
    """

    def variants(item):
        i, e = item
        out = []
        for c in range(cfg.copies_per_example):
            sub_seed = [seed, i, c]
            if cfg.mix[c % len(cfg.mix)] == "sr":
                aug = synonym_replacement(e, t, sw, cfg, sub_seed)
            else:
                aug = random_deletion(e, cfg, sub_seed)
            ex = Example(f"{e.id}~eda{c}", aug.text, e.label)
            out.append(AugmentedExample(ex, e.id, aug.method, aug.params))
        return out

    return [a for group in _ordered_map(variants, list(enumerate(d)), jobs) for a in group]


def greyscale_example(e: Example, s: ScaleSet, cap: int | None = None) -> list[AugmentedExample]:
    candidates = []
    for m in WORD_RE.finditer(e.text):
        for rank, alt in enumerate(milder_alternatives(s, m.group(0))):
            candidates.append((m.start(), rank, m, alt))
    if cap is not None and len(candidates) > cap:
        keep = sorted(candidates, key=lambda c: (c[1], c[0]))[:cap]
        candidates = [c for c in candidates if c in keep]
    out = []
    for k, (start, rank, m, alt) in enumerate(candidates):
        text = e.text[:start] + alt + e.text[m.end() :]
        params = {"replaced": m.group(0), "replacement": alt, "offset": start, "rank": rank}
        out.append(AugmentedExample(Example(f"{e.id}~gs{k}", text, e.label), e.id, "greyscale", params))
    return out


def greyscale_augment(d: Dataset, s: ScaleSet, cap: int | None = None, jobs: int = 1) -> list[AugmentedExample]:
    """Replace one scalar adjective at a time with each of its milder alternatives.

    Only the matched word changes; the rest of the text keeps its original
    characters. With ``cap`` set, at most ``cap`` variants per example are
    kept, preferring the nearest milder words.
    """
    if cap is not None and cap < 0:
        raise ValueError("cap must be non-negative")
    groups = _ordered_map(lambda e: greyscale_example(e, s, cap), list(d), jobs)
    return [a for g in groups for a in g]


def back_translate(e: Example, client: TranslationClient, pivot: str, source: str = "en") -> AugmentedExample:
    try:
        there = client.translate(e.text, source, pivot)
        back = client.translate(there, pivot, source)
    except Exception as exc:
        raise TranslationError(f"back-translation of {e.id!r} via {pivot!r} failed: {exc}", e.id, pivot) from exc
    return AugmentedExample(Example(f"{e.id}~bt-{pivot}", back, e.label), e.id, "backtranslate", {"pivot": pivot})


def back_translate_all(
    d: Dataset, client: TranslationClient, pivots: Iterable[str] = ("es", "fr", "it"), jobs: int = 1
) -> list[AugmentedExample]:
    pivots = list(pivots)
    jobs_list = [(e, p) for e in d for p in pivots]
    return _ordered_map(lambda ep: back_translate(ep[0], client, ep[1]), jobs_list, jobs)


# scikit-learn style resamplers: fit_resample(X, y) -> (X_res, y_res)


def _to_dataset(X, y) -> Dataset:
    X, y = list(X), list(y)
    if len(X) != len(y):
        raise ValueError(f"X and y have different lengths ({len(X)} != {len(y)})")
    return Dataset(tuple(Example(str(i), str(x), str(label)) for i, (x, label) in enumerate(zip(X, y))))


class _Resampler(BaseEstimator):
    def fit(self, X, y):
        return self

    def _augment(self, d: Dataset) -> list[AugmentedExample]:
        raise NotImplementedError

    def fit_resample(self, X, y):
        """Return the original texts followed by the synthetic ones."""
        d = _to_dataset(X, y)
        extra = self._augment(d)
        return list(d.texts) + [a.text for a in extra], list(d.y) + [a.label for a in extra]


class RandomOversampler(_Resampler):
    def __init__(self, random_state=0):
        self.random_state = random_state

    def _augment(self, d):
        return oversample_examples(d, self.random_state)


class EdaAugmenter(_Resampler):
    def __init__(self, thesaurus=None, stopwords=None, alpha_sr=0.1, p_rd=0.1, copies_per_example=3, random_state=0):
        self.thesaurus = thesaurus
        self.stopwords = stopwords
        self.alpha_sr = alpha_sr
        self.p_rd = p_rd
        self.copies_per_example = copies_per_example
        self.random_state = random_state

    def _augment(self, d):
        from .lexicons import default_stopwords

        cfg = EdaConfig(self.alpha_sr, self.p_rd, self.copies_per_example)
        sw = self.stopwords if self.stopwords is not None else default_stopwords()
        return eda_augment(d, self.thesaurus or Thesaurus({}), sw, cfg, self.random_state)


class GreyscaleAugmenter(_Resampler):
    def __init__(self, scales=None, cap=None):
        self.scales = scales
        self.cap = cap

    def _augment(self, d):
        return greyscale_augment(d, self.scales or ScaleSet(()), self.cap)


class BackTranslationAugmenter(_Resampler):
    def __init__(self, client=None, pivots=("es", "fr", "it")):
        self.client = client
        self.pivots = pivots

    def _augment(self, d):
        if self.client is None:
            raise ValueError("BackTranslationAugmenter needs a translation client")
        return back_translate_all(d, self.client, self.pivots)

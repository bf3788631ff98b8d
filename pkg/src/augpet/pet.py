"""Pattern-Exploiting Training (PET) and its iterative variant (iPET).

1. Each pattern rewrites the labeled texts T as cloze questions and a
   separate classifier is trained per pattern.
2. The ensemble soft-labels the unlabeled set D (mean of member
   distributions, each member reading its own pattern view).
3. A plain classifier is distilled from the soft labels on raw texts.

iPET repeats steps 1-2, growing the labeled set with the ensemble's most
confident pseudo-labels before the final distillation. The per-pattern
scorer is :class:`~augpet.model.BowClassifier`, so the pattern tokens act
as extra features; a masked-LM scorer could reuse the verbalizer tokens.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .corpus import Dataset, Example, PetDataSplit, sample_training_set
from .lexicons import EmbeddingTable
from .metrics import AggregateReport, MetricsReport, aggregate_runs, classification_metrics
from .model import BowClassifier, BowConfig

MASK = "[MASK]"


@dataclass(frozen=True)
class Pattern:
    id: str
    template: str

    def __post_init__(self):
        for slot in ("{x}", "{mask}"):
            if self.template.count(slot) != 1:
                raise ValueError(f"pattern {self.id!r} needs exactly one {slot} slot: {self.template!r}")

    def apply(self, text: str) -> str:
        # substitute the mask in the template pieces only, so text is never rewritten
        before, after = self.template.split("{x}")
        return before.replace("{mask}", MASK) + text + after.replace("{mask}", MASK)


DEFAULT_PATTERNS = (
    Pattern("P1", "{x}. In summary, this is {mask}"),
    Pattern("P2", "{x}. You are just {mask} !"),
    Pattern("P3", "It was {mask} . {x}."),
    Pattern("P4", "Just {mask} ! {x}."),
)


@dataclass(frozen=True)
class Verbalizer:
    mapping: dict[str, str]

    def __post_init__(self):
        tokens = list(self.mapping.values())
        if len(set(tokens)) != len(tokens):
            raise ValueError(f"verbalizer is not injective: {self.mapping}")
        if any(not t or any(ch.isspace() for ch in t) for t in tokens):
            raise ValueError("verbalizer tokens must be single non-empty tokens")

    def __getitem__(self, label):
        return self.mapping[label]

    def covers(self, labels) -> bool:
        return set(labels) <= set(self.mapping)


VERBALIZERS = {
    "trac2_binary": Verbalizer({"NAG": "good", "AG": "bad"}),
    "trac2": Verbalizer({"NAG": "good", "CAG": "bad", "OAG": "terrible"}),
    "rtgender": Verbalizer({"Positive": "positive", "Neutral": "neutral", "Mixed": "mixed", "Negative": "negative"}),
}


def load_pvp(path) -> tuple[list[Pattern], Verbalizer]:
    """Read ``{"patterns": [{"id", "template"}], "verbalizer": {label: token}}``."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    patterns = [Pattern(str(p["id"]), p["template"]) for p in doc["patterns"]]
    if not patterns:
        raise ValueError(f"{path}: no patterns")
    return patterns, Verbalizer(dict(doc["verbalizer"]))


def apply_pattern(p: Pattern, e) -> str:
    return p.apply(e.text if isinstance(e, Example) else e)


@dataclass(frozen=True)
class SoftLabeledSet:
    examples: tuple[Example, ...]
    soft_labels: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        q = np.asarray(self.soft_labels, dtype=np.float64)
        if q.shape != (len(self.examples), len(self.labels)):
            raise ValueError(f"soft labels of shape {q.shape} for {len(self.examples)} examples")
        if len(q) and not np.allclose(q.sum(axis=1), 1.0, rtol=0, atol=1e-9):
            raise ValueError("soft labels must sum to 1")
        object.__setattr__(self, "soft_labels", q)

    def __len__(self):
        return len(self.examples)

    @property
    def texts(self):
        return [e.text for e in self.examples]


@dataclass(frozen=True)
class PvpMember:
    pattern: Pattern
    model: BowClassifier

    def predict_proba(self, texts: Sequence[str]) -> np.ndarray:
        return self.model.predict_proba([self.pattern.apply(t) for t in texts])


def train_pvp_models(split: PetDataSplit, patterns: Sequence[Pattern], verbalizer: Verbalizer,
                     t: EmbeddingTable, cfg: BowConfig = BowConfig(), seed=0) -> list[PvpMember]:
    """One classifier per pattern on the pattern view of the labeled set; member i seeded ``seed + i``."""
    if not patterns:
        raise ValueError("at least one pattern is required")
    labeled = split.labeled
    if not verbalizer.covers(labeled.labels):
        raise ValueError(f"verbalizer {verbalizer.mapping} does not cover {labeled.labels}")
    missing = [label for label, n in labeled.counts().items() if n == 0]
    if missing:
        raise ValueError(f"classes {missing} are absent from the labeled set")
    members = []
    for i, p in enumerate(patterns):
        member_seed = seed + i if isinstance(seed, (int, np.integer)) else [*seed, i]
        model = BowClassifier.from_config(t, cfg, member_seed)
        model.fit([p.apply(x) for x in labeled.texts], labeled.y, classes=labeled.labels)
        members.append(PvpMember(p, model))
    return members


def annotate_unlabeled(ensemble: Sequence[PvpMember], d_set: Dataset, weights=None) -> SoftLabeledSet:
    """Soft labels as the (optionally weighted) mean of member distributions."""
    if not ensemble:
        raise ValueError("empty ensemble")
    labels = tuple(str(c) for c in ensemble[0].model.classes_)
    w = np.ones(len(ensemble)) if weights is None else np.asarray(weights, dtype=np.float64)
    w = w / w.sum()
    if len(d_set) == 0:
        return SoftLabeledSet((), np.zeros((0, len(labels))), labels)
    texts = d_set.texts
    soft = sum(wi * m.predict_proba(texts) for wi, m in zip(w, ensemble))
    return SoftLabeledSet(tuple(d_set.examples), soft, labels)


def distill(soft: SoftLabeledSet, t: EmbeddingTable, cfg: BowConfig = BowConfig(), seed=0) -> BowClassifier:
    if len(soft) == 0:
        raise ValueError("cannot distill from an empty soft-labeled set")
    model = BowClassifier.from_config(t, cfg, seed)
    return model.fit_soft(soft.texts, soft.soft_labels, soft.labels)


@dataclass
class PetResult:
    model: BowClassifier | None
    reports: list[MetricsReport]
    aggregate: AggregateReport
    history: list[int] = field(default_factory=list)
    generations: list[dict] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "reports": [r.to_dict() for r in self.reports],
            "aggregate": self.aggregate.to_dict(),
            "history": self.history,
            "generations": self.generations,
            "warnings": self.warnings,
        }


@dataclass
class _Fit:
    model: BowClassifier
    history: list[int]
    generations: list[dict]
    warnings: list[str]


def _balanced_targets(size, labels):
    k = len(labels)
    return {label: size // k + (1 if j < size % k else 0) for j, label in enumerate(labels)}


def _grow(labeled: list[Example], pool: list[Example], soft: np.ndarray, labels, size, notes) -> list[Example]:
    """Add the most confident pseudo-labeled pool examples, class-balanced, until ``size``."""
    current = {label: 0 for label in labels}
    for e in labeled:
        current[e.label] += 1
    targets = _balanced_targets(size, labels)
    conf = soft.max(axis=1)
    pred = soft.argmax(axis=1)
    taken: set[int] = set()
    added: list[Example] = []
    for k, label in enumerate(labels):
        need = targets[label] - current[label]
        if need <= 0:
            continue
        ranked = sorted((i for i in range(len(pool)) if pred[i] == k), key=lambda i: (-conf[i], i))
        pick = [i for i in ranked if i not in taken][:need]
        if len(pick) < need:
            notes.append(f"only {len(pick)} confident '{label}' candidates for {need} slots; filled by class probability")
            rest = sorted((i for i in range(len(pool)) if i not in taken and i not in pick),
                          key=lambda i: (-soft[i, k], i))
            pick += rest[: need - len(pick)]
        taken.update(pick)
        added.extend(Example(pool[i].id, pool[i].text, label) for i in sorted(pick))
    return labeled + added


def fit_pet(labeled: Dataset, unlabeled: Dataset, patterns, verbalizer, t: EmbeddingTable,
            cfg: BowConfig = BowConfig(), seed: int = 0, generations: int = 1, growth: float = 5.0,
            weights=None) -> _Fit:
    """Run PET (``generations == 1``) or iPET on a labeled/unlabeled pair."""
    if generations < 1:
        raise ValueError("generations must be >= 1")
    if generations > 1 and growth <= 1:
        raise ValueError(f"iPET growth must exceed 1, got {growth}")
    labels = labeled.labels
    n_total = len(labeled) + len(unlabeled)
    notes: list[str] = []
    history = [len(labeled)]
    records = []
    current = list(labeled)
    for g in range(generations):
        if g > 0:
            wanted = len(labeled) * growth**g
            size = int(round(wanted))
            if size > n_total:
                msg = f"generation {g}: size {size} exceeds {n_total} available examples; capped"
                warnings.warn(msg)
                notes.append(msg)
                size = n_total
            in_set = {e.id for e in current}
            pool = [e for e in unlabeled if e.id not in in_set]
            soft = annotate_unlabeled(ensemble, labeled.with_examples(pool), weights).soft_labels
            current = _grow(current, pool, soft, labels, size, notes)
            history.append(len(current))
        in_set = {e.id for e in current}
        records.append({
            "generation": g,
            "labeled_ids": [e.id for e in current],
            "label_counts": {label: sum(e.label == label for e in current) for label in labels},
            "unlabeled_ids": [e.id for e in unlabeled if e.id not in in_set],
        })
        split = PetDataSplit(labeled.with_examples(current), labeled.with_examples(
            e for e in unlabeled if e.id not in in_set))
        ensemble = train_pvp_models(split, patterns, verbalizer, t, cfg, seed if g == 0 else [seed, g])
    soft = annotate_unlabeled(ensemble, unlabeled, weights)
    model = distill(soft, t, cfg, seed)
    return _Fit(model, history, records, notes)


def _evaluate(model: BowClassifier, test: Dataset) -> MetricsReport:
    return classification_metrics(test.y, [str(p) for p in model.predict(test.texts)], test.labels)


def run_pet(train: Dataset, test: Dataset, t_size: int, patterns=DEFAULT_PATTERNS, verbalizer=None,
            t: EmbeddingTable | None = None, cfg: BowConfig = BowConfig(), seeds=(0, 1, 2, 3, 4)) -> PetResult:
    """PET once per seed: sample T/D, train the pattern ensemble, distill, score on ``test``."""
    return _run(train, test, t_size, patterns, verbalizer, t, cfg, seeds, generations=1, growth=5.0)


def run_ipet(train: Dataset, test: Dataset, t_size: int, patterns=DEFAULT_PATTERNS, verbalizer=None,
             t: EmbeddingTable | None = None, cfg: BowConfig = BowConfig(), generations: int = 3,
             growth: float = 5.0, seeds=(0, 1, 2, 3, 4)) -> PetResult:
    if generations < 2:
        raise ValueError("iPET needs at least 2 generations")
    if growth <= 1:
        raise ValueError(f"iPET growth must exceed 1, got {growth}")
    return _run(train, test, t_size, patterns, verbalizer, t, cfg, seeds, generations, growth)


def _run(train, test, t_size, patterns, verbalizer, t, cfg, seeds, generations, growth):
    if t is None:
        raise ValueError("an embedding table is required")
    if not seeds:
        raise ValueError("at least one seed is required")
    verbalizer = verbalizer or Verbalizer({label: label.lower() for label in train.labels})
    reports, model, fit = [], None, None
    for seed in seeds:
        split = sample_training_set(train, t_size, seed)
        fit = fit_pet(split.labeled, split.unlabeled, patterns, verbalizer, t, cfg, seed, generations, growth)
        model = fit.model
        reports.append(_evaluate(model, test))
    return PetResult(model, reports, aggregate_runs(reports), fit.history, fit.generations, fit.warnings)


def run_supervised(train: Dataset, test: Dataset, t_size: int, t: EmbeddingTable,
                   cfg: BowConfig = BowConfig(), seeds=(0, 1, 2, 3, 4)) -> PetResult:
    """Baseline on the same per-seed labeled sample, ignoring the unlabeled rest."""
    reports, model = [], None
    for seed in seeds:
        split = sample_training_set(train, t_size, seed)
        model = BowClassifier.from_config(t, cfg, seed)
        model.fit(split.labeled.texts, split.labeled.y, classes=split.labeled.labels)
        reports.append(_evaluate(model, test))
    return PetResult(model, reports, aggregate_runs(reports), [t_size])


class PetClassifier(ClassifierMixin, BaseEstimator):
    """PET/iPET as an estimator: ``fit(X, y, X_unlabeled=...)`` then predict like a classifier."""

    def __init__(self, embeddings=None, patterns=DEFAULT_PATTERNS, verbalizer=None, hidden_units=256,
                 dropout=0.5, learning_rate=0.1, epochs=10, batch_size=16, distill_temperature=2.0,
                 min_steps=0, generations=1, growth=5.0, random_state=0):
        self.embeddings = embeddings
        self.patterns = patterns
        self.verbalizer = verbalizer
        self.hidden_units = hidden_units
        self.dropout = dropout
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.distill_temperature = distill_temperature
        self.min_steps = min_steps
        self.generations = generations
        self.growth = growth
        self.random_state = random_state

    def fit(self, X, y, X_unlabeled=(), classes=None):
        X, y = list(X), [str(v) for v in y]
        if len(X) != len(y):
            raise ValueError(f"X and y have different lengths ({len(X)} != {len(y)})")
        classes = tuple(classes) if classes is not None else tuple(sorted(set(y)))
        labeled = Dataset(tuple(Example(f"t{i}", x, label) for i, (x, label) in enumerate(zip(X, y))), classes)
        unlabeled = Dataset(
            tuple(Example(f"u{i}", x, classes[0], hidden=True) for i, x in enumerate(X_unlabeled)), classes
        )
        if len(unlabeled) == 0:
            raise ValueError("PET needs unlabeled texts to distill from")
        cfg = BowConfig(self.hidden_units, self.dropout, self.learning_rate, self.epochs, self.batch_size,
                        self.distill_temperature, self.min_steps)
        verbalizer = self.verbalizer or Verbalizer({c: c.lower() for c in classes})
        fit = fit_pet(labeled, unlabeled, list(self.patterns), verbalizer, self.embeddings, cfg,
                      self.random_state, self.generations, self.growth)
        self.model_ = fit.model
        self.history_ = fit.history
        self.classes_ = fit.model.classes_
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "model_")
        return self.model_.predict_proba(list(X))

    def predict(self, X):
        check_is_fitted(self, "model_")
        return self.model_.predict(list(X))

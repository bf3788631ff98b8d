"""Labeled text corpora: loading, class statistics and seeded splits."""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import dataclass, field, replace
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class CorpusError(ValueError):
    """Raised for malformed corpus files and invalid split requests."""


@dataclass(frozen=True)
class Example:
    id: str
    text: str
    label: str
    # Label kept for evaluation but not part of the visible record (set D of PET).
    hidden: bool = False

    def to_record(self) -> dict:
        key = "hidden_label" if self.hidden else "label"
        return {"id": self.id, "text": self.text, key: self.label}


@dataclass(frozen=True)
class Dataset:
    examples: tuple[Example, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        examples = tuple(self.examples)
        object.__setattr__(self, "examples", examples)
        labels = tuple(self.labels) or tuple(dict.fromkeys(e.label for e in examples))
        object.__setattr__(self, "labels", labels)
        seen = set()
        allowed = set(labels)
        for e in examples:
            if e.id in seen:
                raise CorpusError(f"duplicate example id {e.id!r}")
            seen.add(e.id)
            if e.label not in allowed:
                raise CorpusError(f"example {e.id!r} has label {e.label!r} outside {labels}")

    def __len__(self):
        return len(self.examples)

    def __iter__(self):
        return iter(self.examples)

    def __getitem__(self, i):
        return self.examples[i]

    @property
    def texts(self) -> list[str]:
        return [e.text for e in self.examples]

    @property
    def y(self) -> list[str]:
        return [e.label for e in self.examples]

    @property
    def ids(self) -> list[str]:
        return [e.id for e in self.examples]

    def by_id(self) -> dict[str, Example]:
        return {e.id: e for e in self.examples}

    def counts(self) -> dict[str, int]:
        c = Counter(e.label for e in self.examples)
        return {label: c.get(label, 0) for label in self.labels}

    def subset(self, indices: Iterable[int], hidden: bool | None = None) -> "Dataset":
        picked = [self.examples[i] for i in indices]
        if hidden is not None:
            picked = [replace(e, hidden=hidden) for e in picked]
        return Dataset(tuple(picked), self.labels)

    def with_examples(self, examples: Iterable[Example]) -> "Dataset":
        return Dataset(tuple(examples), self.labels)


@dataclass(frozen=True)
class DistributionReport:
    total: int
    per_class: dict[str, tuple[int, float]] = field(default_factory=dict)

    def percents(self) -> dict[str, float]:
        return {k: pct for k, (_, pct) in self.per_class.items()}

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "per_class": {k: {"count": n, "percent": p} for k, (n, p) in self.per_class.items()},
        }


@dataclass(frozen=True)
class PetDataSplit:
    """The small labeled set ``labeled`` (T) and the unlabeled remainder (D)."""

    labeled: Dataset
    unlabeled: Dataset


def _check_text(text, where):
    if not isinstance(text, str) or not text.strip():
        raise CorpusError(f"{where}: empty or missing text")
    return text


def _row_to_example(row: dict, index: int, where: str) -> tuple[Example, bool]:
    if "label" in row and row["label"] not in (None, ""):
        label, hidden = row["label"], False
    elif row.get("hidden_label") not in (None, ""):
        label, hidden = row["hidden_label"], True
    else:
        raise CorpusError(f"{where}: missing label")
    text = _check_text(row.get("text"), where)
    raw_id = row.get("id")
    explicit = raw_id not in (None, "")
    ex_id = str(raw_id) if explicit else str(index)
    return Example(ex_id, text, str(label), hidden), explicit


def _iter_jsonl(lines):
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"line {lineno}: invalid JSON ({exc.msg})") from None
        if not isinstance(row, dict):
            raise CorpusError(f"line {lineno}: expected a JSON object")
        yield lineno, row


def _iter_tsv(lines):
    reader = csv.reader(lines, delimiter="\t", quoting=csv.QUOTE_NONE)
    header = next(reader, None)
    if header is None:
        return
    header = [h.strip() for h in header]
    if "text" not in header or not ({"label", "hidden_label"} & set(header)):
        raise CorpusError("line 1: TSV header must contain 'text' and 'label'")
    for lineno, cells in enumerate(reader, start=2):
        if not cells:
            continue
        if len(cells) != len(header):
            raise CorpusError(f"line {lineno}: expected {len(header)} columns, got {len(cells)}")
        yield lineno, dict(zip(header, cells))


def load_corpus(path, format: str | None = None, labels: Sequence[str] | None = None) -> Dataset:
    """Read a JSONL or TSV corpus.

    Ids missing from the file are assigned as the zero-based row index.
    ``format`` defaults to the file suffix.
    """
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".")).lower()
    if fmt not in ("jsonl", "tsv"):
        raise CorpusError(f"unsupported corpus format {fmt!r}")
    try:
        raw = path.read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CorpusError(f"{path}: not valid UTF-8 ({exc.reason})") from None
    lines = io.StringIO(raw, newline="")
    rows = _iter_jsonl(lines) if fmt == "jsonl" else _iter_tsv(lines)

    examples: list[Example] = []
    seen: dict[str, int] = {}
    for index, (lineno, row) in enumerate(rows):
        example, explicit = _row_to_example(row, index, f"line {lineno}")
        if example.id in seen:
            kind = "duplicate id" if explicit else "auto id collides with"
            raise CorpusError(f"line {lineno}: {kind} {example.id!r} (first seen line {seen[example.id]})")
        seen[example.id] = lineno
        examples.append(example)
    if not examples:
        raise CorpusError(f"{path}: empty corpus")
    if labels is not None:
        unknown = {e.label for e in examples} - set(labels)
        if unknown:
            raise CorpusError(f"labels {sorted(unknown)} not in declared label set")
    return Dataset(tuple(examples), tuple(labels or ()))


def dumps_jsonl(records: Iterable[dict]) -> str:
    return "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records)


def write_jsonl(records: Iterable[dict], path) -> None:
    Path(path).write_text(dumps_jsonl(records), encoding="utf-8", newline="\n")


def write_corpus(d: Dataset, path) -> None:
    write_jsonl((e.to_record() for e in d), path)


def merge_labels(d: Dataset, mapping: dict[str, str]) -> Dataset:
    """Relabel classes, e.g. ``{"CAG": "AG", "OAG": "AG"}`` for a binary task."""
    labels = tuple(dict.fromkeys(mapping.get(label, label) for label in d.labels))
    return Dataset(tuple(replace(e, label=mapping.get(e.label, e.label)) for e in d), labels)


def class_distribution(d: Dataset) -> DistributionReport:
    if len(d) == 0:
        raise CorpusError("class distribution of an empty dataset")
    total = len(d)
    per_class = {}
    for label, n in d.counts().items():
        pct = (Decimal(100 * n) / Decimal(total)).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP)
        per_class[label] = (n, float(pct))
    return DistributionReport(total, per_class)


def _check_fractions(fractions):
    fractions = tuple(float(f) for f in fractions)
    if len(fractions) < 2 or any(f <= 0 for f in fractions):
        raise CorpusError(f"split fractions must be positive, got {fractions}")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise CorpusError(f"split fractions must sum to 1, got {sum(fractions)}")
    return fractions


def _largest_remainder(total, fractions):
    exact = [total * f for f in fractions]
    sizes = [int(np.floor(x)) for x in exact]
    order = sorted(range(len(fractions)), key=lambda j: (-(exact[j] - sizes[j]), j))
    for j in order[: total - sum(sizes)]:
        sizes[j] += 1
    return sizes


def _allocate(class_sizes, fractions):
    """Per-class split sizes whose column sums hit the global largest-remainder targets."""
    targets = _largest_remainder(sum(class_sizes), fractions)
    exact = [[n * f for f in fractions] for n in class_sizes]
    alloc = [[int(np.floor(x)) for x in row] for row in exact]
    left = [n - sum(row) for n, row in zip(class_sizes, alloc)]
    need = [t - sum(col) for t, col in zip(targets, zip(*alloc))]
    cells = sorted(
        ((c, j) for c in range(len(class_sizes)) for j in range(len(fractions))),
        key=lambda cj: (-(exact[cj[0]][cj[1]] - alloc[cj[0]][cj[1]]), cj),
    )
    # first each cell with a fractional part takes at most one extra, then column
    # needs are filled anywhere, then whatever a class still holds goes to its best cells
    bumped = set()
    for stage in ("fractional", "needed", "rest"):
        for c, j in cells:
            while left[c] > 0 and (need[j] > 0 or stage == "rest"):
                if stage == "fractional" and ((c, j) in bumped or exact[c][j] == alloc[c][j]):
                    break
                alloc[c][j] += 1
                bumped.add((c, j))
                left[c] -= 1
                need[j] -= 1
                if stage != "needed":
                    break
    # tiny classes: every split still gets one example, taken from the largest cell
    for row in alloc:
        for j in range(len(row)):
            if row[j] == 0:
                donor = max(range(len(row)), key=lambda k: (row[k], -k))
                row[donor] -= 1
                row[j] += 1
    return alloc


def stratified_split(d: Dataset, fractions=(0.7, 0.15, 0.15), seed: int = 0) -> tuple[Dataset, ...]:
    """Seeded stratified split into ``len(fractions)`` disjoint datasets.

    Each class is shuffled with the seeded generator and sliced; split
    sizes follow the largest-remainder rule so overall sizes are exact
    and each class deviates from its proportion by at most one example.
    Examples keep their original relative order within every split.
    """
    fractions = _check_fractions(fractions)
    by_class = {label: [] for label in d.labels}
    for i, e in enumerate(d):
        by_class[e.label].append(i)
    present = [label for label in d.labels if by_class[label]]
    for label in present:
        if len(by_class[label]) < len(fractions):
            raise CorpusError(
                f"class {label!r} has {len(by_class[label])} examples, cannot populate {len(fractions)} splits"
            )
    alloc = _allocate([len(by_class[label]) for label in present], fractions)
    rng = np.random.default_rng(seed)
    parts: list[list[int]] = [[] for _ in fractions]
    for label, sizes in zip(present, alloc):
        idx = np.asarray(by_class[label])[rng.permutation(len(by_class[label]))]
        start = 0
        for j, size in enumerate(sizes):
            parts[j].extend(int(i) for i in idx[start : start + size])
            start += size
    return tuple(d.subset(sorted(p)) for p in parts)


def sample_training_set(d: Dataset, t_size: int, seed: int = 0) -> PetDataSplit:
    """Draw ``t_size / K`` examples per class without replacement.

    The rest of ``d`` becomes the unlabeled set, labels hidden.
    """
    k = len(d.labels)
    if t_size <= 0 or t_size % k:
        raise CorpusError(f"t_size {t_size} is not a positive multiple of the class count {k}")
    per_class = t_size // k
    by_class = {label: [] for label in d.labels}
    for i, e in enumerate(d):
        by_class[e.label].append(i)
    rng = np.random.default_rng(seed)
    chosen: list[int] = []
    for label in d.labels:
        pool = by_class[label]
        if len(pool) < per_class:
            raise CorpusError(f"class {label!r} has {len(pool)} examples, need {per_class}")
        chosen.extend(int(i) for i in rng.choice(pool, size=per_class, replace=False))
    chosen_set = set(chosen)
    rest = [i for i in range(len(d)) if i not in chosen_set]
    return PetDataSplit(d.subset(sorted(chosen), hidden=False), d.subset(rest, hidden=True))

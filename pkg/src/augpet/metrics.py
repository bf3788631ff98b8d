"""Classification metrics and mean/std aggregation over seeded runs."""

from __future__ import annotations

import csv
import io
import statistics
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

SUMMARY_METRICS = ("f1_macro", "f1_weighted", "accuracy")
COLUMN_TITLES = {"f1_macro": "F1 - macro", "f1_weighted": "F1 - weig.", "accuracy": "Acc"}


@dataclass(frozen=True)
class ClassScores:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    per_class: dict[str, ClassScores]
    f1_macro: float
    f1_weighted: float

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self.per_class)

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "f1_macro": self.f1_macro,
            "f1_weighted": self.f1_weighted,
            "per_class": {k: vars(v).copy() for k, v in self.per_class.items()},
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MetricsReport":
        per_class = {k: ClassScores(**v) for k, v in doc["per_class"].items()}
        return cls(doc["accuracy"], per_class, doc["f1_macro"], doc["f1_weighted"])


@dataclass(frozen=True)
class AggregateReport:
    mean: dict[str, float]
    std: dict[str, float]
    runs: int
    labels: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        return {"runs": self.runs, "labels": list(self.labels), "mean": self.mean, "std": self.std}

    @classmethod
    def from_dict(cls, doc: dict) -> "AggregateReport":
        return cls(doc["mean"], doc["std"], doc["runs"], tuple(doc.get("labels", ())))


def _safe_div(a, b):
    return a / b if b else 0.0


def confusion_matrix(truth: Sequence[str], pred: Sequence[str], labels: Sequence[str]) -> np.ndarray:
    """Rows are true classes, columns predicted classes, both in ``labels`` order."""
    if len(truth) != len(pred):
        raise ValueError(f"truth and pred lengths differ ({len(truth)} != {len(pred)})")
    if len(truth) == 0:
        raise ValueError("metrics need at least one example")
    col = {label: i for i, label in enumerate(labels)}
    unknown = (set(truth) | set(pred)) - set(col)
    if unknown:
        raise ValueError(f"labels {sorted(map(str, unknown))} not in {list(labels)}")
    cm = np.zeros((len(labels), len(labels)), dtype=np.int64)
    np.add.at(cm, ([col[t] for t in truth], [col[p] for p in pred]), 1)
    return cm


def classification_metrics(truth: Sequence[str], pred: Sequence[str], labels: Sequence[str]) -> MetricsReport:
    """Accuracy plus per-class, macro and support-weighted F1.

    Undefined ratios (zero denominators) count as 0. The macro average runs
    over every class in ``labels``, observed or not.
    """
    cm = confusion_matrix(truth, pred, labels)
    n = int(cm.sum())
    per_class = {}
    for k, label in enumerate(labels):
        tp = int(cm[k, k])
        precision = _safe_div(tp, int(cm[:, k].sum()))
        recall = _safe_div(tp, int(cm[k, :].sum()))
        f1 = _safe_div(2 * precision * recall, precision + recall)
        per_class[label] = ClassScores(precision, recall, f1, int(cm[k, :].sum()))
    f1s = [c.f1 for c in per_class.values()]
    return MetricsReport(
        accuracy=int(np.trace(cm)) / n,
        per_class=per_class,
        f1_macro=sum(f1s) / len(f1s),
        f1_weighted=sum(c.f1 * c.support for c in per_class.values()) / n,
    )


def _report_values(r: MetricsReport) -> dict[str, float]:
    vals = {"accuracy": r.accuracy, "f1_macro": r.f1_macro, "f1_weighted": r.f1_weighted}
    for label, c in r.per_class.items():
        vals[f"f1[{label}]"] = c.f1
    return vals


def aggregate_runs(reports: Sequence[MetricsReport]) -> AggregateReport:
    """Mean and sample standard deviation (n - 1; zero for a single run) of every metric."""
    if not reports:
        raise ValueError("aggregate_runs needs at least one report")
    labels = reports[0].labels
    for r in reports[1:]:
        if r.labels != labels:
            raise ValueError(f"label sets differ across runs: {labels} vs {r.labels}")
    values = [_report_values(r) for r in reports]
    mean, std = {}, {}
    for key in values[0]:
        xs = [v[key] for v in values]
        # exact rational arithmetic: equal runs give std 0.0, not rounding noise
        mean[key] = float(statistics.mean(xs))
        std[key] = float(statistics.stdev(xs)) if len(xs) > 1 else 0.0
    return AggregateReport(mean, std, len(reports), labels)


def _cell(agg: AggregateReport, key: str, digits: int) -> str:
    if key not in agg.mean:
        return "--"
    return f"{agg.mean[key]:.{digits}f} ±{agg.std[key]:.{digits}f}"


def render_table(rows: dict[str, AggregateReport], metrics=SUMMARY_METRICS, digits: int = 3) -> str:
    """Aligned text table: one row per method, ``mean ±std`` per metric column."""
    header = ["Model"] + [COLUMN_TITLES.get(m, m) for m in metrics]
    body = [[name] + [_cell(agg, m, digits) for m in metrics] for name, agg in rows.items()]
    widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in [header] + body]
    return "\n".join(lines) + "\n"


def render_csv(rows: dict[str, AggregateReport], metrics=SUMMARY_METRICS) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["model", "runs"] + [f"{m}_{s}" for m in metrics for s in ("mean", "std")])
    for name, agg in rows.items():
        cells = []
        for m in metrics:
            cells += [repr(agg.mean.get(m, float("nan"))), repr(agg.std.get(m, float("nan")))]
        writer.writerow([name, agg.runs] + cells)
    return buf.getvalue()

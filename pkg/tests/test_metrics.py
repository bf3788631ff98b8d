import math

import pytest

from augpet.metrics import (
    AggregateReport,
    MetricsReport,
    aggregate_runs,
    classification_metrics,
    confusion_matrix,
    render_csv,
    render_table,
)


def test_hand_worked_example():
    r = classification_metrics(list("AABB"), list("ABBB"), ["A", "B"])
    assert r.accuracy == 0.75
    assert r.per_class["A"].f1 == pytest.approx(2 / 3, abs=1e-12)
    assert r.per_class["B"].f1 == pytest.approx(0.8, abs=1e-12)
    assert r.f1_macro == pytest.approx(0.7333333333333333, abs=1e-12)
    assert r.f1_weighted == pytest.approx(0.7333333333333333, abs=1e-12)


def test_perfect_and_zero():
    r = classification_metrics(list("ABAB"), list("ABAB"), ["A", "B"])
    assert r.accuracy == r.f1_macro == r.f1_weighted == 1.0
    r = classification_metrics(list("AAA"), list("BBB"), ["A", "B"])
    assert r.accuracy == 0 and r.f1_macro == 0


def test_unobserved_class_counts_in_macro():
    r = classification_metrics(list("AB"), list("AB"), ["A", "B", "C"])
    assert r.f1_macro == pytest.approx(2 / 3)
    assert r.per_class["C"].support == 0


def test_errors():
    with pytest.raises(ValueError):
        classification_metrics(["A"], ["A", "B"], ["A", "B"])
    with pytest.raises(ValueError):
        classification_metrics(["A"], ["Z"], ["A", "B"])
    assert confusion_matrix(list("AB"), list("BB"), ["A", "B"]).tolist() == [[0, 1], [0, 1]]


def _report(acc):
    return MetricsReport(acc, {}, acc, acc)


def test_aggregate():
    agg = aggregate_runs([_report(0.8)] * 3)
    assert agg.mean["accuracy"] == pytest.approx(0.8) and agg.std["accuracy"] == 0
    agg = aggregate_runs([_report(0.7), _report(0.9)])
    assert agg.mean["accuracy"] == pytest.approx(0.8)
    assert agg.std["accuracy"] == pytest.approx(math.sqrt(0.02), abs=1e-12)
    assert aggregate_runs([_report(0.5)]).std["accuracy"] == 0
    a = classification_metrics(["A"], ["A"], ["A", "B"])
    b = classification_metrics(["A"], ["A"], ["A", "C"])
    with pytest.raises(ValueError):
        aggregate_runs([a, b])


def test_render():
    agg = aggregate_runs([_report(0.45), _report(0.56)])
    table = render_table({"BERT": agg})
    assert "0.505 ±0.078" in table.splitlines()[1]
    csv_text = render_csv({"BERT": agg})
    assert csv_text.startswith("model,runs,") and "BERT,2," in csv_text
    assert AggregateReport.from_dict(agg.to_dict()) == agg
    r = classification_metrics(list("AABB"), list("ABBB"), ["A", "B"])
    assert MetricsReport.from_dict(r.to_dict()) == r

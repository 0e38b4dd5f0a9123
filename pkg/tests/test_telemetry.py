import csv
import io
import json

import pytest

from ddkit.telemetry import (
    CSV_FIELDS,
    Category,
    QueryClassifier,
    RunStats,
    TelemetrySink,
    classify_query,
)

F = frozenset


@pytest.mark.parametrize(
    "deleted, kept, history, expected",
    [
        (3, 1, set(), Category.COMPLEMENT),
        (2, 2, set(), Category.OTHER),
        (2, 2, {F({0, 1})}, Category.REVISIT),
        (3, 1, {F({0, 1, 2})}, Category.COMPLEMENT),
    ],
)
def test_classify_query(deleted, kept, history, expected):
    ids = F(range(deleted))
    assert classify_query(history, ids, deleted, kept) is expected


def test_revisit_needs_an_intervening_success():
    c = QueryClassifier()
    assert c.observe(0, F({0}), F({1, 2}), False) is Category.OTHER
    assert c.observe(0, F({0}), F({1, 2}), False) is Category.OTHER
    assert c.observe(0, F({1}), F({0, 2}), True) is Category.OTHER
    assert c.observe(0, F({0}), F({2}), False) is Category.REVISIT


def test_new_round_clears_history():
    c = QueryClassifier()
    c.observe(0, F({0}), F({1, 2}), False)
    c.observe(0, F({1}), F({0, 2}), True)
    assert c.observe(1, F({0}), F({2}), False) is Category.OTHER


def test_kept_subset_of_complement_query_counts_as_tried():
    c = QueryClassifier()
    assert c.observe(0, F({0, 1, 2}), F({3}), False) is Category.COMPLEMENT
    c.observe(0, F({0}), F({1, 2, 3}), True)
    assert c.observe(0, F({3}), F({1, 2}), False) is Category.REVISIT


def make_sink():
    sink = TelemetrySink("x", "in.txt")
    sink.record("x", 0, F({0, 1, 2}), F({3}), "fails", False, 0.5)
    sink.record("x", 0, F({0}), F({1, 2, 3}), "holds", True, 0.25)
    sink.record("x", 1, F({1}), F({2, 3}), "timeout", False, 2.0)
    return sink


def test_stats_and_merge():
    stats = make_sink().stats()
    assert stats.total == 3 and stats.successes == 1
    assert stats[Category.COMPLEMENT].total == 1
    assert stats["Other"].success_rate == 0.5
    merged = stats.merge(stats)
    assert merged.total == 6 and merged[Category.OTHER].successes == 2
    assert RunStats().total == 0


def test_json_round_trip_without_durations(tmp_path):
    sink = make_sink()
    path = tmp_path / "t.json"
    sink.write_json(path, include_durations=False)
    data = json.loads(path.read_text())
    assert data["algorithm"] == "x" and data["input"] == "in.txt"
    assert [r["deleted_ids"] for r in data["records"]] == [[0, 1, 2], [0], [1]]
    assert all("duration" not in r for r in data["records"])
    assert data["stats"]["categories"]["Complement"]["total"] == 1


def test_csv_columns():
    rows = list(csv.DictReader(io.StringIO(make_sink().to_csv())))
    assert list(rows[0]) == CSV_FIELDS
    assert rows[0]["deleted_ids"] == "0 1 2"
    assert rows[0]["category"] == "Complement"
    assert rows[2]["outcome"] == "timeout"


def test_iteration_resets_classifier():
    sink = TelemetrySink()
    sink.record("x", 0, F({0}), F({1, 2}), "fails", False, 0)
    sink.record("x", 0, F({1}), F({0, 2}), "holds", False, 0)
    sink.start_iteration(1)
    rec = sink.record("x", 0, F({0}), F({2}), "fails", False, 0)
    assert rec.iteration == 1 and rec.category is Category.OTHER

"""Tests for report rendering."""

import csv
import io
import json

import numpy as np
import pytest

from itemfair.analysis import ScoreMatrix, correlation_matrix
from itemfair.bounds import all_bounds
from itemfair.evaluator import FairnessEvaluator
from itemfair.measures import ENT, JAIN
from itemfair.models import Direction, ItemCatalog, TopKRun
from itemfair.oracle import EnumerationSpec, enumerate_all_extremes
from itemfair.report import ReportWriter


@pytest.fixture
def writer():
    return ReportWriter()


@pytest.fixture
def report():
    run = TopKRun.from_user_lists({"u1": ["i1", "i2"], "u2": ["i1", "i3"]})
    return FairnessEvaluator().evaluate(run, ItemCatalog.from_range(5), source="sys")


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestReportWriter:
    """Tests for ReportWriter."""

    def test_json_marks_undefined(self, writer, report):
        """Test undefined values are null with a defined flag."""
        payload = json.loads(writer.report(report, "json"))
        ent = payload["measures"][ENT]
        assert ent["value"] is None
        assert ent["defined"] is False
        assert payload["metadata"]["source"] == "sys"

    def test_csv_report(self, writer, report):
        """Test one CSV row per measure."""
        rows = read_csv(writer.report(report, "csv"))
        by_measure = {row["measure"]: row for row in rows}
        assert by_measure[ENT]["value"] == ""
        assert by_measure[ENT]["defined"] == "false"
        assert by_measure[JAIN]["direction"] == "higher_is_fairer"
        assert float(by_measure[JAIN]["most_unfair_at_k"]) == pytest.approx(0.4)

    def test_bounds_csv(self, writer):
        """Test the bounds table."""
        rows = read_csv(writer.bounds(all_bounds(3, 2, 3)))
        gini_w = next(r for r in rows if r["measure"] == "gini_w_ori")
        assert gini_w["most_fair_at_k"] == ""
        assert gini_w["most_fair_applicable"] == "false"

    def test_score_matrix_csv(self, writer):
        """Test empty cells for undefined scores."""
        scores = ScoreMatrix(
            measures=("jain_ori", "ent_ori"),
            systems=("a", "b"),
            values=np.array([[0.5, 0.6], [np.nan, 0.9]]),
            directions={"jain_ori": Direction.HIGHER_IS_FAIRER},
        )
        text = writer.score_matrix(scores)
        assert text.splitlines()[0] == "measure,direction,a,b"
        assert text.splitlines()[2] == "ent_ori,higher_is_fairer,,0.9"

    def test_score_matrix_json(self, writer):
        """Test null for undefined scores in JSON."""
        scores = ScoreMatrix(measures=("x",), systems=("a", "b"), values=np.array([[np.nan, 1.0]]))
        payload = json.loads(writer.score_matrix(scores, "json"))
        assert payload["measures"]["x"]["values"] == [None, 1.0]

    def test_correlation_csv(self, writer):
        """Test the correlation table lists every ordered pair."""
        scores = ScoreMatrix(
            measures=("a", "b"),
            systems=("s1", "s2", "s3"),
            values=np.array([[1.0, 2.0, 3.0], [3.0, 1.0, 2.0]]),
        )
        rows = read_csv(writer.correlation(correlation_matrix(scores)))
        assert len(rows) == 4
        assert rows[0]["tau"] == "1.0"

    def test_extremes_json(self, writer):
        """Test witnesses are serialised."""
        results = enumerate_all_extremes(EnumerationSpec(k=1, m=2, n=2), [JAIN])
        payload = json.loads(writer.extremes(list(results.values()), "json"))
        assert payload[0]["argmin_run"] == {"u1:1": ["i1"], "u2:1": ["i1"]}

    def test_to_file(self, writer, tmp_path):
        """Test writing creates parent directories."""
        path = tmp_path / "nested" / "out.csv"
        writer.to_file("a,b\n", path)
        assert path.read_text() == "a,b\n"

    def test_to_stdout(self, writer, capsys):
        """Test stdout when no path is given."""
        writer.to_file("hello\n", None)
        assert capsys.readouterr().out == "hello\n"

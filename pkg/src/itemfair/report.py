"""Evaluation reports and their JSON/CSV renderings.

Undefined values are written as JSON ``null`` and as empty CSV cells, always
next to an explicit ``defined`` flag; no measure is silently omitted.
"""

import csv
import io
import json
import logging
import math
from pathlib import Path
from typing import TYPE_CHECKING, Any, Iterable, Literal, Optional, Sequence, Union

from pydantic import BaseModel, Field

from .analysis import CorrelationMatrix, ScoreMatrix
from .models import BoundsReport, Direction, MeasureResult

if TYPE_CHECKING:
    from .experiments import EndpointRow, SweepPoint
    from .oracle import ExtremeResult

logger = logging.getLogger(__name__)

OutputFormat = Literal["json", "csv"]


class RunMetadata(BaseModel):
    """Shape of the evaluated run and the parameters used."""

    source: Optional[str] = Field(default=None, description="Run file or system name")
    k: int
    m: int
    n: int
    rounds: int = 1
    gamma: float
    alpha: float
    beta: float
    log_base: float = Field(..., description="Resolved entropy log base")
    n_recommended: int = Field(..., description="|R|, items recommended at least once")


class MeasureEntry(BaseModel):
    """One original measure with its bounds and corrected counterpart."""

    measure: str
    value: Optional[float] = None
    defined: bool = True
    direction: Direction
    note: Optional[str] = None
    most_unfair_at_k: Optional[float] = None
    most_fair_at_k: Optional[float] = None
    bounds_notes: tuple[str, ...] = ()
    corrected_measure: Optional[str] = None
    corrected_value: Optional[float] = None
    corrected_defined: Optional[bool] = None
    corrected_note: Optional[str] = None


class Report(BaseModel):
    """Everything computed for one run."""

    metadata: RunMetadata
    measures: dict[str, MeasureEntry]
    relevance: Optional[dict[str, float]] = None

    def scores(self) -> dict[str, Optional[float]]:
        """Flat measure id -> value map (original, corrected, relevance)."""
        flat: dict[str, Optional[float]] = {}
        for measure, entry in self.measures.items():
            flat[measure] = entry.value
        for entry in self.measures.values():
            if entry.corrected_measure is not None and entry.corrected_measure not in flat:
                flat[entry.corrected_measure] = entry.corrected_value
        for measure, value in (self.relevance or {}).items():
            flat[measure] = value
        return flat

    def directions(self) -> dict[str, Direction]:
        """Direction of every id in :meth:`scores`; relevance counts as higher-is-better."""
        out: dict[str, Direction] = {}
        for measure, entry in self.measures.items():
            out[measure] = entry.direction
            if entry.corrected_measure is not None:
                out[entry.corrected_measure] = entry.direction
        for measure in self.relevance or {}:
            out[measure] = Direction.HIGHER_IS_FAIRER
        return out


def result_value(result: MeasureResult) -> Optional[float]:
    if not result.defined or math.isnan(result.value):
        return None
    return result.value


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "" if math.isnan(value) else repr(value)
    if isinstance(value, Direction):
        return value.value
    return str(value)


def _csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buffer.getvalue()


class ReportWriter:
    """Render reports and result tables as JSON or CSV text."""

    REPORT_COLUMNS = (
        "measure", "value", "defined", "direction", "most_unfair_at_k", "most_fair_at_k",
        "corrected_measure", "corrected_value", "corrected_defined", "note",
    )

    def __init__(self, indent: int = 2):
        """Initialize the writer.

        Args:
            indent: JSON indentation
        """
        self.indent = indent

    def _json(self, payload: Any) -> str:
        return json.dumps(payload, indent=self.indent, allow_nan=False) + "\n"

    def report(self, report: Report, fmt: OutputFormat = "json") -> str:
        if fmt == "json":
            return self._json(report.model_dump(mode="json"))
        rows = [
            (e.measure, e.value, e.defined, e.direction, e.most_unfair_at_k, e.most_fair_at_k,
             e.corrected_measure, e.corrected_value, e.corrected_defined, e.note or e.corrected_note)
            for e in report.measures.values()
        ]
        rows.extend(
            (measure, value, True, Direction.HIGHER_IS_FAIRER, None, None, None, None, None, None)
            for measure, value in (report.relevance or {}).items()
        )
        return _csv(self.REPORT_COLUMNS, rows)

    def bounds(self, reports: Sequence[BoundsReport], fmt: OutputFormat = "csv") -> str:
        if fmt == "json":
            return self._json([r.model_dump(mode="json") for r in reports])
        return _csv(
            ("measure", "direction", "k", "m", "n", "most_unfair_at_k", "most_fair_at_k",
             "most_fair_applicable", "notes"),
            ((r.measure, r.direction, r.k, r.m, r.n, r.most_unfair_at_k, r.most_fair_at_k,
              r.most_fair_applicable, "; ".join(r.notes)) for r in reports),
        )

    def score_matrix(self, scores: ScoreMatrix, fmt: OutputFormat = "csv") -> str:
        """One row per measure with a direction column, one column per system."""
        if fmt == "json":
            return self._json({
                "systems": list(scores.systems),
                "measures": {
                    measure: {
                        "direction": scores.direction_of(measure).value,
                        "values": [None if math.isnan(v) else float(v) for v in scores.row(measure)],
                    }
                    for measure in scores.measures
                },
            })
        return _csv(
            ("measure", "direction", *scores.systems),
            ((measure, scores.direction_of(measure), *(float(v) for v in scores.row(measure)))
             for measure in scores.measures),
        )

    def correlation(self, matrix: CorrelationMatrix, fmt: OutputFormat = "csv") -> str:
        cells = list(matrix.cells())
        if fmt == "json":
            return self._json({"alpha": matrix.alpha, "cells": [c.model_dump() for c in cells]})
        return _csv(
            ("measure_a", "measure_b", "tau", "pvalue", "significant_bh", "significant_bonferroni",
             "significant_holm"),
            ((c.measure_a, c.measure_b, c.tau, c.pvalue, c.significant, c.bonferroni, c.holm)
             for c in cells),
        )

    def sweep(self, points: Sequence["SweepPoint"], fmt: OutputFormat = "csv") -> str:
        if fmt == "json":
            return self._json([p.model_dump(mode="json") for p in points])
        measures = list(points[0].scores) if points else []
        return _csv(
            ("step", "fraction", *measures),
            ((p.step, p.fraction, *(p.scores.get(m) for m in measures)) for p in points),
        )

    def endpoints(self, rows: Sequence["EndpointRow"], fmt: OutputFormat = "csv") -> str:
        if fmt == "json":
            return self._json([r.model_dump(mode="json") for r in rows])
        measures = list(rows[0].scores) if rows else []
        return _csv(
            ("generator", "mode", "k", "m", "n", *measures),
            ((r.generator, r.mode, r.k, r.m, r.n, *(r.scores.get(m) for m in measures))
             for r in rows),
        )

    def extremes(self, results: Sequence["ExtremeResult"], fmt: OutputFormat = "csv") -> str:
        if fmt == "json":
            return self._json([
                {
                    "measure": r.measure,
                    "min_value": r.min_value,
                    "max_value": r.max_value,
                    "argmin_run": _run_payload(r.argmin_run),
                    "argmax_run": _run_payload(r.argmax_run),
                    "evaluated": r.evaluated,
                    "undefined": r.undefined,
                }
                for r in results
            ])
        return _csv(
            ("measure", "min_value", "max_value", "evaluated", "undefined"),
            ((r.measure, r.min_value, r.max_value, r.evaluated, r.undefined) for r in results),
        )

    def to_file(self, content: str, output_path: Optional[Union[str, Path]]) -> None:
        """Write rendered content to a file, or to stdout when no path is given."""
        if output_path is None:
            print(content, end="")
            return
        output_path = Path(output_path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        with open(output_path, "w", encoding="utf-8") as f:
            f.write(content)
        logger.info(f"Output written to {output_path}")


def _run_payload(run: Any) -> dict[str, list[str]]:
    return {f"{user}:{rnd}": list(items) for user, rnd, items in run.iter_lists()}

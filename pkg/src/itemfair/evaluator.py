"""Evaluator - orchestrates fairness and relevance evaluation of top-k runs.

This module provides the facade that turns runs (in memory or on disk) into
reports holding every original measure, its closed-form bounds and its
corrected version, plus relevance when judgments are available.
"""

import logging
from pathlib import Path
from typing import Callable, Mapping, Optional, Union

import numpy as np

from .analysis import ScoreMatrix
from .bounds import (
    ENT_DEF,
    ENT_OUR,
    FSAT_OUR,
    GINI_OUR,
    GINI_W_OUR,
    JAIN_OUR,
    QF_OUR,
    all_bounds,
    ent_def,
    ent_our,
    fsat_our,
    gini_our,
    giniw_our,
    jain_our,
    qf_our,
)
from .config import EvalParams
from .errors import NormalizationDegenerate, RunValidationError
from .exposure import exposure_from_indices, user_item_exposure_from_indices
from .measures import (
    AID,
    DIRECTIONS,
    ENT,
    FSAT,
    GINI,
    GINI_W,
    IID,
    JAIN,
    QF,
    VOCD,
    aid_ori,
    ent_ori,
    fsat_ori,
    gini_ori,
    gini_w_ori,
    iid_ori,
    jain_ori,
    qf_ori,
    vocd_or_undefined,
)
from .models import (
    BoundsReport,
    Direction,
    ExaminationFunction,
    ExposureTable,
    ItemCatalog,
    MeasureResult,
    RelevanceJudgments,
    SimilarityProvider,
    TopKRun,
)
from .parser import RunParser
from .relevance import relevance_scores
from .report import MeasureEntry, Report, RunMetadata, result_value

logger = logging.getLogger(__name__)

# original measure -> corrected measure reported next to it
CORRECTED_OF: dict[str, str] = {
    JAIN: JAIN_OUR,
    QF: QF_OUR,
    ENT: ENT_OUR,
    GINI: GINI_OUR,
    GINI_W: GINI_W_OUR,
    FSAT: FSAT_OUR,
}

REPORT_ORDER = (JAIN, QF, ENT, ENT_DEF, GINI, GINI_W, FSAT, VOCD, IID, AID)


class FairnessEvaluator:
    """Evaluate item fairness (and optionally relevance) of top-k runs.

    Example:
        >>> evaluator = FairnessEvaluator()
        >>> report = evaluator.evaluate(run, catalog)
        >>> report.measures["jain_ori"].value
    """

    def __init__(
        self,
        params: Optional[EvalParams] = None,
        similarity: Optional[SimilarityProvider] = None,
        strict: bool = False,
    ):
        """Initialize the evaluator.

        Args:
            params: Evaluation parameters (defaults: gamma 0.8, alpha 2, beta 0, base n)
            similarity: VoCD similarity; all recommended pairs are similar by default
            strict: Raise NormalizationDegenerate instead of reporting undefined corrections
        """
        self.params = params or EvalParams()
        self.strict = strict
        self.similarity = similarity or SimilarityProvider(alpha=self.params.alpha, beta=self.params.beta)
        self.parser = RunParser()

    def _check_k(self, run: TopKRun, source: str) -> None:
        if self.params.k is not None and run.k != self.params.k:
            raise RunValidationError(f"run has cutoff k={run.k}, expected k={self.params.k}", source)

    def original_measures(
        self,
        uniform: ExposureTable,
        weighted: ExposureTable,
        indices: np.ndarray,
        run: TopKRun,
        catalog: ItemCatalog,
    ) -> dict[str, MeasureResult]:
        """Every original measure plus the recommended-only entropy."""
        uie = user_item_exposure_from_indices(indices, run.users, catalog, self.params.gamma)
        results = {
            JAIN: jain_ori(uniform),
            QF: qf_ori(uniform),
            ENT: ent_ori(uniform, self.params.log_base),
            ENT_DEF: MeasureResult(
                measure=ENT_DEF,
                value=ent_def(uniform, self.params.log_base),
                direction=Direction.HIGHER_IS_FAIRER,
            ),
            GINI: gini_ori(uniform),
            GINI_W: gini_w_ori(weighted),
            FSAT: fsat_ori(uniform),
            VOCD: vocd_or_undefined(uniform, self.similarity),
            IID: iid_ori(uie),
            AID: aid_ori(uie),
        }
        return {measure: results[measure] for measure in REPORT_ORDER}

    def corrected_measures(
        self,
        originals: Mapping[str, MeasureResult],
        uniform: ExposureTable,
    ) -> dict[str, MeasureResult]:
        """Corrected measures; degenerate normalisations become undefined results."""
        k, m, n = uniform.k, uniform.effective_users, uniform.n
        base = self.params.log_base
        compute: dict[str, Callable[[], float]] = {
            JAIN_OUR: lambda: jain_our(originals[JAIN].value, k, m, n),
            QF_OUR: lambda: qf_our(uniform.n_recommended, k, m, n),
            ENT_OUR: lambda: ent_our(originals[ENT_DEF].value, k, m, n, base),
            GINI_OUR: lambda: gini_our(originals[GINI].value, k, m, n),
            GINI_W_OUR: lambda: giniw_our(originals[GINI_W].value, k, m, n),
            FSAT_OUR: lambda: fsat_our(originals[FSAT].value, k, n),
        }
        corrected: dict[str, MeasureResult] = {}
        for original, measure in CORRECTED_OF.items():
            direction = DIRECTIONS[original]
            try:
                value = compute[measure]()
            except NormalizationDegenerate as e:
                if self.strict:
                    raise
                logger.warning(f"{measure} undefined: {e}")
                corrected[measure] = MeasureResult.undefined(measure, direction, str(e))
                continue
            corrected[measure] = MeasureResult(measure=measure, value=value, direction=direction)
        return corrected

    def evaluate(
        self,
        run: TopKRun,
        catalog: ItemCatalog,
        qrels: Optional[RelevanceJudgments] = None,
        source: str = "<memory>",
    ) -> Report:
        """Evaluate one run.

        Args:
            run: Validated top-k run
            catalog: Item universe, including never-recommended items
            qrels: Optional binary relevance judgments
            source: Name used in messages and report metadata

        Returns:
            Report with originals, bounds, corrections and relevance

        Raises:
            RunValidationError: If the run does not fit the catalog or the expected k,
                or the judgments name users or items outside the run and catalog
        """
        self._check_k(run, source)
        try:
            indices = run.index_matrix(catalog)
        except RunValidationError as e:
            raise RunValidationError(e.message, source) from e
        if qrels is not None:
            qrels.check_ids(run.users, catalog)

        uniform = exposure_from_indices(indices, catalog, ExaminationFunction.uniform())
        weighted = exposure_from_indices(indices, catalog, ExaminationFunction.dcg())
        originals = self.original_measures(uniform, weighted, indices, run, catalog)
        corrected = self.corrected_measures(originals, uniform)
        bounds = {
            b.measure: b
            for b in all_bounds(run.k, uniform.effective_users, catalog.n, self.params.beta, self.params.log_base)
        }
        bounds[ENT_DEF] = bounds[ENT]

        entries: dict[str, MeasureEntry] = {}
        for measure, result in originals.items():
            entries[measure] = self._entry(result, bounds.get(measure), corrected.get(CORRECTED_OF.get(measure, "")))

        relevance = None
        if qrels is not None and self.params.relevance:
            if run.rounds > 1:
                logger.warning(f"{source}: relevance skipped for a {run.rounds}-round run")
            else:
                relevance = {m: s.mean for m, s in relevance_scores(run, qrels).items()}

        metadata = RunMetadata(
            source=source,
            k=run.k,
            m=run.m,
            n=catalog.n,
            rounds=run.rounds,
            gamma=self.params.gamma,
            alpha=self.similarity.alpha,
            beta=self.similarity.beta,
            log_base=float(self.params.log_base or catalog.n),
            n_recommended=uniform.n_recommended,
        )
        logger.info(
            f"Evaluated {source}: k={run.k}, m={run.m}, W={run.rounds}, n={catalog.n}, "
            f"|R|={uniform.n_recommended}"
        )
        return Report(metadata=metadata, measures=entries, relevance=relevance)

    @staticmethod
    def _entry(
        result: MeasureResult,
        bounds: Optional[BoundsReport],
        corrected: Optional[MeasureResult],
    ) -> MeasureEntry:
        entry = MeasureEntry(
            measure=result.measure,
            value=result_value(result),
            defined=result.defined,
            direction=result.direction,
            note=result.note,
        )
        if bounds is not None:
            entry.most_unfair_at_k = bounds.most_unfair_at_k
            entry.most_fair_at_k = bounds.most_fair_at_k
            entry.bounds_notes = bounds.notes
        if corrected is not None:
            entry.corrected_measure = corrected.measure
            entry.corrected_value = result_value(corrected)
            entry.corrected_defined = corrected.defined
            entry.corrected_note = corrected.note
        return entry

    def evaluate_many(
        self,
        runs: Mapping[str, TopKRun],
        catalog: ItemCatalog,
        qrels: Optional[RelevanceJudgments] = None,
    ) -> ScoreMatrix:
        """Evaluate several systems into a measure x system score matrix."""
        reports = {name: self.evaluate(run, catalog, qrels, source=name) for name, run in runs.items()}
        return self.score_matrix(reports)

    @staticmethod
    def score_matrix(reports: Mapping[str, Report]) -> ScoreMatrix:
        """Collect report scores into a ScoreMatrix; missing or undefined cells are nan."""
        if not reports:
            raise ValueError("no reports to collect")
        measures: list[str] = []
        directions: dict[str, Direction] = {}
        for report in reports.values():
            for measure in report.scores():
                if measure not in directions:
                    measures.append(measure)
            directions.update(report.directions())
        values = np.full((len(measures), len(reports)), np.nan)
        for col, report in enumerate(reports.values()):
            scores = report.scores()
            for row, measure in enumerate(measures):
                value = scores.get(measure)
                if value is not None:
                    values[row, col] = value
        return ScoreMatrix(
            measures=tuple(measures),
            systems=tuple(reports),
            values=values,
            directions={m: directions[m] for m in measures},
        )

    def evaluate_files(
        self,
        run_files: Mapping[str, Union[str, Path]],
        catalog_file: Union[str, Path],
        qrels_file: Optional[Union[str, Path]] = None,
    ) -> dict[str, Report]:
        """Parse and evaluate run files against a shared catalog.

        Args:
            run_files: System name -> run file path
            catalog_file: One item id per line
            qrels_file: Optional judgments file

        Raises:
            FileNotFoundError: If a file does not exist
            RunValidationError: If a file is malformed
        """
        catalog = self.parser.parse_catalog(catalog_file)
        qrels = self.parser.parse_qrels(qrels_file) if qrels_file else None
        reports = {}
        for name, path in run_files.items():
            run = self.parser.parse_run(path, k=self.params.k, catalog=catalog)
            reports[name] = self.evaluate(run, catalog, qrels, source=str(path))
        return reports

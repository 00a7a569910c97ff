"""Brute-force enumeration of every top-k run for tiny shapes.

Each (user, round) list is an ordered k-selection of the n items, so the
search space has P(n, k)^(mW) runs, P being the falling factorial. Runs are
enumerated in lexicographic order of their selection indices and kept as
index arrays; only the witnesses are materialised as TopKRun objects.
"""

import itertools
import logging
import math
from typing import Iterable, Iterator, Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .bounds import ENT_DEF, ent_def
from .errors import NoSimilarPairs, SpaceTooLarge
from .exposure import exposure_from_indices, user_item_exposure_from_indices
from .measures import (
    AID,
    ENT,
    FSAT,
    GINI,
    GINI_W,
    IID,
    JAIN,
    QF,
    VOCD,
    aid_ori,
    coverage_disparity,
    ent_ori,
    fsat_ori,
    gini_ori,
    gini_w_ori,
    iid_ori,
    jain_ori,
    qf_ori,
    vocd_ori,
)
from .models import (
    ExaminationFunction,
    ItemCatalog,
    MeasureResult,
    SimilarityProvider,
    TopKRun,
    UserSet,
)

logger = logging.getLogger(__name__)

DEFAULT_CAP = 10**7

ORACLE_MEASURES = (JAIN, QF, ENT, ENT_DEF, GINI, GINI_W, FSAT, VOCD, IID, AID)

_UNIFORM_MEASURES = {JAIN, QF, ENT, ENT_DEF, GINI, FSAT, VOCD}


class EnumerationSpec(BaseModel):
    """Shape and measure parameters of one brute-force search."""

    model_config = ConfigDict(frozen=True)

    k: int = Field(..., gt=0, description="Cutoff")
    m: int = Field(..., gt=0, description="Number of users")
    n: int = Field(..., gt=0, description="Number of items")
    rounds: int = Field(default=1, gt=0, description="Number of rounds W")
    measure: str = Field(default=JAIN, description="Measure id to extremise")
    gamma: float = Field(default=0.8, gt=0.0, lt=1.0, description="RBP patience for II-D/AI-D")
    beta: float = Field(default=0.0, ge=0.0, lt=1.0, description="VoCD disparity tolerance")
    log_base: Optional[float] = Field(default=None, description="Entropy log base; None means n")
    similar_pairs: Optional[frozenset[tuple[str, str]]] = Field(
        default=None, description="Explicit VoCD similar pairs; None means all pairs similar"
    )
    cap: int = Field(default=DEFAULT_CAP, gt=0, description="Maximum number of runs enumerated")

    @model_validator(mode="after")
    def _check_shape(self) -> "EnumerationSpec":
        if self.k > self.n:
            raise ValueError(f"cutoff k={self.k} exceeds the number of items n={self.n}")
        if self.measure not in ORACLE_MEASURES:
            raise ValueError(f"unknown measure {self.measure!r}; choose from {ORACLE_MEASURES}")
        return self

    @property
    def selections(self) -> int:
        """P(n, k): ordered k-selections available to one list."""
        return math.perm(self.n, self.k)

    @property
    def space_size(self) -> int:
        return self.selections ** (self.m * self.rounds)

    def similarity(self) -> SimilarityProvider:
        if self.similar_pairs is None:
            return SimilarityProvider(beta=self.beta)
        return SimilarityProvider.from_pairs(sorted(self.similar_pairs), beta=self.beta)


class ExtremeResult(BaseModel):
    """Exact min and max of one measure with witness runs."""

    model_config = ConfigDict(frozen=True)

    measure: str
    min_value: float
    max_value: float
    argmin_run: TopKRun
    argmax_run: TopKRun
    evaluated: int = Field(..., ge=0, description="Runs enumerated")
    undefined: int = Field(default=0, ge=0, description="Runs on which the measure was undefined")


class _Scorer:
    """Evaluates a set of measures on (m, W, k) index arrays."""

    def __init__(self, spec: EnumerationSpec, measures: Sequence[str]):
        self.spec = spec
        self.measures = tuple(measures)
        self.catalog = ItemCatalog.from_range(spec.n)
        self.users = UserSet.from_range(spec.m)
        self.sim = spec.similarity()
        self._uniform = ExaminationFunction.uniform()
        self._dcg = ExaminationFunction.dcg()

    def __call__(self, indices: np.ndarray) -> dict[str, Optional[float]]:
        values: dict[str, Optional[float]] = {}
        if _UNIFORM_MEASURES.intersection(self.measures):
            table = exposure_from_indices(indices, self.catalog, self._uniform)
        if GINI_W in self.measures:
            weighted = exposure_from_indices(indices, self.catalog, self._dcg)
        if IID in self.measures or AID in self.measures:
            uie = user_item_exposure_from_indices(indices, self.users, self.catalog, self.spec.gamma)
        for measure in self.measures:
            if measure == ENT_DEF:
                values[measure] = ent_def(table, self.spec.log_base)
                continue
            if measure == JAIN:
                result = jain_ori(table)
            elif measure == QF:
                result = qf_ori(table)
            elif measure == ENT:
                result = ent_ori(table, self.spec.log_base)
            elif measure == GINI:
                result = gini_ori(table)
            elif measure == GINI_W:
                result = gini_w_ori(weighted)
            elif measure == FSAT:
                result = fsat_ori(table)
            elif measure == VOCD:
                try:
                    result = vocd_ori(table, self.sim)
                except NoSimilarPairs:
                    values[measure] = None
                    continue
            elif measure == IID:
                result = iid_ori(uie)
            else:
                result = aid_ori(uie)
            values[measure] = _value_of(result)
        return values

    def materialise(self, indices: np.ndarray) -> TopKRun:
        return TopKRun.from_index_matrix(indices, self.users, self.catalog)


def _value_of(result: MeasureResult) -> Optional[float]:
    return result.value if result.defined else None


def _check_space(spec: EnumerationSpec) -> None:
    if spec.space_size > spec.cap:
        raise SpaceTooLarge(
            f"{spec.space_size} runs for k={spec.k}, m={spec.m}, n={spec.n}, W={spec.rounds} "
            f"exceeds the cap of {spec.cap}"
        )


def iter_runs(spec: EnumerationSpec) -> Iterator[np.ndarray]:
    """Yield every run as an (m, W, k) index array in lexicographic order.

    Raises:
        SpaceTooLarge: If the search space exceeds ``spec.cap``
    """
    _check_space(spec)
    selections = np.array(list(itertools.permutations(range(spec.n), spec.k)), dtype=np.int64)
    shape = (spec.m, spec.rounds, spec.k)
    for combo in itertools.product(range(len(selections)), repeat=spec.m * spec.rounds):
        yield selections[list(combo)].reshape(shape)


def enumerate_all_extremes(
    spec: EnumerationSpec,
    measures: Iterable[str] = ORACLE_MEASURES,
) -> dict[str, ExtremeResult]:
    """Exact extremes of several measures in a single pass over all runs.

    Args:
        spec: Search shape and parameters (``spec.measure`` is ignored)
        measures: Measure ids to track

    Returns:
        ExtremeResult per measure; measures undefined on every run are left out

    Raises:
        SpaceTooLarge: If the search space exceeds ``spec.cap``
    """
    measures = tuple(measures)
    unknown = [m for m in measures if m not in ORACLE_MEASURES]
    if unknown:
        raise ValueError(f"unknown measure {unknown[0]!r}; choose from {ORACLE_MEASURES}")
    _check_space(spec)
    logger.info(
        f"Enumerating {spec.space_size} runs (k={spec.k}, m={spec.m}, n={spec.n}, "
        f"W={spec.rounds}) for {', '.join(measures)}"
    )

    scorer = _Scorer(spec, measures)
    low: dict[str, tuple[float, np.ndarray]] = {}
    high: dict[str, tuple[float, np.ndarray]] = {}
    undefined = dict.fromkeys(measures, 0)
    evaluated = 0
    for indices in iter_runs(spec):
        evaluated += 1
        for measure, value in scorer(indices).items():
            if value is None:
                undefined[measure] += 1
                continue
            # strict comparisons keep the lexicographically first witness
            if measure not in low or value < low[measure][0]:
                low[measure] = (value, indices)
            if measure not in high or value > high[measure][0]:
                high[measure] = (value, indices)

    results: dict[str, ExtremeResult] = {}
    for measure in measures:
        if measure not in low:
            logger.warning(f"{measure} is undefined on all {evaluated} runs")
            continue
        results[measure] = ExtremeResult(
            measure=measure,
            min_value=low[measure][0],
            max_value=high[measure][0],
            argmin_run=scorer.materialise(low[measure][1]),
            argmax_run=scorer.materialise(high[measure][1]),
            evaluated=evaluated,
            undefined=undefined[measure],
        )
        logger.debug(
            f"{measure}: min={results[measure].min_value:.6g} "
            f"max={results[measure].max_value:.6g}"
        )
    return results


def enumerate_extremes(spec: EnumerationSpec) -> ExtremeResult:
    """Exact global min and max of ``spec.measure`` over all runs.

    Raises:
        SpaceTooLarge: If the search space exceeds ``spec.cap``
        ValueError: If the measure is undefined on every run
    """
    results = enumerate_all_extremes(spec, [spec.measure])
    if spec.measure not in results:
        raise ValueError(f"{spec.measure} is undefined on every run of this shape")
    return results[spec.measure]


def evaluate_witness(spec: EnumerationSpec, run: TopKRun, measure: Optional[str] = None) -> Optional[float]:
    """Re-evaluate a single run with the oracle's own measure settings."""
    measure = measure or spec.measure
    scorer = _Scorer(spec, [measure])
    return scorer(run.index_matrix(scorer.catalog))[measure]


def verify_bound(
    spec: EnumerationSpec,
    closed_form: float,
    which: Literal["min", "max"],
    tol: float = 1e-9,
) -> bool:
    """True iff the enumerated extreme equals ``closed_form`` within ``tol``."""
    result = enumerate_extremes(spec)
    observed = result.min_value if which == "min" else result.max_value
    ok = abs(observed - closed_form) <= tol
    if not ok:
        logger.warning(
            f"{spec.measure} {which}: enumerated {observed!r} vs closed form {closed_form!r}"
        )
    return ok


def _max_subset_mean(violation: np.ndarray) -> float:
    best = -math.inf
    for size in range(1, violation.size + 1):
        for subset in itertools.combinations(range(violation.size), size):
            best = max(best, float(violation[list(subset)].mean()))
    return best


def vocd_similarity_sweep(
    k: int,
    m: int,
    n: int,
    beta: float = 0.0,
    rounds: int = 1,
    cap: int = DEFAULT_CAP,
    max_pairs: int = 10,
) -> float:
    """Max VoCD over all runs and all nonempty sets of similar recommended pairs.

    Args:
        k: Cutoff
        m: Number of users
        n: Number of items
        beta: Disparity tolerance
        rounds: Number of rounds W
        cap: Maximum number of runs enumerated
        max_pairs: Largest number of recommended-item pairs whose subsets are swept

    Raises:
        SpaceTooLarge: If the run space exceeds ``cap`` or a run has more than
            ``max_pairs`` recommended-item pairs
    """
    spec = EnumerationSpec(k=k, m=m, n=n, rounds=rounds, measure=VOCD, beta=beta, cap=cap)
    catalog = ItemCatalog.from_range(n)
    uniform = ExaminationFunction.uniform()
    best = -math.inf
    seen: set[tuple[int, ...]] = set()
    for indices in iter_runs(spec):
        table = exposure_from_indices(indices, catalog, uniform)
        counts = table.counts[table.recommended]
        # the sweep only depends on the multiset of positive counts
        key = tuple(sorted(int(c) for c in counts))
        if key in seen:
            continue
        seen.add(key)
        left, right = np.triu_indices(counts.size, k=1)
        if left.size == 0:
            continue
        if left.size > max_pairs:
            raise SpaceTooLarge(f"{left.size} recommended-item pairs exceed max_pairs={max_pairs}")
        violation = np.maximum(coverage_disparity(counts[left], counts[right]) - beta, 0.0)
        best = max(best, _max_subset_mean(violation))
    logger.info(f"VoCD similarity sweep k={k}, m={m}, n={n}, beta={beta}: max={best:.6g}")
    return best

"""Original individual item fairness measures.

The eight measures are implemented as published, limitations included:
Ent is undefined whenever an item is never recommended, FSat is always 1
when there are fewer slots than items, and single-round II-D depends only
on (k, n, gamma).
"""

import logging
import math
from typing import Optional

import numpy as np

from .errors import NoSimilarPairs
from .models import (
    Direction,
    ExaminationVariant,
    ExposureTable,
    MeasureResult,
    SimilarityProvider,
    SimilarityVariant,
    UserItemExposure,
)

logger = logging.getLogger(__name__)

JAIN = "jain_ori"
QF = "qf_ori"
ENT = "ent_ori"
GINI = "gini_ori"
GINI_W = "gini_w_ori"
FSAT = "fsat_ori"
VOCD = "vocd_ori"
IID = "iid_ori"
AID = "aid_ori"

DIRECTIONS: dict[str, Direction] = {
    JAIN: Direction.HIGHER_IS_FAIRER,
    QF: Direction.HIGHER_IS_FAIRER,
    ENT: Direction.HIGHER_IS_FAIRER,
    GINI: Direction.LOWER_IS_FAIRER,
    GINI_W: Direction.LOWER_IS_FAIRER,
    FSAT: Direction.HIGHER_IS_FAIRER,
    VOCD: Direction.LOWER_IS_FAIRER,
    IID: Direction.LOWER_IS_FAIRER,
    AID: Direction.LOWER_IS_FAIRER,
}


def _result(measure: str, value: float) -> MeasureResult:
    return MeasureResult(measure=measure, value=float(value), direction=DIRECTIONS[measure])


def entropy_in_base(nats: float, base: float) -> float:
    """Convert an entropy in nats to the given log base."""
    if nats == 0.0:
        return 0.0
    if base <= 0 or base == 1:
        raise ValueError(f"log base must be positive and != 1, got {base}")
    return nats / math.log(base)


def jain_ori(exposure: ExposureTable) -> MeasureResult:
    """Jain's index: (kmW)^2 / (n * sum_i c_i^2)."""
    counts = exposure.counts.astype(np.float64)
    slots = float(exposure.slots)
    return _result(JAIN, slots * slots / (exposure.n * float(np.dot(counts, counts))))


def qf_ori(exposure: ExposureTable) -> MeasureResult:
    """Qualification fairness |R| / n (item coverage)."""
    return _result(QF, exposure.n_recommended / exposure.n)


def ent_ori(exposure: ExposureTable, log_base: Optional[float] = None) -> MeasureResult:
    """Entropy of recommendation frequencies summed over the whole catalog.

    Undefined (log 0) as soon as one catalog item is never recommended.

    Args:
        exposure: Uniform exposure table
        log_base: Logarithm base; defaults to n
    """
    if exposure.n_recommended < exposure.n:
        missing = exposure.n - exposure.n_recommended
        return MeasureResult.undefined(
            ENT, DIRECTIONS[ENT], f"log 0: {missing} catalog items never recommended"
        )
    p = exposure.counts / float(exposure.slots)
    nats = float(-np.sum(p * np.log(p)))
    return _result(ENT, entropy_in_base(nats, log_base if log_base is not None else exposure.n))


def gini_coefficient(values: np.ndarray) -> Optional[float]:
    """Sorted-rank Gini of non-negative values; None when they sum to zero.

    Values are ordered by (value, catalog position), so tied items keep a
    fixed order whatever the run looks like.
    """
    values = np.asarray(values, dtype=np.float64)
    ordered = values[np.lexsort((np.arange(values.size), values))]
    n = ordered.size
    total = float(ordered.sum())
    if total <= 0.0:
        return None
    coefficients = 2.0 * np.arange(1, n + 1) - n - 1
    return float(np.dot(coefficients, ordered) / (n * total))


def _gini_result(measure: str, exposure: ExposureTable) -> MeasureResult:
    value = gini_coefficient(exposure.exposure)
    if value is None:
        return MeasureResult.undefined(measure, DIRECTIONS[measure], "no item received exposure")
    return _result(measure, value)


def gini_ori(exposure: ExposureTable) -> MeasureResult:
    """Gini index of uniform-weighted item exposure.

    Raises:
        ValueError: If the table was not built with the uniform examination function
    """
    if exposure.examination.variant != ExaminationVariant.UNIFORM:
        raise ValueError("gini_ori needs a uniform exposure table")
    return _gini_result(GINI, exposure)


def gini_w_ori(exposure: ExposureTable) -> MeasureResult:
    """Gini index of DCG-weighted item exposure (Gini-w).

    Raises:
        ValueError: If the table was not built with the DCG examination function
    """
    if exposure.examination.variant != ExaminationVariant.DCG:
        raise ValueError("gini_w_ori needs a DCG exposure table")
    return _gini_result(GINI_W, exposure)


def gini_pairwise(exposure: ExposureTable, chunk: int = 1024) -> float:
    """Gini through the mean absolute pairwise difference.

    sum_i sum_i' |Ex_i - Ex_i'| / (2 n^2 mean(Ex)); rows are processed in
    chunks to bound memory.
    """
    values = np.asarray(exposure.exposure, dtype=np.float64)
    n = values.size
    total = float(values.sum())
    if total <= 0.0:
        raise ValueError("Gini is undefined when no item received exposure")
    absolute = 0.0
    for start in range(0, n, chunk):
        block = values[start:start + chunk]
        absolute += float(np.abs(block[:, None] - values[None, :]).sum())
    return absolute / (2.0 * n * total)


def maximin_share(exposure: ExposureTable) -> int:
    """floor(kmW / n)."""
    return exposure.slots // exposure.n


def fsat_ori(exposure: ExposureTable) -> MeasureResult:
    """Fraction of items recommended at least the maximin share times."""
    share = maximin_share(exposure)
    return _result(FSAT, float(np.count_nonzero(exposure.counts >= share)) / exposure.n)


def coverage_disparity(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """|c_i - c_i'| / max(c_i, c_i') for recommended (positive) counts."""
    first = np.asarray(first, dtype=np.float64)
    second = np.asarray(second, dtype=np.float64)
    return np.abs(first - second) / np.maximum(first, second)


def vocd_from_pairs(counts: np.ndarray, left: np.ndarray, right: np.ndarray, beta: float) -> float:
    """Mean violation max(CD - beta, 0) over the given similar pairs.

    Raises:
        NoSimilarPairs: If no pair is given
    """
    if len(left) == 0:
        raise NoSimilarPairs("no alpha-similar pair among recommended items")
    violation = np.maximum(coverage_disparity(counts[left], counts[right]) - beta, 0.0)
    return float(violation.mean())


def _vocd_all_similar(counts: np.ndarray, beta: float) -> float:
    # every pair of distinct recommended items; grouped by count value
    values, multiplicity = np.unique(counts, return_counts=True)
    size = int(multiplicity.sum())
    n_pairs = size * (size - 1) // 2
    if n_pairs == 0:
        raise NoSimilarPairs("fewer than two recommended items")
    low, high = np.triu_indices(values.size, k=1)
    violation = np.maximum(coverage_disparity(values[low], values[high]) - beta, 0.0)
    weighted = float(np.dot(violation, multiplicity[low] * multiplicity[high]))
    return weighted / n_pairs


def vocd_ori(exposure: ExposureTable, sim: SimilarityProvider = SimilarityProvider()) -> MeasureResult:
    """Violation of coverage disparity over alpha-similar recommended pairs.

    Raises:
        NoSimilarPairs: If no pair of recommended items is alpha-similar
    """
    mask = exposure.recommended
    counts = exposure.counts[mask]
    if sim.variant == SimilarityVariant.ALL_SIMILAR:
        value = _vocd_all_similar(counts, sim.beta)
    else:
        items = [item for item, keep in zip(exposure.catalog.items, mask) if keep]
        left, right = sim.similar_pairs(items)
        value = vocd_from_pairs(counts, left, right, sim.beta)
    return _result(VOCD, value)


def vocd_or_undefined(exposure: ExposureTable, sim: SimilarityProvider) -> MeasureResult:
    """vocd_ori, reporting an empty similar-pair set as an undefined result."""
    try:
        return vocd_ori(exposure, sim)
    except NoSimilarPairs as e:
        logger.warning(f"VoCD undefined: {e}")
        return MeasureResult.undefined(VOCD, DIRECTIONS[VOCD], str(e))


def iid_ori(uie: UserItemExposure) -> MeasureResult:
    """Individual-user-to-individual-item disparity.

    (1/(mn)) sum_{u,i} (E_{u,i} - E~)^2, where entries absent from the
    sparse matrix contribute E~^2 each.
    """
    m, n = uie.m, uie.n
    e_tilde = uie.e_tilde
    stored = uie.matrix.data
    squared = float(np.sum((stored - e_tilde) ** 2)) + (m * n - stored.size) * e_tilde**2
    return _result(IID, squared / (m * n))


def aid_ori(uie: UserItemExposure) -> MeasureResult:
    """All-users-to-individual-item disparity.

    (1/n) sum_i ((1/m) sum_u E_{u,i} - (1/m) sum_u E~_{u,i})^2.
    """
    system = np.asarray(uie.matrix.sum(axis=0)).ravel() / uie.m
    target = float(np.full(uie.m, uie.e_tilde).mean())
    return _result(AID, float(np.mean((system - target) ** 2)))

"""Agreement between measures when ranking systems.

Scores are oriented so that larger means better (LowerIsFairer rows are
negated) before Kendall's tau-b is computed, so two measures that order the
systems identically always correlate at +1 regardless of direction.
"""

import logging
import math
from functools import lru_cache
from typing import Iterator, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.stats import kendalltau, norm

from .models import Direction

logger = logging.getLogger(__name__)

EXACT_PVALUE_MAX_LENGTH = 8


class ScoreMatrix(BaseModel):
    """Scores of several measures (rows) for several systems (columns)."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    measures: tuple[str, ...] = Field(..., min_length=1)
    systems: tuple[str, ...] = Field(..., min_length=1)
    values: np.ndarray = Field(..., description="(measures, systems) scores; nan marks undefined")
    directions: dict[str, Direction] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_shape(self) -> "ScoreMatrix":
        expected = (len(self.measures), len(self.systems))
        if self.values.shape != expected:
            raise ValueError(f"values have shape {self.values.shape}, expected {expected}")
        if len(set(self.measures)) != len(self.measures):
            raise ValueError("measure ids must be unique")
        if len(set(self.systems)) != len(self.systems):
            raise ValueError("system names must be unique")
        return self

    def direction_of(self, measure: str) -> Direction:
        return self.directions.get(measure, Direction.HIGHER_IS_FAIRER)

    def row(self, measure: str) -> np.ndarray:
        return self.values[self.measures.index(measure)]

    def oriented(self, measure: str) -> np.ndarray:
        """Row with LowerIsFairer scores negated."""
        return orient(self.row(measure), self.direction_of(measure))

    def comparable(self) -> "ScoreMatrix":
        """Drop rows with undefined cells or a single distinct value.

        Neither kind can rank systems, so both are left out of correlation.

        Raises:
            ValueError: If no row survives
        """
        keep = []
        for j, measure in enumerate(self.measures):
            row = self.values[j]
            if np.isnan(row).any():
                logger.warning(f"Dropping {measure}: undefined for some systems")
            elif np.unique(row).size < 2:
                logger.warning(f"Dropping {measure}: identical score for every system")
            else:
                keep.append(j)
        if not keep:
            raise ValueError("no measure with defined, non-constant scores is left to correlate")
        return ScoreMatrix(
            measures=tuple(self.measures[j] for j in keep),
            systems=self.systems,
            values=self.values[keep],
            directions=self.directions,
        )


def orient(scores: Sequence[float], direction: Direction) -> np.ndarray:
    values = np.asarray(scores, dtype=np.float64)
    return -values if direction == Direction.LOWER_IS_FAIRER else values


def kendall_tau(
    a: Sequence[float],
    b: Sequence[float],
    directions: tuple[Direction, Direction] = (Direction.HIGHER_IS_FAIRER, Direction.HIGHER_IS_FAIRER),
) -> Optional[float]:
    """Kendall's tau-b between two score lists after orientation.

    Returns:
        tau in [-1, 1], or None when either list is entirely tied

    Raises:
        ValueError: If the lists differ in length or have fewer than two entries
    """
    x = orient(a, directions[0])
    y = orient(b, directions[1])
    if x.size != y.size:
        raise ValueError(f"score lists differ in length: {x.size} vs {y.size}")
    if x.size < 2:
        raise ValueError("Kendall's tau needs at least two scores per list")
    tau, _ = kendalltau(x, y, variant="b")
    if tau is None or math.isnan(tau):
        return None
    return float(tau)


@lru_cache(maxsize=None)
def _inversion_distribution(length: int) -> tuple[int, ...]:
    """Number of permutations of ``length`` items with each inversion count."""
    counts = np.array([1], dtype=np.int64)
    for size in range(2, length + 1):
        counts = np.convolve(counts, np.ones(size, dtype=np.int64))
    return tuple(int(c) for c in counts)


def tau_pvalue(tau: float, length: int) -> float:
    """Two-sided p-value of tau under independence.

    Exact permutation null for length <= 8 (no ties assumed), normal
    approximation with variance 2(2n+5)/(9n(n-1)) above.
    """
    if length < 2:
        raise ValueError(f"p-value needs at least two scores, got {length}")
    if not -1.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [-1, 1], got {tau}")
    if length <= EXACT_PVALUE_MAX_LENGTH:
        counts = np.array(_inversion_distribution(length), dtype=np.float64)
        pairs = length * (length - 1) / 2.0
        taus = 1.0 - 2.0 * np.arange(counts.size) / pairs
        extreme = np.abs(taus) >= abs(tau) - 1e-12
        return float(counts[extreme].sum() / counts.sum())
    variance = 2.0 * (2 * length + 5) / (9.0 * length * (length - 1))
    z = abs(tau) / math.sqrt(variance)
    return float(min(1.0, 2.0 * norm.sf(z)))


def benjamini_hochberg(pvalues: Sequence[float], alpha: float = 0.05) -> np.ndarray:
    """Step-up false discovery rate control.

    Finds the largest rank i with p_(i) <= (i/M) alpha and flags every
    hypothesis whose p-value ranks at or below it.
    """
    p = np.asarray(pvalues, dtype=np.float64)
    flags = np.zeros(p.size, dtype=bool)
    if p.size == 0:
        return flags
    order = np.argsort(p, kind="stable")
    thresholds = alpha * np.arange(1, p.size + 1) / p.size
    passing = np.flatnonzero(p[order] <= thresholds)
    if passing.size:
        flags[order[: passing[-1] + 1]] = True
    return flags


def bonferroni(pvalues: Sequence[float], alpha: float = 0.05) -> np.ndarray:
    p = np.asarray(pvalues, dtype=np.float64)
    return p <= alpha / max(p.size, 1)


def holm(pvalues: Sequence[float], alpha: float = 0.05) -> np.ndarray:
    """Holm's step-down procedure."""
    p = np.asarray(pvalues, dtype=np.float64)
    flags = np.zeros(p.size, dtype=bool)
    order = np.argsort(p, kind="stable")
    for rank, j in enumerate(order):
        if p[j] > alpha / (p.size - rank):
            break
        flags[j] = True
    return flags


class CorrelationCell(BaseModel):
    measure_a: str
    measure_b: str
    tau: Optional[float]
    pvalue: Optional[float]
    significant: bool
    bonferroni: bool
    holm: bool


class CorrelationMatrix(BaseModel):
    """Symmetric tau / p-value / significance matrices over measures."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    measures: tuple[str, ...]
    tau: np.ndarray
    pvalue: np.ndarray
    significant: np.ndarray
    bonferroni: np.ndarray
    holm: np.ndarray
    alpha: float = 0.05

    def cells(self) -> Iterator[CorrelationCell]:
        """Every ordered (a, b) pair, row-major."""
        for a, name_a in enumerate(self.measures):
            for b, name_b in enumerate(self.measures):
                tau = self.tau[a, b]
                pvalue = self.pvalue[a, b]
                yield CorrelationCell(
                    measure_a=name_a,
                    measure_b=name_b,
                    tau=None if np.isnan(tau) else float(tau),
                    pvalue=None if np.isnan(pvalue) else float(pvalue),
                    significant=bool(self.significant[a, b]),
                    bonferroni=bool(self.bonferroni[a, b]),
                    holm=bool(self.holm[a, b]),
                )

    def tau_of(self, a: str, b: str) -> float:
        return float(self.tau[self.measures.index(a), self.measures.index(b)])


def correlation_matrix(scores: ScoreMatrix, alpha: float = 0.05) -> CorrelationMatrix:
    """Kendall's tau between every pair of comparable measures.

    Rows that are undefined or constant are dropped first. The diagonal
    (tau = 1, p = 0) is outside the multiple-testing family; BH, Bonferroni
    and Holm run over the off-diagonal upper triangle.
    """
    usable = scores.comparable()
    size = len(usable.measures)
    length = len(usable.systems)
    oriented = [usable.oriented(measure) for measure in usable.measures]

    tau = np.eye(size)
    pvalue = np.zeros((size, size))
    upper = [(a, b) for a in range(size) for b in range(a + 1, size)]
    family: list[float] = []
    for a, b in upper:
        value = kendall_tau(oriented[a], oriented[b])
        if value is None:
            tau[a, b] = tau[b, a] = np.nan
            pvalue[a, b] = pvalue[b, a] = np.nan
            family.append(1.0)
            continue
        p = tau_pvalue(value, length)
        tau[a, b] = tau[b, a] = value
        pvalue[a, b] = pvalue[b, a] = p
        family.append(p)

    flags = {}
    for name, procedure in (("bh", benjamini_hochberg), ("bonferroni", bonferroni), ("holm", holm)):
        matrix = np.eye(size, dtype=bool)
        for (a, b), flag in zip(upper, procedure(family, alpha)):
            matrix[a, b] = matrix[b, a] = flag
        flags[name] = matrix

    logger.info(
        f"Correlated {size} measures over {length} systems; "
        f"{int(flags['bh'].sum() - size) // 2} of {len(upper)} pairs significant (BH, alpha={alpha})"
    )
    return CorrelationMatrix(
        measures=usable.measures,
        tau=tau,
        pvalue=pvalue,
        significant=flags["bh"],
        bonferroni=flags["bonferroni"],
        holm=flags["holm"],
        alpha=alpha,
    )

"""Binary-relevance top-k accuracy measures.

HR, MRR, Precision, Recall, MAP and NDCG at the run's cutoff. Users without
any relevant item in the judgments are skipped, not scored as zero. MAP is
normalised by min(k, #relevant) and the ideal DCG is built from
min(k, #relevant) relevant items.
"""

import logging
import math
from typing import Callable

import numpy as np
from pydantic import BaseModel, Field

from .models import RelevanceJudgments, TopKRun

logger = logging.getLogger(__name__)

HR = "hr"
MRR = "mrr"
PRECISION = "precision"
RECALL = "recall"
MAP = "map"
NDCG = "ndcg"

RELEVANCE_MEASURES = (HR, MRR, PRECISION, RECALL, MAP, NDCG)


class RelevanceScores(BaseModel):
    """Per-user scores of one relevance measure and their mean."""

    measure: str
    per_user: dict[str, float] = Field(default_factory=dict)
    mean: float = Field(..., ge=0.0, le=1.0)
    skipped_users: int = Field(default=0, ge=0, description="Users without relevant items")


def _hits(items: tuple[str, ...], relevant: frozenset[str]) -> np.ndarray:
    return np.fromiter((item in relevant for item in items), dtype=bool, count=len(items))


def _hr(hits: np.ndarray, n_relevant: int) -> float:
    return 1.0 if hits.any() else 0.0


def _mrr(hits: np.ndarray, n_relevant: int) -> float:
    positions = np.flatnonzero(hits)
    return 1.0 / (positions[0] + 1) if positions.size else 0.0


def _precision(hits: np.ndarray, n_relevant: int) -> float:
    return float(hits.sum()) / hits.size


def _recall(hits: np.ndarray, n_relevant: int) -> float:
    return float(hits.sum()) / n_relevant


def _average_precision(hits: np.ndarray, n_relevant: int) -> float:
    if not hits.any():
        return 0.0
    cumulative = np.cumsum(hits)
    ranks = np.arange(1, hits.size + 1)
    precision_at_hits = cumulative[hits] / ranks[hits]
    return float(precision_at_hits.sum()) / min(hits.size, n_relevant)


def _ndcg(hits: np.ndarray, n_relevant: int) -> float:
    discounts = 1.0 / np.log2(np.arange(2, hits.size + 2))
    dcg = float(discounts[hits].sum())
    ideal = float(discounts[: min(hits.size, n_relevant)].sum())
    return dcg / ideal


_SCORERS: dict[str, Callable[[np.ndarray, int], float]] = {
    HR: _hr,
    MRR: _mrr,
    PRECISION: _precision,
    RECALL: _recall,
    MAP: _average_precision,
    NDCG: _ndcg,
}


def _check_inputs(run: TopKRun, qrels: RelevanceJudgments) -> None:
    if qrels.is_empty():
        raise ValueError("relevance judgments are empty")
    if run.rounds != 1:
        raise ValueError(f"relevance measures need a single-round run, got W={run.rounds}")


def _score(measure: str, run: TopKRun, qrels: RelevanceJudgments) -> RelevanceScores:
    _check_inputs(run, qrels)
    scorer = _SCORERS[measure]
    per_user: dict[str, float] = {}
    skipped = 0
    for user, _, items in run.iter_lists():
        relevant = qrels.relevant_items(user)
        if not relevant:
            skipped += 1
            continue
        per_user[user] = scorer(_hits(items, relevant), len(relevant))
    if not per_user:
        raise ValueError("no user in the run has a relevant item in the judgments")
    if skipped:
        logger.debug(f"{measure}: skipped {skipped} users without relevant items")
    mean = math.fsum(per_user.values()) / len(per_user)
    return RelevanceScores(measure=measure, per_user=per_user, mean=mean, skipped_users=skipped)


def hr(run: TopKRun, qrels: RelevanceJudgments) -> RelevanceScores:
    """Hit rate: 1 if any relevant item is in the top-k."""
    return _score(HR, run, qrels)


def mrr(run: TopKRun, qrels: RelevanceJudgments) -> RelevanceScores:
    """Reciprocal rank of the first relevant item (0 if none)."""
    return _score(MRR, run, qrels)


def precision(run: TopKRun, qrels: RelevanceJudgments) -> RelevanceScores:
    return _score(PRECISION, run, qrels)


def recall(run: TopKRun, qrels: RelevanceJudgments) -> RelevanceScores:
    return _score(RECALL, run, qrels)


def average_precision(run: TopKRun, qrels: RelevanceJudgments) -> RelevanceScores:
    """MAP with AP normalised by min(k, #relevant)."""
    return _score(MAP, run, qrels)


def ndcg(run: TopKRun, qrels: RelevanceJudgments) -> RelevanceScores:
    """Binary NDCG; ideal DCG from min(k, #relevant) relevant items."""
    return _score(NDCG, run, qrels)


def relevance_scores(run: TopKRun, qrels: RelevanceJudgments) -> dict[str, RelevanceScores]:
    """All six relevance measures, keyed by measure id.

    Raises:
        ValueError: If the judgments are empty or the run has several rounds
    """
    scores = {measure: _score(measure, run, qrels) for measure in RELEVANCE_MEASURES}
    logger.info(
        f"Relevance over {len(scores[HR].per_user)} users: "
        + ", ".join(f"{m}={s.mean:.4f}" for m, s in scores.items())
    )
    return scores

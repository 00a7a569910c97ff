"""Synthetic runs: most fair / most unfair generators, sliding windows and
artificial insertion sweeps.
"""

import logging
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .errors import PoolExhausted
from .evaluator import FairnessEvaluator
from .models import (
    ExclusionSets,
    ItemCatalog,
    RelevanceJudgments,
    TopKRun,
    UserSet,
)

logger = logging.getLogger(__name__)


class RecommendationMode(str, Enum):
    """Whether already-consumed items may be recommended again."""

    REPEATABLE = "repeatable"
    NONREPEATABLE = "nonrepeatable"


class Generator(str, Enum):
    MOST_FAIR = "mostfair"
    MOST_UNFAIR = "mostunfair"


def _pools(
    k: int,
    users: UserSet,
    catalog: ItemCatalog,
    exclusions: Optional[ExclusionSets],
) -> list[list[int]]:
    exclusions = exclusions or ExclusionSets()
    exclusions.check_catalog(catalog)
    pools = []
    for user in users.users:
        pool = exclusions.pool(user, catalog)
        if len(pool) < k:
            raise PoolExhausted(
                f"user {user!r} has {len(pool)} recommendable items, fewer than k={k}"
            )
        pools.append(pool)
    return pools


def most_fair(
    k: int,
    users: UserSet,
    catalog: ItemCatalog,
    mode: RecommendationMode = RecommendationMode.REPEATABLE,
    exclusions: Optional[ExclusionSets] = None,
) -> TopKRun:
    """Run spreading exposure as evenly as the mode allows.

    Repeatable: user u (0-based) gets catalog positions (u*k + j) mod n, so
    every item is recommended floor(km/n) or floor(km/n)+1 times.
    Nonrepeatable: users in order each get their k least-recommended-so-far
    recommendable items, ties broken by catalog order.

    Raises:
        ValueError: If k exceeds the catalog size
        PoolExhausted: If a user has fewer than k recommendable items
    """
    n = catalog.n
    if k > n:
        raise ValueError(f"cutoff k={k} exceeds the number of items n={n}")
    m = users.m
    if mode == RecommendationMode.REPEATABLE:
        offsets = np.arange(m)[:, None] * k + np.arange(k)[None, :]
        indices = (offsets % n)[:, None, :]
        return TopKRun.from_index_matrix(indices, users, catalog)

    pools = _pools(k, users, catalog, exclusions)
    counts = np.zeros(n, dtype=np.int64)
    indices = np.empty((m, 1, k), dtype=np.int64)
    for u, pool in enumerate(pools):
        candidates = np.asarray(pool, dtype=np.int64)
        # lexsort: last key is primary
        order = np.lexsort((candidates, counts[candidates]))
        chosen = candidates[order[:k]]
        indices[u, 0] = chosen
        counts[chosen] += 1
    return TopKRun.from_index_matrix(indices, users, catalog)


def most_unfair(
    k: int,
    users: UserSet,
    catalog: ItemCatalog,
    mode: RecommendationMode = RecommendationMode.REPEATABLE,
    exclusions: Optional[ExclusionSets] = None,
) -> TopKRun:
    """Run concentrating exposure on as few items as the mode allows.

    Repeatable: every user gets the first k catalog items in catalog order.
    Nonrepeatable: every user gets their first k recommendable items in
    catalog order, i.e. excluded items are replaced by the next ones.

    Raises:
        ValueError: If k exceeds the catalog size
        PoolExhausted: If a user has fewer than k recommendable items
    """
    if k > catalog.n:
        raise ValueError(f"cutoff k={k} exceeds the number of items n={catalog.n}")
    if mode == RecommendationMode.REPEATABLE:
        indices = np.tile(np.arange(k), (users.m, 1))[:, None, :]
        return TopKRun.from_index_matrix(indices, users, catalog)
    pools = _pools(k, users, catalog, exclusions)
    indices = np.array([pool[:k] for pool in pools], dtype=np.int64)[:, None, :]
    return TopKRun.from_index_matrix(indices, users, catalog)


def generate(
    generator: Generator,
    k: int,
    users: UserSet,
    catalog: ItemCatalog,
    mode: RecommendationMode = RecommendationMode.REPEATABLE,
    exclusions: Optional[ExclusionSets] = None,
) -> TopKRun:
    if generator == Generator.MOST_FAIR:
        return most_fair(k, users, catalog, mode, exclusions)
    return most_unfair(k, users, catalog, mode, exclusions)


def sliding_window(deep_run: TopKRun, start: int, width: int = 5) -> TopKRun:
    """Ranks start..start+width-1 of every list, re-ranked from 1.

    Raises:
        ValueError: If the window starts before rank 1 or runs past the list depth
    """
    if start < 1:
        raise ValueError(f"window start must be >= 1, got {start}")
    if width < 1:
        raise ValueError(f"window width must be >= 1, got {width}")
    end = start - 1 + width
    if end > deep_run.k:
        raise ValueError(f"window {start}..{end} exceeds the run depth {deep_run.k}")
    lists = {(user, rnd): items[start - 1:end] for user, rnd, items in deep_run.iter_lists()}
    return TopKRun(k=width, rounds=deep_run.rounds, users=deep_run.users, lists=lists)


class EndpointRow(BaseModel):
    """Scores of one generated run in the most (un)fair endpoint table."""

    generator: Generator
    mode: RecommendationMode
    k: int
    m: int
    n: int
    scores: dict[str, Optional[float]]


def endpoint_table(
    k_values: Sequence[int],
    m: int,
    n: int,
    mode: RecommendationMode = RecommendationMode.REPEATABLE,
    evaluator: Optional[FairnessEvaluator] = None,
    exclusions: Optional[ExclusionSets] = None,
) -> list[EndpointRow]:
    """Original and corrected scores of MostFair and MostUnfair runs per k.

    Cutoffs with k >= n are skipped since no correction is defined there.
    """
    evaluator = evaluator or FairnessEvaluator()
    users = UserSet.from_range(m)
    catalog = ItemCatalog.from_range(n)
    rows = []
    for k in k_values:
        if k >= n:
            logger.warning(f"Skipping k={k}: corrections need k < n={n}")
            continue
        for generator in Generator:
            run = generate(generator, k, users, catalog, mode, exclusions)
            report = evaluator.evaluate(run, catalog, source=f"{generator.value}@{k}")
            rows.append(EndpointRow(generator=generator, mode=mode, k=k, m=m, n=n, scores=report.scores()))
    return rows


class InsertionMode(str, Enum):
    """Direction of the artificial insertion sweep.

    LE_RELEVANT starts from identical lists and inserts unique items that are
    relevant to their user from the bottom up. ME_IRRELEVANT starts from that
    final run and puts back, from the bottom up, copies of the first user's
    items, which are irrelevant to everyone else.
    """

    LE_RELEVANT = "le-relevant"
    ME_IRRELEVANT = "me-irrelevant"


class InsertionState(BaseModel):
    """Shape of an insertion sweep; the catalog has exactly k*m items."""

    model_config = ConfigDict(frozen=True)

    m: int = Field(default=1000, ge=2, description="Number of users")
    k: int = Field(default=10, ge=1, description="Cutoff; the sweep has k+1 points")
    mode: InsertionMode = InsertionMode.LE_RELEVANT
    seed: Optional[int] = Field(default=None, description="Shuffles item id labels only")

    @property
    def n(self) -> int:
        return self.k * self.m

    def catalog(self) -> ItemCatalog:
        labels = np.arange(1, self.n + 1)
        if self.seed is not None:
            labels = np.random.default_rng(self.seed).permutation(labels)
        return ItemCatalog(items=tuple(f"i{label}" for label in labels))

    def users(self) -> UserSet:
        return UserSet.from_range(self.m)


def insertion_indices(state: InsertionState, step: int) -> np.ndarray:
    """(m, 1, k) catalog positions of the run at a sweep step.

    User 0 always holds positions 0..k-1. User u > 0 owns positions
    u*k..u*k+k-1 and, at rank p, shows its own item u*k+p or the shared
    item p. LE step j gives own items to the bottom j ranks; ME step j gives
    shared items to the bottom j ranks.
    """
    k, m = state.k, state.m
    if not 0 <= step <= k:
        raise ValueError(f"step must lie in 0..{k}, got {step}")
    ranks = np.arange(k)
    shared = np.tile(ranks, (m, 1))
    own = np.arange(m)[:, None] * k + ranks[None, :]
    bottom = ranks >= k - step
    use_own = bottom if state.mode == InsertionMode.LE_RELEVANT else ~bottom
    indices = np.where(use_own[None, :], own, shared)
    indices[0] = ranks
    return indices[:, None, :]


def insertion_qrels(state: InsertionState, catalog: ItemCatalog, users: UserSet) -> RelevanceJudgments:
    """Each user's own k items are its relevant items (user 0 owns the shared ones)."""
    labels = {}
    for u, user in enumerate(users.users):
        for p in range(state.k):
            labels[(user, catalog.items[u * state.k + p])] = 1
    return RelevanceJudgments(labels=labels)


def insertion_run(state: InsertionState, step: int) -> tuple[TopKRun, ItemCatalog, RelevanceJudgments]:
    catalog = state.catalog()
    users = state.users()
    run = TopKRun.from_index_matrix(insertion_indices(state, step), users, catalog)
    return run, catalog, insertion_qrels(state, catalog, users)


class SweepPoint(BaseModel):
    """All measure values at one insertion step."""

    step: int
    fraction: float = Field(..., ge=0.0, le=1.0, description="Inserted fraction P = step / k")
    scores: dict[str, Optional[float]]


def insertion_sweep(
    state: InsertionState,
    evaluator: Optional[FairnessEvaluator] = None,
) -> list[SweepPoint]:
    """Evaluate every step 0..k of an insertion sweep.

    Returns:
        One SweepPoint per step with original, corrected and relevance scores
    """
    evaluator = evaluator or FairnessEvaluator()
    catalog = state.catalog()
    users = state.users()
    qrels = insertion_qrels(state, catalog, users)
    logger.info(
        f"Insertion sweep ({state.mode.value}): m={state.m}, n={state.n}, k={state.k}"
    )
    points = []
    for step in range(state.k + 1):
        run = TopKRun.from_index_matrix(insertion_indices(state, step), users, catalog)
        report = evaluator.evaluate(run, catalog, qrels, source=f"{state.mode.value}@{step}")
        points.append(SweepPoint(step=step, fraction=step / state.k, scores=report.scores()))
    return points

"""Exposure bookkeeping for top-k runs.

Turns a validated run into per-item counts and weighted exposure (the input
of Jain, QF, Ent, Gini, FSat and VoCD) and into the user-item RBP exposure
matrix used by II-D and AI-D.
"""

import logging
import math

import numpy as np
from scipy.sparse import csr_matrix

from .models import (
    ExaminationFunction,
    ExaminationVariant,
    ExposureTable,
    ItemCatalog,
    TopKRun,
    UserItemExposure,
    UserSet,
)

logger = logging.getLogger(__name__)


def examination_weight(fn: ExaminationFunction, rank: int) -> float:
    """Weight of a 1-based rank under an examination function.

    Args:
        fn: Examination function (uniform, DCG or RBP)
        rank: 1-based rank position

    Returns:
        1 for uniform, 1/log2(rank+1) for DCG, gamma^(rank-1) for RBP

    Raises:
        ValueError: If rank is not positive
    """
    if rank < 1:
        raise ValueError(f"rank must be a positive integer, got {rank}")
    if fn.variant == ExaminationVariant.UNIFORM:
        return 1.0
    if fn.variant == ExaminationVariant.DCG:
        return 1.0 / math.log2(rank + 1)
    return fn.gamma ** (rank - 1)


def examination_weights(fn: ExaminationFunction, k: int) -> np.ndarray:
    """Weights for ranks 1..k as a float array."""
    ranks = np.arange(1, k + 1, dtype=np.float64)
    if fn.variant == ExaminationVariant.UNIFORM:
        return np.ones(k, dtype=np.float64)
    if fn.variant == ExaminationVariant.DCG:
        return 1.0 / np.log2(ranks + 1.0)
    return fn.gamma ** (ranks - 1.0)


def random_exposure(n: int, k: int, gamma: float) -> float:
    """Expected RBP exposure of an item under a uniformly random ranking."""
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    return (1.0 - gamma**k) / (n * (1.0 - gamma))


def exposure_from_indices(
    indices: np.ndarray,
    catalog: ItemCatalog,
    fn: ExaminationFunction,
) -> ExposureTable:
    """Build an ExposureTable from an (m, W, k) array of catalog positions."""
    m, rounds, k = indices.shape
    flat = indices.reshape(-1)
    counts = np.bincount(flat, minlength=catalog.n).astype(np.int64)
    if fn.variant == ExaminationVariant.UNIFORM:
        exposure = counts.astype(np.float64)
    else:
        weights = np.tile(examination_weights(fn, k), m * rounds)
        exposure = np.bincount(flat, weights=weights, minlength=catalog.n)
    return ExposureTable(
        catalog=catalog,
        examination=fn,
        k=k,
        m=m,
        rounds=rounds,
        counts=counts,
        exposure=exposure,
    )


def build_exposure(
    run: TopKRun,
    catalog: ItemCatalog,
    fn: ExaminationFunction = ExaminationFunction(),
) -> ExposureTable:
    """Count and weight the exposure of every catalog item in a run.

    Args:
        run: Validated top-k run
        catalog: Item universe, including unrecommended items
        fn: Examination function applied per rank (uniform by default)

    Returns:
        ExposureTable aligned with catalog order

    Raises:
        RunValidationError: If the run lists an item absent from the catalog
    """
    table = exposure_from_indices(run.index_matrix(catalog), catalog, fn)
    logger.debug(
        f"Exposure ({fn.variant.value}): {table.n_recommended}/{catalog.n} items "
        f"recommended over {table.slots} slots"
    )
    return table


def user_item_exposure_from_indices(
    indices: np.ndarray,
    users: UserSet,
    catalog: ItemCatalog,
    gamma: float,
) -> UserItemExposure:
    """Build the round-averaged RBP exposure matrix from an (m, W, k) array."""
    m, rounds, k = indices.shape
    weights = gamma ** np.arange(k, dtype=np.float64)
    rows = np.repeat(np.arange(m), rounds * k)
    data = np.tile(weights, m * rounds) / rounds
    # duplicate (row, col) entries from different rounds are summed
    matrix = csr_matrix((data, (rows, indices.reshape(-1))), shape=(m, catalog.n))
    return UserItemExposure(
        catalog=catalog,
        users=users,
        k=k,
        rounds=rounds,
        gamma=gamma,
        matrix=matrix,
        e_tilde=random_exposure(catalog.n, k, gamma),
    )


def build_user_item_exposure(
    run: TopKRun,
    catalog: ItemCatalog,
    gamma: float = 0.8,
) -> UserItemExposure:
    """Mean-over-rounds RBP exposure of each item to each user.

    Args:
        run: Validated top-k run
        catalog: Item universe
        gamma: RBP patience in (0, 1)

    Raises:
        ValueError: If gamma is outside (0, 1)
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    return user_item_exposure_from_indices(run.index_matrix(catalog), run.users, catalog, gamma)

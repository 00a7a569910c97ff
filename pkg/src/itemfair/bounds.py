"""Closed-form most-fair/most-unfair bounds and corrected measures.

All bounds depend only on (k, m, n). For multi-round runs pass the
effective user count m·W. The corrected ("our") measures are min-max
normalisations of the originals between the most unfair and most fair
scores achievable at cutoff k, so both endpoints are reachable.
"""

import logging
import math
from typing import Optional

import numpy as np

from .errors import NormalizationDegenerate
from .measures import DIRECTIONS, FSAT, GINI, GINI_W, JAIN, QF, VOCD, entropy_in_base
from .models import BoundsReport, Direction, ExposureTable

logger = logging.getLogger(__name__)

ENT = "ent_ori"
ENT_DEF = "ent_def"
JAIN_OUR = "jain_our"
QF_OUR = "qf_our"
ENT_OUR = "ent_our"
GINI_OUR = "gini_our"
GINI_W_OUR = "gini_w_our"
FSAT_OUR = "fsat_our"

CORRECTED_DIRECTIONS: dict[str, Direction] = {
    JAIN_OUR: Direction.HIGHER_IS_FAIRER,
    QF_OUR: Direction.HIGHER_IS_FAIRER,
    ENT_OUR: Direction.HIGHER_IS_FAIRER,
    GINI_OUR: Direction.LOWER_IS_FAIRER,
    GINI_W_OUR: Direction.LOWER_IS_FAIRER,
    FSAT_OUR: Direction.HIGHER_IS_FAIRER,
}

# original measure each corrected measure is derived from
CORRECTS: dict[str, str] = {
    JAIN_OUR: JAIN,
    QF_OUR: QF,
    ENT_OUR: ENT_DEF,
    GINI_OUR: GINI,
    GINI_W_OUR: GINI_W,
    FSAT_OUR: FSAT,
}

_DEGENERACY_TOL = 1e-15


def _check_shape(k: int, m: int, n: int) -> None:
    if k < 1 or m < 1 or n < 1:
        raise ValueError(f"k, m and n must be positive, got k={k}, m={m}, n={n}")
    if k > n:
        raise ValueError(f"cutoff k={k} exceeds the number of items n={n}")


def _require_k_below_n(k: int, n: int) -> None:
    if k >= n:
        raise NormalizationDegenerate(
            f"corrections need k < n (k={k}, n={n}): most fair and most unfair runs coincide"
        )


def _split(k: int, m: int, n: int) -> tuple[int, int]:
    """(floor(km/n), km mod n)."""
    return divmod(k * m, n)


def normalize(x: float, x_min: float, x_max: float) -> float:
    """Min-max normalisation (x - x_min) / (x_max - x_min).

    Raises:
        NormalizationDegenerate: If x_max equals x_min
    """
    if abs(x_max - x_min) <= _DEGENERACY_TOL:
        raise NormalizationDegenerate(f"x_max == x_min == {x_min}")
    return (x - x_min) / (x_max - x_min)


def jain_min(k: int, m: int, n: int) -> float:
    _check_shape(k, m, n)
    return k / n


def jain_max(k: int, m: int, n: int) -> float:
    """Jain of the run spreading km slots as evenly as possible over n items."""
    _check_shape(k, m, n)
    share, rest = _split(k, m, n)
    slots = k * m
    return slots * slots / (n * (n * share * share + rest * (2 * share + 1)))


def jain_our(jain: float, k: int, m: int, n: int) -> float:
    _require_k_below_n(k, n)
    return normalize(jain, jain_min(k, m, n), jain_max(k, m, n))


def qf_min(k: int, m: int, n: int) -> float:
    _check_shape(k, m, n)
    return k / n


def qf_max(k: int, m: int, n: int) -> float:
    _check_shape(k, m, n)
    return min(k * m / n, 1.0)


def qf_our(n_recommended: int, k: int, m: int, n: int) -> float:
    """Corrected QF from the size of the recommended set |R|.

    (|R| - k)/(n - k) when km >= n, otherwise (|R| - k)/(k(m - 1)).

    Raises:
        NormalizationDegenerate: For k = n, or m = 1 while km < n
    """
    _check_shape(k, m, n)
    _require_k_below_n(k, n)
    denominator = n - k if k * m >= n else k * (m - 1)
    if denominator == 0:
        raise NormalizationDegenerate(f"QF range is empty for k={k}, m={m}, n={n}")
    return (n_recommended - k) / denominator


def _resolve_base(n: int, log_base: Optional[float]) -> float:
    return float(n) if log_base is None else float(log_base)


def ent_min(k: int, m: int, n: int, log_base: Optional[float] = None) -> float:
    """log k: the same k items recommended to every user."""
    _check_shape(k, m, n)
    return entropy_in_base(math.log(k), _resolve_base(n, log_base))


def ent_max(k: int, m: int, n: int, log_base: Optional[float] = None) -> float:
    """Entropy of the most even spread of km slots over n items.

    Items with zero share contribute nothing (0 log 0 = 0), so this equals
    log km when km < n and log n when n divides km.
    """
    _check_shape(k, m, n)
    share, rest = _split(k, m, n)
    slots = float(k * m)
    nats = 0.0
    if share > 0:
        p_low = share / slots
        nats -= (n - rest) * p_low * math.log(p_low)
    if rest > 0:
        p_high = (share + 1) / slots
        nats -= rest * p_high * math.log(p_high)
    return entropy_in_base(nats, _resolve_base(n, log_base))


def ent_def(exposure: ExposureTable, log_base: Optional[float] = None) -> float:
    """Entropy restricted to recommended items; finite for every nonempty run."""
    counts = exposure.counts[exposure.recommended]
    p = counts / float(exposure.slots)
    nats = float(-np.sum(p * np.log(p)))
    return entropy_in_base(nats, _resolve_base(exposure.n, log_base))


def ent_our(
    entropy: float,
    k: int,
    m: int,
    n: int,
    log_base: Optional[float] = None,
) -> float:
    """Corrected entropy from an ``ent_def`` value computed in ``log_base``.

    The result does not depend on the base as long as ``entropy`` and the
    bounds share it.
    """
    _check_shape(k, m, n)
    _require_k_below_n(k, n)
    base = _resolve_base(n, log_base)
    if k * m >= n:
        upper = ent_max(k, m, n, base)
    else:
        upper = entropy_in_base(math.log(k * m), base)
    return normalize(entropy, ent_min(k, m, n, base), upper)


def gini_max(k: int, m: int, n: int) -> float:
    """1 - k/n: the same k items recommended to every user."""
    _check_shape(k, m, n)
    return 1.0 - k / n


def gini_min(k: int, m: int, n: int) -> float:
    """(n - km mod n)(km mod n) / (kmn)."""
    _check_shape(k, m, n)
    _, rest = _split(k, m, n)
    return (n - rest) * rest / (k * m * n)


def gini_our(gini: float, k: int, m: int, n: int) -> float:
    _require_k_below_n(k, n)
    return normalize(gini, gini_min(k, m, n), gini_max(k, m, n))


def _dcg_weights(k: int) -> np.ndarray:
    # log_{l+1} 2 == 1 / log2(l + 1)
    return 1.0 / np.log2(np.arange(2, k + 2, dtype=np.float64))


def giniw_max(k: int, m: int, n: int) -> float:
    """Gini-w when every user gets the same k items in the same order."""
    _check_shape(k, m, n)
    weights = _dcg_weights(k)
    ranks = np.arange(1, k + 1)
    return float(np.dot(n - 2 * ranks + 1, weights) / (n * weights.sum()))


def giniw_min(k: int, m: int, n: int) -> float:
    """Gini-w when km distinct items fill all slots.

    Raises:
        ValueError: If km > n (no closed form exists)
    """
    _check_shape(k, m, n)
    if k * m > n:
        raise ValueError(f"Gini-w minimum has no closed form for km > n (km={k * m}, n={n})")
    weights = _dcg_weights(k)
    numerator = 0.0
    for rank in range(1, k + 1):
        first = n - rank * m + 1
        positions = np.arange(first, first + m)
        numerator += float(np.sum(2 * positions - n - 1)) * weights[rank - 1]
    return numerator / (m * n * float(weights.sum()))


def giniw_our(gini_w: float, k: int, m: int, n: int) -> float:
    """Corrected Gini-w.

    Normalised between the closed-form minimum and maximum when km <= n; otherwise
    divided by the maximum only, so 0 is not guaranteed to be reachable.
    """
    _require_k_below_n(k, n)
    upper = giniw_max(k, m, n)
    if k * m <= n:
        return normalize(gini_w, giniw_min(k, m, n), upper)
    return normalize(gini_w, 0.0, upper)


def fsat_min(k: int, m: int, n: int) -> float:
    _check_shape(k, m, n)
    return k / n


def fsat_our(fsat: float, k: int, n: int) -> float:
    """(FSat - k/n) / (1 - k/n)."""
    _require_k_below_n(k, n)
    return normalize(fsat, k / n, 1.0)


def vocd_max_bound(m: int, beta: float = 0.0) -> float:
    """Upper bound (m-1)/m - beta on VoCD for any run and any similarity."""
    if m < 1:
        raise ValueError(f"m must be positive, got {m}")
    return (m - 1) / m - beta


def bounds_for(
    measure: str,
    k: int,
    m: int,
    n: int,
    beta: float = 0.0,
    log_base: Optional[float] = None,
) -> BoundsReport:
    """Most-unfair and most-fair achievable scores for one measure.

    Args:
        measure: Original measure id (e.g. ``"jain_ori"``)
        k: Cutoff
        m: Number of users (times rounds for multi-round runs)
        n: Number of items
        beta: VoCD disparity tolerance
        log_base: Entropy log base; defaults to n
    """
    _check_shape(k, m, n)
    common = {"measure": measure, "k": k, "m": m, "n": n}
    if measure == JAIN:
        return BoundsReport(**common, direction=DIRECTIONS[JAIN],
                            most_unfair_at_k=jain_min(k, m, n), most_fair_at_k=jain_max(k, m, n))
    if measure == QF:
        return BoundsReport(**common, direction=DIRECTIONS[QF],
                            most_unfair_at_k=qf_min(k, m, n), most_fair_at_k=qf_max(k, m, n))
    if measure in (ENT, ENT_DEF):
        return BoundsReport(**common, direction=Direction.HIGHER_IS_FAIRER,
                            most_unfair_at_k=ent_min(k, m, n, log_base),
                            most_fair_at_k=ent_max(k, m, n, log_base),
                            notes=("bounds of ent_def; ent_ori is undefined once an item "
                                   "goes unexposed, as in the most unfair run",))
    if measure == GINI:
        return BoundsReport(**common, direction=DIRECTIONS[GINI],
                            most_unfair_at_k=gini_max(k, m, n), most_fair_at_k=gini_min(k, m, n))
    if measure == GINI_W:
        if k * m <= n:
            return BoundsReport(**common, direction=DIRECTIONS[GINI_W],
                                most_unfair_at_k=giniw_max(k, m, n),
                                most_fair_at_k=giniw_min(k, m, n))
        return BoundsReport(**common, direction=DIRECTIONS[GINI_W],
                            most_unfair_at_k=giniw_max(k, m, n), most_fair_at_k=None,
                            most_fair_applicable=False,
                            notes=("km > n: no closed-form minimum; correction divides by the "
                                   "maximum and 0 may be unreachable",))
    if measure == FSAT:
        notes = ("km < n: FSat is 1 for every run",) if k * m < n else ()
        return BoundsReport(**common, direction=DIRECTIONS[FSAT],
                            most_unfair_at_k=1.0 if k * m < n else fsat_min(k, m, n),
                            most_fair_at_k=1.0, notes=notes)
    if measure == VOCD:
        return BoundsReport(**common, direction=DIRECTIONS[VOCD],
                            most_unfair_at_k=vocd_max_bound(m, beta), most_fair_at_k=0.0,
                            notes=("upper bound; attained only for one similar pair",))
    raise ValueError(f"no closed-form bounds for measure {measure!r}")


BOUNDED_MEASURES = (JAIN, QF, ENT, GINI, GINI_W, FSAT, VOCD)


def all_bounds(
    k: int,
    m: int,
    n: int,
    beta: float = 0.0,
    log_base: Optional[float] = None,
) -> list[BoundsReport]:
    """Bounds for every measure that has them, in a fixed order."""
    return [bounds_for(measure, k, m, n, beta, log_base) for measure in BOUNDED_MEASURES]

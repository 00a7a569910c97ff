"""Data models for top-k recommendation runs and item exposure.

This module contains the Pydantic models every measure consumes: the item
catalog and user set, top-k runs, binary relevance judgments, examination
functions, the exposure tables built from a run, and the result types
returned by the measures.
"""

from enum import Enum
from typing import Any, Iterator, Mapping, Optional, Sequence

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PrivateAttr,
    field_validator,
    model_validator,
)
from scipy.sparse import csr_matrix

from .errors import RunValidationError


def _first_duplicate(ids: Sequence[str]) -> Optional[str]:
    seen: set[str] = set()
    for value in ids:
        if value in seen:
            return value
        seen.add(value)
    return None


class Direction(str, Enum):
    """Which end of a measure's scale is the fair one."""

    HIGHER_IS_FAIRER = "higher_is_fairer"
    LOWER_IS_FAIRER = "lower_is_fairer"


class ItemCatalog(BaseModel):
    """The full item universe I, including never-recommended items."""

    model_config = ConfigDict(frozen=True)

    items: tuple[str, ...] = Field(..., min_length=1, description="Item ids in catalog order")

    _index: dict[str, int] = PrivateAttr(default_factory=dict)

    @field_validator("items")
    @classmethod
    def _check_unique(cls, items: tuple[str, ...]) -> tuple[str, ...]:
        duplicate = _first_duplicate(items)
        if duplicate is not None:
            raise ValueError(f"duplicate item id in catalog: {duplicate!r}")
        return items

    def model_post_init(self, __context: Any) -> None:
        self._index = {item: j for j, item in enumerate(self.items)}

    @property
    def n(self) -> int:
        return len(self.items)

    def __contains__(self, item: object) -> bool:
        return item in self._index

    def index_of(self, item: str) -> int:
        """Position of an item in catalog order.

        Raises:
            RunValidationError: If the item is not in the catalog
        """
        try:
            return self._index[item]
        except KeyError:
            raise RunValidationError(f"item {item!r} is not in the catalog") from None

    @classmethod
    def from_range(cls, n: int, prefix: str = "i") -> "ItemCatalog":
        """Catalog with ids ``i1..in``."""
        return cls(items=tuple(f"{prefix}{j}" for j in range(1, n + 1)))


class UserSet(BaseModel):
    """The ordered set of users U."""

    model_config = ConfigDict(frozen=True)

    users: tuple[str, ...] = Field(..., min_length=1, description="User ids in evaluation order")

    _index: dict[str, int] = PrivateAttr(default_factory=dict)

    @field_validator("users")
    @classmethod
    def _check_unique(cls, users: tuple[str, ...]) -> tuple[str, ...]:
        duplicate = _first_duplicate(users)
        if duplicate is not None:
            raise ValueError(f"duplicate user id: {duplicate!r}")
        return users

    def model_post_init(self, __context: Any) -> None:
        self._index = {user: j for j, user in enumerate(self.users)}

    @property
    def m(self) -> int:
        return len(self.users)

    def __contains__(self, user: object) -> bool:
        return user in self._index

    def index_of(self, user: str) -> int:
        try:
            return self._index[user]
        except KeyError:
            raise RunValidationError(f"user {user!r} is not in the user set") from None

    @classmethod
    def from_range(cls, m: int, prefix: str = "u") -> "UserSet":
        """User set with ids ``u1..um``."""
        return cls(users=tuple(f"{prefix}{j}" for j in range(1, m + 1)))


class TopKRun(BaseModel):
    """Top-k lists for every (user, round) pair.

    The j-th entry of a list has rank j (1-based). Lists contain exactly k
    distinct items; every (user, round) key for rounds 1..W must be present.
    """

    model_config = ConfigDict(frozen=True)

    k: int = Field(..., gt=0, description="Cutoff")
    rounds: int = Field(default=1, gt=0, description="Number of rounds W")
    users: UserSet
    lists: dict[tuple[str, int], tuple[str, ...]]

    @model_validator(mode="after")
    def _check_lists(self) -> "TopKRun":
        expected = {(u, w) for u in self.users.users for w in range(1, self.rounds + 1)}
        missing = expected - self.lists.keys()
        if missing:
            user, rnd = sorted(missing)[0]
            raise ValueError(f"no list for user {user!r} in round {rnd} ({len(missing)} missing)")
        extra = self.lists.keys() - expected
        if extra:
            user, rnd = sorted(extra)[0]
            raise ValueError(f"list for unknown (user, round) pair ({user!r}, {rnd})")
        for (user, rnd), items in self.lists.items():
            if len(items) != self.k:
                raise ValueError(
                    f"user {user!r} round {rnd}: expected {self.k} items, got {len(items)}"
                )
            duplicate = _first_duplicate(items)
            if duplicate is not None:
                raise ValueError(f"user {user!r} round {rnd}: item {duplicate!r} listed twice")
        return self

    @property
    def m(self) -> int:
        return self.users.m

    @property
    def slots(self) -> int:
        """Total recommendation slots kmW."""
        return self.k * self.users.m * self.rounds

    def list_for(self, user: str, rnd: int = 1) -> tuple[str, ...]:
        return self.lists[(user, rnd)]

    def iter_lists(self) -> Iterator[tuple[str, int, tuple[str, ...]]]:
        """Yield (user, round, items) in user order, rounds ascending."""
        for user in self.users.users:
            for rnd in range(1, self.rounds + 1):
                yield user, rnd, self.lists[(user, rnd)]

    def index_matrix(self, catalog: ItemCatalog) -> np.ndarray:
        """Catalog positions of every entry as an (m, W, k) integer array.

        Raises:
            RunValidationError: If a listed item is missing from the catalog
        """
        out = np.empty((self.m, self.rounds, self.k), dtype=np.int64)
        for u, user in enumerate(self.users.users):
            for w in range(self.rounds):
                for j, item in enumerate(self.lists[(user, w + 1)]):
                    if item not in catalog:
                        raise RunValidationError(
                            f"user {user!r} round {w + 1} rank {j + 1}: "
                            f"item {item!r} is not in the catalog"
                        )
                    out[u, w, j] = catalog.index_of(item)
        return out

    @classmethod
    def from_user_lists(
        cls,
        lists: Mapping[str, Sequence[str]],
        k: Optional[int] = None,
    ) -> "TopKRun":
        """Build a single-round run from ``{user: [items...]}``.

        Args:
            lists: Ranked items per user, users in evaluation order
            k: Cutoff; defaults to the length of the first list
        """
        if not lists:
            raise ValueError("a run needs at least one user")
        if k is None:
            k = len(next(iter(lists.values())))
        return cls(
            k=k,
            rounds=1,
            users=UserSet(users=tuple(lists)),
            lists={(user, 1): tuple(items) for user, items in lists.items()},
        )

    @classmethod
    def from_index_matrix(
        cls,
        indices: np.ndarray,
        users: UserSet,
        catalog: ItemCatalog,
    ) -> "TopKRun":
        """Inverse of :meth:`index_matrix` for an (m, W, k) array."""
        m, rounds, k = indices.shape
        lists = {
            (user, w + 1): tuple(catalog.items[j] for j in indices[u, w])
            for u, user in enumerate(users.users)
            for w in range(rounds)
        }
        return cls(k=k, rounds=rounds, users=users, lists=lists)


class RelevanceJudgments(BaseModel):
    """Binary relevance r_{u,i}; absent (user, item) pairs are irrelevant."""

    model_config = ConfigDict(frozen=True)

    labels: dict[tuple[str, str], int] = Field(default_factory=dict)
    source: str = Field(default="<memory>", description="File the judgments were read from")
    lines: dict[tuple[str, str], int] = Field(
        default_factory=dict, description="Line of each (user, item) judgment in the source file"
    )

    _relevant: dict[str, frozenset[str]] = PrivateAttr(default_factory=dict)

    @field_validator("labels")
    @classmethod
    def _check_binary(cls, labels: dict[tuple[str, str], int]) -> dict[tuple[str, str], int]:
        for (user, item), rel in labels.items():
            if rel not in (0, 1):
                raise ValueError(f"relevance of ({user!r}, {item!r}) must be 0 or 1, got {rel}")
        return labels

    def model_post_init(self, __context: Any) -> None:
        relevant: dict[str, set[str]] = {}
        for (user, item), rel in self.labels.items():
            if rel:
                relevant.setdefault(user, set()).add(item)
        self._relevant = {user: frozenset(items) for user, items in relevant.items()}

    def relevant_items(self, user: str) -> frozenset[str]:
        return self._relevant.get(user, frozenset())

    def is_empty(self) -> bool:
        return not self.labels

    def check_ids(self, users: UserSet, catalog: ItemCatalog) -> None:
        """Raise RunValidationError for references to unknown users or items."""
        for user, item in self.labels:
            if user not in users:
                raise RunValidationError(
                    f"qrels reference unknown user {user!r}", self.source, self.lines.get((user, item))
                )
            if item not in catalog:
                raise RunValidationError(
                    f"qrels reference unknown item {item!r}", self.source, self.lines.get((user, item))
                )

    @classmethod
    def from_relevant(cls, relevant: Mapping[str, Sequence[str]]) -> "RelevanceJudgments":
        """Build judgments from ``{user: [relevant items...]}``."""
        return cls(labels={(user, item): 1 for user, items in relevant.items() for item in items})


class ExclusionSets(BaseModel):
    """Items each user may not be recommended (already seen in train/validation)."""

    model_config = ConfigDict(frozen=True)

    excluded: dict[str, frozenset[str]] = Field(default_factory=dict)

    def excluded_for(self, user: str) -> frozenset[str]:
        return self.excluded.get(user, frozenset())

    def check_catalog(self, catalog: ItemCatalog) -> None:
        """Raise RunValidationError if an excluded item is not in the catalog."""
        for user, items in self.excluded.items():
            for item in sorted(items):
                if item not in catalog:
                    raise RunValidationError(f"exclusion of unknown item {item!r} for user {user!r}")

    def pool(self, user: str, catalog: ItemCatalog) -> list[int]:
        """Catalog positions recommendable to ``user``, in catalog order."""
        banned = self.excluded_for(user)
        return [j for j, item in enumerate(catalog.items) if item not in banned]

    @classmethod
    def from_mapping(cls, excluded: Mapping[str, Sequence[str]]) -> "ExclusionSets":
        return cls(excluded={user: frozenset(items) for user, items in excluded.items()})


class ExaminationVariant(str, Enum):
    """Position-weighting rules for exposure."""

    UNIFORM = "uniform"
    DCG = "dcg"
    RBP = "rbp"


class ExaminationFunction(BaseModel):
    """Probability model of a user inspecting rank z.

    ``gamma`` is the RBP patience parameter and is only checked for RBP.
    """

    model_config = ConfigDict(frozen=True)

    variant: ExaminationVariant = ExaminationVariant.UNIFORM
    gamma: float = Field(default=0.8, description="RBP patience")

    @model_validator(mode="after")
    def _check_gamma(self) -> "ExaminationFunction":
        if self.variant == ExaminationVariant.RBP and not 0.0 < self.gamma < 1.0:
            raise ValueError(f"RBP patience must lie in (0, 1), got {self.gamma}")
        return self

    @classmethod
    def uniform(cls) -> "ExaminationFunction":
        return cls(variant=ExaminationVariant.UNIFORM)

    @classmethod
    def dcg(cls) -> "ExaminationFunction":
        return cls(variant=ExaminationVariant.DCG)

    @classmethod
    def rbp(cls, gamma: float = 0.8) -> "ExaminationFunction":
        return cls(variant=ExaminationVariant.RBP, gamma=gamma)


class ExposureTable(BaseModel):
    """Per-item recommendation counts c_i and weighted exposure Ex_i.

    Arrays are aligned with catalog order and include zero entries for
    items that were never recommended.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    catalog: ItemCatalog
    examination: ExaminationFunction
    k: int = Field(..., gt=0)
    m: int = Field(..., gt=0)
    rounds: int = Field(default=1, gt=0)
    counts: np.ndarray
    exposure: np.ndarray

    @model_validator(mode="after")
    def _check_totals(self) -> "ExposureTable":
        n = self.catalog.n
        if self.counts.shape != (n,) or self.exposure.shape != (n,):
            raise ValueError(f"exposure arrays must have shape ({n},)")
        if int(self.counts.sum()) != self.k * self.m * self.rounds:
            raise ValueError(
                f"counts sum to {int(self.counts.sum())}, expected kmW = "
                f"{self.k * self.m * self.rounds}"
            )
        return self

    @property
    def n(self) -> int:
        return self.catalog.n

    @property
    def slots(self) -> int:
        return self.k * self.m * self.rounds

    @property
    def effective_users(self) -> int:
        """m·W: every (user, round) pair fills k slots."""
        return self.m * self.rounds

    @property
    def recommended(self) -> np.ndarray:
        """Boolean mask of the recommended set R."""
        return self.counts > 0

    @property
    def n_recommended(self) -> int:
        return int(np.count_nonzero(self.counts))

    def count_of(self, item: str) -> int:
        return int(self.counts[self.catalog.index_of(item)])

    def exposure_of(self, item: str) -> float:
        return float(self.exposure[self.catalog.index_of(item)])


class UserItemExposure(BaseModel):
    """Round-averaged RBP exposure E_{u,i} and the random-policy target."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    catalog: ItemCatalog
    users: UserSet
    k: int = Field(..., gt=0)
    rounds: int = Field(default=1, gt=0)
    gamma: float = Field(..., gt=0.0, lt=1.0)
    matrix: csr_matrix
    e_tilde: float = Field(..., ge=0.0, description="(1 - gamma^k) / (n (1 - gamma))")

    @model_validator(mode="after")
    def _check_shape(self) -> "UserItemExposure":
        expected = (self.users.m, self.catalog.n)
        if self.matrix.shape != expected:
            raise ValueError(f"exposure matrix shape {self.matrix.shape} != {expected}")
        return self

    @property
    def m(self) -> int:
        return self.users.m

    @property
    def n(self) -> int:
        return self.catalog.n

    def value(self, user: str, item: str) -> float:
        return float(self.matrix[self.users.index_of(user), self.catalog.index_of(item)])


class MeasureResult(BaseModel):
    """Score of one measure on one run.

    ``defined=False`` encodes an undefined score ("nan"); the value then
    carries no meaning and must not be compared.
    """

    model_config = ConfigDict(frozen=True)

    measure: str
    value: float
    direction: Direction
    defined: bool = True
    note: Optional[str] = None

    @classmethod
    def undefined(cls, measure: str, direction: Direction, note: str) -> "MeasureResult":
        return cls(measure=measure, value=float("nan"), direction=direction, defined=False, note=note)


class SimilarityVariant(str, Enum):
    """How alpha-similar item pairs are determined for VoCD."""

    ALL_SIMILAR = "all_similar"
    EMBEDDINGS = "embeddings"
    PAIRS = "pairs"


class SimilarityProvider(BaseModel):
    """Item similarity for VoCD.

    ``ALL_SIMILAR`` behaves as alpha = 2 (every pair of distinct recommended
    items is similar). ``EMBEDDINGS`` uses cosine distance
    d = 1 - cos(e_i, e_i') and treats d <= alpha as similar. ``PAIRS`` takes
    an explicit set of similar item pairs.
    """

    model_config = ConfigDict(frozen=True)

    variant: SimilarityVariant = SimilarityVariant.ALL_SIMILAR
    embeddings: dict[str, tuple[float, ...]] = Field(default_factory=dict)
    pairs: frozenset[tuple[str, str]] = Field(default_factory=frozenset)
    alpha: float = Field(default=2.0, ge=0.0, le=2.0, description="Cosine distance threshold")
    beta: float = Field(default=0.0, ge=0.0, lt=1.0, description="Allowed coverage disparity")

    @model_validator(mode="after")
    def _check_representation(self) -> "SimilarityProvider":
        if self.variant == SimilarityVariant.EMBEDDINGS:
            if not self.embeddings:
                raise ValueError("embedding similarity requires at least one embedding")
            dims = {len(vec) for vec in self.embeddings.values()}
            if len(dims) != 1:
                raise ValueError(f"embedding dimension must be constant, found {sorted(dims)}")
            for item, vec in self.embeddings.items():
                if not any(vec):
                    raise ValueError(f"embedding of {item!r} is the zero vector")
        return self

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[str, str]], beta: float = 0.0) -> "SimilarityProvider":
        return cls(variant=SimilarityVariant.PAIRS, pairs=frozenset(tuple(p) for p in pairs), beta=beta)

    def similar_pairs(self, items: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
        """Index pairs (a, b), a < b, into ``items`` that are alpha-similar."""
        size = len(items)
        if self.variant == SimilarityVariant.ALL_SIMILAR:
            return np.triu_indices(size, k=1)
        if self.variant == SimilarityVariant.PAIRS:
            position = {item: j for j, item in enumerate(items)}
            found = set()
            for a, b in self.pairs:
                if a in position and b in position and a != b:
                    found.add(tuple(sorted((position[a], position[b]))))
            ordered = sorted(found)
            left = np.array([p[0] for p in ordered], dtype=np.int64)
            right = np.array([p[1] for p in ordered], dtype=np.int64)
            return left, right
        missing = [item for item in items if item not in self.embeddings]
        if missing:
            raise ValueError(f"no embedding for recommended item {missing[0]!r}")
        vectors = np.array([self.embeddings[item] for item in items], dtype=np.float64)
        vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
        distance = np.clip(1.0 - vectors @ vectors.T, 0.0, 2.0)
        left, right = np.triu_indices(size, k=1)
        keep = distance[left, right] <= self.alpha
        return left[keep], right[keep]


class BoundsReport(BaseModel):
    """Most-unfair and most-fair achievable scores for (measure, k, m, n)."""

    model_config = ConfigDict(frozen=True)

    measure: str
    direction: Direction
    k: int
    m: int
    n: int
    most_unfair_at_k: Optional[float] = None
    most_fair_at_k: Optional[float] = None
    most_fair_applicable: bool = True
    notes: tuple[str, ...] = ()

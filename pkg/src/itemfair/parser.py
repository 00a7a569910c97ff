"""Readers and writers for the tab-separated input files.

Run files carry a header ``user_id<TAB>item_id<TAB>rank[<TAB>round]``;
qrels are ``user_id<TAB>item_id<TAB>rel``; catalogs list one item id per
line; exclusions are ``user_id<TAB>item_id``; embeddings are
``item_id<TAB>v1<TAB>...<TAB>vd``. Every error names file and line.
"""

import csv
import logging
from pathlib import Path
from typing import Iterator, Optional, Union

import numpy as np

from .analysis import ScoreMatrix
from .errors import RunValidationError
from .models import (
    Direction,
    ExclusionSets,
    ItemCatalog,
    RelevanceJudgments,
    TopKRun,
    UserSet,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class RunParser:
    """Parse run, qrels, catalog, exclusion and embedding files."""

    RUN_HEADER = ("user_id", "item_id", "rank")
    QRELS_HEADER = ("user_id", "item_id", "rel")

    def __init__(self, delimiter: str = "\t"):
        """Initialize the parser.

        Args:
            delimiter: Field separator of the input files
        """
        self.delimiter = delimiter

    def _lines(self, path: PathLike) -> Iterator[tuple[int, list[str]]]:
        """Yield (1-based line number, fields) for every non-blank line."""
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"File not found: {path}")
        with open(path, "r", encoding="utf-8") as f:
            for lineno, raw in enumerate(f, start=1):
                line = raw.rstrip("\r\n")
                if not line.strip():
                    continue
                yield lineno, [field.strip() for field in line.split(self.delimiter)]

    @staticmethod
    def _int(value: str, what: str, source: str, lineno: int, minimum: int = 1) -> int:
        try:
            number = int(value)
        except ValueError:
            raise RunValidationError(f"{what} must be an integer, got {value!r}", source, lineno)
        if number < minimum:
            raise RunValidationError(f"{what} must be >= {minimum}, got {number}", source, lineno)
        return number

    def parse_run(
        self,
        path: PathLike,
        k: Optional[int] = None,
        catalog: Optional[ItemCatalog] = None,
    ) -> TopKRun:
        """Parse a run file.

        Args:
            path: Run file with a header line
            k: Expected cutoff; inferred from the first list when None
            catalog: When given, every item must belong to it

        Returns:
            Validated TopKRun; users keep their order of first appearance

        Raises:
            FileNotFoundError: If the file does not exist
            RunValidationError: On malformed rows, duplicate ranks or items,
                lists of the wrong length, users missing a round, or items
                outside the catalog
        """
        source = str(path)
        lines = self._lines(path)
        header = next(lines, None)
        if header is None:
            raise RunValidationError("empty run file", source)
        lineno, fields = header
        if tuple(fields[:3]) != self.RUN_HEADER or len(fields) > 4 or (len(fields) == 4 and fields[3] != "round"):
            raise RunValidationError(
                "header must be user_id<TAB>item_id<TAB>rank[<TAB>round]", source, lineno
            )
        width = len(fields)
        header_line = lineno

        ranked: dict[tuple[str, int], dict[int, tuple[str, int]]] = {}
        users: dict[str, int] = {}
        for lineno, fields in lines:
            if len(fields) != width:
                raise RunValidationError(f"expected {width} fields, got {len(fields)}", source, lineno)
            user, item = fields[0], fields[1]
            if not user or not item:
                raise RunValidationError("empty user or item id", source, lineno)
            rank = self._int(fields[2], "rank", source, lineno)
            rnd = self._int(fields[3], "round", source, lineno) if width == 4 else 1
            if catalog is not None and item not in catalog:
                raise RunValidationError(
                    f"user {user!r} round {rnd} rank {rank}: item {item!r} is not in the catalog",
                    source, lineno,
                )
            slot = ranked.setdefault((user, rnd), {})
            users[user] = lineno
            if rank in slot:
                raise RunValidationError(
                    f"rank {rank} given twice for user {user!r} round {rnd} "
                    f"(first on line {slot[rank][1]})", source, lineno
                )
            for other, first_line in slot.values():
                if other == item:
                    raise RunValidationError(
                        f"item {item!r} listed twice for user {user!r} round {rnd} "
                        f"(first on line {first_line})", source, lineno
                    )
            slot[rank] = (item, lineno)

        if not ranked:
            raise RunValidationError("run file has no rows", source, header_line)
        if k is None:
            k = len(next(iter(ranked.values())))
        rounds = max(rnd for _, rnd in ranked)
        lists: dict[tuple[str, int], tuple[str, ...]] = {}
        for (user, rnd), slot in ranked.items():
            last_line = max(line for _, line in slot.values())
            if sorted(slot) != list(range(1, k + 1)):
                raise RunValidationError(
                    f"user {user!r} round {rnd}: ranks must be exactly 1..{k}, got {sorted(slot)}",
                    source, last_line,
                )
            lists[(user, rnd)] = tuple(slot[rank][0] for rank in range(1, k + 1))
        for user, last_line in users.items():
            for rnd in range(1, rounds + 1):
                if (user, rnd) not in lists:
                    raise RunValidationError(
                        f"user {user!r} has no list for round {rnd}", source, last_line
                    )

        run = TopKRun(k=k, rounds=rounds, users=UserSet(users=tuple(users)), lists=lists)
        logger.info(f"Parsed run {source}: {run.m} users, k={k}, W={rounds}")
        return run

    def parse_qrels(self, path: PathLike) -> RelevanceJudgments:
        """Parse binary judgments; an optional header line is skipped.

        Raises:
            RunValidationError: On malformed rows, labels outside {0, 1},
                duplicate (user, item) rows or an empty file
        """
        source = str(path)
        labels: dict[tuple[str, str], int] = {}
        first_seen: dict[tuple[str, str], int] = {}
        for lineno, fields in self._lines(path):
            if not labels and not first_seen and tuple(fields) == self.QRELS_HEADER:
                continue
            if len(fields) != 3:
                raise RunValidationError(f"expected 3 fields, got {len(fields)}", source, lineno)
            key = (fields[0], fields[1])
            if key in first_seen:
                raise RunValidationError(
                    f"duplicate judgment for {key} (first on line {first_seen[key]})", source, lineno
                )
            rel = self._int(fields[2], "rel", source, lineno, minimum=0)
            if rel > 1:
                raise RunValidationError(f"rel must be 0 or 1, got {rel}", source, lineno)
            labels[key] = rel
            first_seen[key] = lineno
        if not labels:
            raise RunValidationError("qrels file has no judgments", source)
        logger.info(f"Parsed qrels {source}: {len(labels)} judgments")
        return RelevanceJudgments(labels=labels, source=source, lines=first_seen)

    def parse_catalog(self, path: PathLike) -> ItemCatalog:
        """Parse a catalog with one item id per line.

        Raises:
            RunValidationError: On duplicate ids or an empty file
        """
        source = str(path)
        items: list[str] = []
        first_seen: dict[str, int] = {}
        for lineno, fields in self._lines(path):
            if len(fields) != 1:
                raise RunValidationError(f"expected one item id, got {len(fields)} fields", source, lineno)
            item = fields[0]
            if item in first_seen:
                raise RunValidationError(
                    f"item {item!r} listed twice (first on line {first_seen[item]})", source, lineno
                )
            first_seen[item] = lineno
            items.append(item)
        if not items:
            raise RunValidationError("catalog is empty", source)
        logger.info(f"Parsed catalog {source}: {len(items)} items")
        return ItemCatalog(items=tuple(items))

    def parse_exclusions(self, path: PathLike, catalog: Optional[ItemCatalog] = None) -> ExclusionSets:
        """Parse ``user_id<TAB>item_id`` exclusions, optionally checked against a catalog."""
        source = str(path)
        excluded: dict[str, set[str]] = {}
        for lineno, fields in self._lines(path):
            if len(fields) != 2:
                raise RunValidationError(f"expected 2 fields, got {len(fields)}", source, lineno)
            user, item = fields
            if catalog is not None and item not in catalog:
                raise RunValidationError(f"item {item!r} is not in the catalog", source, lineno)
            excluded.setdefault(user, set()).add(item)
        return ExclusionSets(excluded={user: frozenset(items) for user, items in excluded.items()})

    def parse_embeddings(self, path: PathLike) -> dict[str, tuple[float, ...]]:
        """Parse item embeddings.

        Raises:
            RunValidationError: On non-numeric values, a changing dimension,
                zero vectors or duplicate items
        """
        source = str(path)
        embeddings: dict[str, tuple[float, ...]] = {}
        dim: Optional[int] = None
        for lineno, fields in self._lines(path):
            if len(fields) < 2:
                raise RunValidationError("expected an item id followed by vector values", source, lineno)
            item = fields[0]
            if item in embeddings:
                raise RunValidationError(f"item {item!r} has two embeddings", source, lineno)
            try:
                vector = tuple(float(v) for v in fields[1:])
            except ValueError:
                raise RunValidationError(f"non-numeric value in embedding of {item!r}", source, lineno)
            if dim is None:
                dim = len(vector)
            elif len(vector) != dim:
                raise RunValidationError(
                    f"embedding of {item!r} has dimension {len(vector)}, expected {dim}", source, lineno
                )
            if not any(vector):
                raise RunValidationError(f"embedding of {item!r} is the zero vector", source, lineno)
            embeddings[item] = vector
        if not embeddings:
            raise RunValidationError("embedding file is empty", source)
        logger.info(f"Parsed {len(embeddings)} embeddings of dimension {dim} from {source}")
        return embeddings

    def parse_score_matrix(self, path: PathLike) -> ScoreMatrix:
        """Read a ``measure,direction,<system>...`` CSV; empty cells are undefined."""
        source = str(path)
        if not Path(path).exists():
            raise FileNotFoundError(f"File not found: {path}")
        with open(path, "r", encoding="utf-8", newline="") as f:
            rows = list(csv.reader(f))
        if not rows or rows[0][:2] != ["measure", "direction"] or len(rows[0]) < 4:
            raise RunValidationError("header must be measure,direction,<system>,<system>...", source, 1)
        systems = tuple(rows[0][2:])
        measures: list[str] = []
        directions: dict[str, Direction] = {}
        values: list[list[float]] = []
        for lineno, row in enumerate(rows[1:], start=2):
            if not row:
                continue
            if len(row) != len(systems) + 2:
                raise RunValidationError(f"expected {len(systems) + 2} cells, got {len(row)}", source, lineno)
            try:
                directions[row[0]] = Direction(row[1])
                values.append([float(cell) if cell else float("nan") for cell in row[2:]])
            except ValueError as e:
                raise RunValidationError(str(e), source, lineno)
            measures.append(row[0])
        if not measures:
            raise RunValidationError("score matrix has no measure rows", source)
        return ScoreMatrix(
            measures=tuple(measures),
            systems=systems,
            values=np.array(values, dtype=np.float64),
            directions=directions,
        )


def format_run(run: TopKRun) -> str:
    """Serialise a run in the run file format; the round column appears only for W > 1."""
    multi = run.rounds > 1
    header = "user_id\titem_id\trank" + ("\tround" if multi else "")
    lines = [header]
    for user, rnd, items in run.iter_lists():
        for rank, item in enumerate(items, start=1):
            lines.append(f"{user}\t{item}\t{rank}" + (f"\t{rnd}" if multi else ""))
    return "\n".join(lines) + "\n"

"""State spaces, mixed-radix configuration indexing and dense CPTs."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .errors import ShapeError, SpecError

ROW_TOLERANCE = 1e-9

VARIABLE_KINDS = ("parent", "mechanism", "child", "inhibitor", "ambient")


@dataclass(frozen=True)
class StateSpace:
    """Ordered, finite set of state labels.

    Order matters: MAX/MIN gates compare state indices, and binary spaces
    use index 0 for false/absent and 1 for true/present.
    """

    states: tuple[str, ...]

    def __post_init__(self):
        states = tuple(str(s) for s in self.states)
        object.__setattr__(self, "states", states)
        if len(states) < 2:
            raise SpecError(f"state space needs at least 2 states, got {states!r}")
        if len(set(states)) != len(states):
            raise SpecError(f"duplicate state labels in {states!r}")

    @property
    def cardinality(self) -> int:
        return len(self.states)

    @property
    def is_binary(self) -> bool:
        return len(self.states) == 2

    def index(self, label: str) -> int:
        try:
            return self.states.index(str(label))
        except ValueError:
            raise SpecError(f"unknown state {label!r}; expected one of {self.states}") from None

    @classmethod
    def of_size(cls, k: int) -> StateSpace:
        """Space with labels ``"0" .. "k-1"``."""
        return cls(tuple(str(i) for i in range(k)))

    @classmethod
    def binary(cls) -> StateSpace:
        return cls.of_size(2)

    def __repr__(self):
        return f"StateSpace({list(self.states)})"


BINARY = StateSpace.binary()


@dataclass(frozen=True)
class VariableDecl:
    name: str
    space: StateSpace
    kind: str = "parent"

    def __post_init__(self):
        if not self.name or not isinstance(self.name, str):
            raise SpecError(f"variable name must be a non-empty string, got {self.name!r}")
        if self.kind not in VARIABLE_KINDS:
            raise SpecError(f"unknown variable kind {self.kind!r}")


def _radix(space) -> int:
    if isinstance(space, StateSpace):
        return space.cardinality
    return int(space)


class ConfigIndexer:
    """Bijection between configurations and row indices.

    The first variable is the most significant digit, so iterating indices
    in order walks configurations lexicographically with the first variable
    varying slowest.
    """

    def __init__(self, spaces: Sequence[StateSpace | int]):
        self.spaces = tuple(spaces)
        self.radices = tuple(_radix(s) for s in self.spaces)
        if any(r < 1 for r in self.radices):
            raise SpecError(f"radices must be positive, got {self.radices}")
        self.size = math.prod(self.radices)

    def __len__(self):
        return self.size

    def index_of(self, config: Sequence[int]) -> int:
        if len(config) != len(self.radices):
            raise IndexError(f"config {tuple(config)} has length {len(config)}, expected {len(self.radices)}")
        index = 0
        for value, radix in zip(config, self.radices):
            if not 0 <= value < radix:
                raise IndexError(f"state index {value} out of range for radix {radix}")
            index = index * radix + int(value)
        return index

    def config_of(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.size:
            raise IndexError(f"index {index} out of range [0, {self.size})")
        config = []
        for radix in reversed(self.radices):
            index, digit = divmod(index, radix)
            config.append(digit)
        return tuple(reversed(config))

    def configs(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(*(range(r) for r in self.radices))

    def config_array(self) -> np.ndarray:
        """All configurations as an integer array of shape (size, len(radices))."""
        if not self.radices:
            return np.zeros((1, 0), dtype=np.int64)
        grids = np.indices(self.radices).reshape(len(self.radices), -1)
        return grids.T.copy()


def index_of(config: Sequence[int], indexer: ConfigIndexer) -> int:
    return indexer.index_of(config)


def config_of(index: int, indexer: ConfigIndexer) -> tuple[int, ...]:
    return indexer.config_of(index)


@dataclass(frozen=True, eq=False)
class Cpt:
    """Dense conditional probability table.

    ``rows[r, y]`` is P(child = y | parents = config_of(r)). Only the shape
    is checked on construction; use :func:`validate_cpt` for the
    probability constraints so malformed tables can still be reported on.
    """

    parent_spaces: tuple[StateSpace, ...]
    child_space: StateSpace
    rows: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "parent_spaces", tuple(self.parent_spaces))
        rows = np.array(self.rows, dtype=np.float64)
        n_rows = math.prod(s.cardinality for s in self.parent_spaces)
        expected = (n_rows, self.child_space.cardinality)
        if rows.ndim != 2 or rows.shape != expected:
            raise ShapeError(f"CPT rows have shape {rows.shape}, expected {expected}")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def indexer(self) -> ConfigIndexer:
        return ConfigIndexer(self.parent_spaces)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows.shape

    @property
    def deterministic_flag(self) -> bool:
        ones = self.rows == 1.0
        zeros = self.rows == 0.0
        return bool(np.all(ones.sum(axis=1) == 1) and np.all(ones | zeros))

    def row(self, config: Sequence[int]) -> np.ndarray:
        return self.rows[self.indexer.index_of(config)]

    def prob(self, config: Sequence[int], state: int) -> float:
        return float(self.row(config)[state])

    def normalized(self) -> Cpt:
        """Copy with every row divided by its sum."""
        sums = self.rows.sum(axis=1, keepdims=True)
        if np.any(sums <= 0):
            raise SpecError("cannot normalize a row with non-positive sum")
        return Cpt(self.parent_spaces, self.child_space, self.rows / sums)

    def permute_parents(self, order: Sequence[int]) -> Cpt:
        """Table over parents reordered so new parent j is old parent ``order[j]``."""
        order = list(order)
        if sorted(order) != list(range(len(self.parent_spaces))):
            raise SpecError(f"{order} is not a permutation of the parents")
        dims = [s.cardinality for s in self.parent_spaces] + [self.child_space.cardinality]
        table = self.rows.reshape(dims).transpose(order + [len(order)])
        spaces = tuple(self.parent_spaces[i] for i in order)
        return Cpt(spaces, self.child_space, table.reshape(-1, self.child_space.cardinality))

    def __eq__(self, other):
        if not isinstance(other, Cpt):
            return NotImplemented
        return (
            self.parent_spaces == other.parent_spaces
            and self.child_space == other.child_space
            and np.array_equal(self.rows, other.rows)
        )

    __hash__ = None


class Violation(NamedTuple):
    row: int
    kind: str  # "row_sum" or "range"
    column: int | None
    value: float
    deviation: float

    def __str__(self):
        if self.kind == "row_sum":
            return f"row {self.row} sums to {self.value:.12g} (deviation {self.deviation:+.3g})"
        return f"row {self.row} column {self.column}: entry {self.value:.12g} outside [0, 1]"


def validate_cpt(cpt: Cpt, tolerance: float = ROW_TOLERANCE) -> list[Violation]:
    """List entries outside [0, 1] and rows whose sum is off by more than ``tolerance``.

    The same tolerance applies to the range check so round-off such as
    1 + 2e-16 in a compiled table is not reported.
    """
    rows = np.asarray(cpt.rows)
    n_rows = math.prod(s.cardinality for s in cpt.parent_spaces)
    if rows.shape != (n_rows, cpt.child_space.cardinality):
        raise ShapeError(f"CPT rows have shape {rows.shape}, expected {(n_rows, cpt.child_space.cardinality)}")
    report = []
    for r, row in enumerate(rows):
        for c, value in enumerate(row):
            if not (-tolerance <= value <= 1.0 + tolerance):
                report.append(Violation(r, "range", c, float(value), float(value - np.clip(value, 0.0, 1.0))))
        total = float(row.sum())
        if not abs(total - 1.0) <= tolerance:
            report.append(Violation(r, "row_sum", None, total, total - 1.0))
    return report


def cpt_entry_count(parent_spaces: Sequence[StateSpace | int], child_space: StateSpace | int) -> int:
    """Free parameters of a full CPT: (product of parent cardinalities) * (child cardinality - 1).

    With no parents this is the size of a root marginal, ``s_c - 1``.
    """
    return math.prod(_radix(s) for s in parent_spaces) * (_radix(child_space) - 1)


def deterministic_cpt(parent_spaces: Sequence[StateSpace], child_space: StateSpace, outputs) -> Cpt:
    """0/1 table putting all mass on ``outputs[r]`` in row ``r``."""
    outputs = np.asarray(outputs, dtype=np.int64)
    rows = np.zeros((outputs.size, child_space.cardinality))
    rows[np.arange(outputs.size), outputs] = 1.0
    return Cpt(parent_spaces, child_space, rows)


def marginal_cpt(space: StateSpace, probs) -> Cpt:
    """Root-node table (a single row)."""
    return Cpt((), space, np.asarray(probs, dtype=np.float64).reshape(1, -1))

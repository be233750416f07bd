"""Parent-to-mechanism surjections (equivalently, ordered partitions of the parents)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import NonSurjectiveError, SpecError


@dataclass(frozen=True)
class Surjection:
    """``assignment[j]`` is the mechanism index of parent ``j``."""

    assignment: tuple[int, ...]
    mechanism_count: int | None = None

    def __post_init__(self):
        assignment = tuple(int(a) for a in self.assignment)
        object.__setattr__(self, "assignment", assignment)
        if not assignment:
            raise SpecError("surjection needs at least one parent")
        m = self.mechanism_count if self.mechanism_count is not None else max(assignment) + 1
        object.__setattr__(self, "mechanism_count", int(m))
        if any(not 0 <= a < m for a in assignment):
            raise SpecError(f"assignment {assignment} uses mechanism indices outside [0, {m})")
        missing = sorted(set(range(m)) - set(assignment))
        if missing:
            raise NonSurjectiveError(f"mechanisms {missing} receive no parent (assignment {assignment})")

    @property
    def n(self) -> int:
        return len(self.assignment)

    @property
    def m(self) -> int:
        return self.mechanism_count

    @property
    def blocks(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(j for j, a in enumerate(self.assignment) if a == i) for i in range(self.m))

    @property
    def is_bijective(self) -> bool:
        return self.m == self.n

    @classmethod
    def identity(cls, n: int) -> Surjection:
        return cls(tuple(range(n)))

    @classmethod
    def single_block(cls, n: int) -> Surjection:
        return cls((0,) * n)

    @classmethod
    def from_blocks(cls, blocks: Sequence[Sequence[int]]) -> Surjection:
        n = sum(len(b) for b in blocks)
        assignment = [None] * n
        for i, block in enumerate(blocks):
            if not block:
                raise NonSurjectiveError(f"block {i} is empty")
            for j in block:
                if not 0 <= j < n or assignment[j] is not None:
                    raise SpecError(f"blocks {blocks} are not a partition of range({n})")
                assignment[j] = i
        return cls(tuple(assignment), len(blocks))


def blocks_of(phi: Surjection) -> list[tuple[int, ...]]:
    return list(phi.blocks)


def is_contiguous(phi: Surjection) -> bool:
    """True when every block occupies consecutive parent positions."""
    seen = set()
    previous = None
    for a in phi.assignment:
        if a != previous:
            if a in seen:
                return False
            seen.add(a)
            previous = a
    return True


def contiguous_reorder(phi: Surjection) -> tuple[tuple[int, ...], Surjection]:
    """Group parents block by block, blocks in order of first appearance.

    Returns ``(perm, reordered)`` where new position ``j`` holds old parent
    ``perm[j]``; order within a block is preserved and mechanisms are
    renumbered so the first parent feeds mechanism 0.
    """
    order = []
    for a in phi.assignment:
        if a not in order:
            order.append(a)
    perm = tuple(j for a in order for j, b in enumerate(phi.assignment) if b == a)
    relabel = {a: i for i, a in enumerate(order)}
    reordered = Surjection(tuple(relabel[phi.assignment[j]] for j in perm), phi.m)
    return perm, reordered


def permute_surjection(phi: Surjection, perm: Sequence[int]) -> Surjection:
    """``phi`` after reordering parents (new parent j = old parent ``perm[j]``), mechanisms renumbered by first appearance."""
    relabel = {}
    for j in perm:
        relabel.setdefault(phi.assignment[j], len(relabel))
    return Surjection(tuple(relabel[phi.assignment[j]] for j in perm), phi.m)

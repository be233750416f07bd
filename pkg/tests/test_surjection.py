import pytest
from hypothesis import given, strategies as st

from sici.errors import NonSurjectiveError, SpecError
from sici.surjection import Surjection, blocks_of, contiguous_reorder, is_contiguous


@pytest.mark.parametrize("assignment, blocks", [
    ((0, 0, 1), [(0, 1), (2,)]),
    ((0, 1, 2), [(0,), (1,), (2,)]),
    ((0, 0, 0), [(0, 1, 2)]),
])
def test_blocks_examples(assignment, blocks):
    assert blocks_of(Surjection(assignment)) == blocks


@pytest.mark.parametrize("assignment, expected", [((0, 0, 1, 1), True), ((0, 1, 0), False), ((0, 0, 1, 0), False)])
def test_contiguity_examples(assignment, expected):
    assert is_contiguous(Surjection(assignment)) is expected


@pytest.mark.parametrize("assignment, perm, reordered", [
    ((0, 1, 0), (0, 2, 1), (0, 0, 1)),
    ((0, 0, 1), (0, 1, 2), (0, 0, 1)),
    ((1, 0, 1, 0), (0, 2, 1, 3), (0, 0, 1, 1)),
])
def test_contiguous_reorder_examples(assignment, perm, reordered):
    p, phi = contiguous_reorder(Surjection(assignment))
    assert p == perm and phi.assignment == reordered


def test_not_onto_rejected():
    with pytest.raises(NonSurjectiveError):
        Surjection((0, 2), 3)
    with pytest.raises(SpecError):
        Surjection((0, 3), 2)
    with pytest.raises(NonSurjectiveError):
        Surjection.from_blocks([(0,), ()])


assignments = st.integers(1, 7).flatmap(
    lambda m: st.lists(st.integers(0, m - 1), min_size=m, max_size=9).filter(lambda a: set(a) == set(range(m))))


@given(assignments)
def test_blocks_form_partition(assignment):
    phi = Surjection(tuple(assignment))
    blocks = blocks_of(phi)
    flat = sorted(j for b in blocks for j in b)
    assert flat == list(range(phi.n)) and all(blocks) and phi.m <= phi.n


@given(assignments)
def test_reorder_is_contiguous_stable_and_idempotent(assignment):
    phi = Surjection(tuple(assignment))
    perm, new = contiguous_reorder(phi)
    assert sorted(perm) == list(range(phi.n))
    assert is_contiguous(new)
    assert new.assignment[0] == 0 and new.assignment[-1] == phi.m - 1
    # stable within blocks
    for block in phi.blocks:
        positions = [perm.index(j) for j in block]
        assert positions == sorted(positions)
    perm2, again = contiguous_reorder(new)
    assert again == new and perm2 == tuple(range(phi.n))

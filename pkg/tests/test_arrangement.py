from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import piece, union, vec
from polyvar.arrangement import cells_within, set_equal, set_subset, sign_cells
from polyvar.generators import random_set
from polyvar.polyhedron import PolyhedralSet


def test_sign_cells_of_the_coordinate_arrangement():
    cells = sign_cells([vec(1, 0), vec(0, 1)])
    assert len(cells) == 9
    assert len({cell.signs for cell in cells}) == 9


def test_cells_within_a_region(orthant):
    cells = cells_within(orthant, [(vec(1, -1), 0)])
    for cell in cells:
        assert orthant.contains(cell.witness)
    assert len(cells) >= 3


def test_subset_with_witness(orthant):
    assert set_subset(orthant, PolyhedralSet.whole(2))
    result = set_subset(PolyhedralSet.whole(2), orthant)
    assert not result
    assert not orthant.contains(result.witness)


def test_union_covering_a_piece(halfplanes):
    upper = union(2, piece(2, [(0, -1, 0), (1, 0, 0)]))
    assert set_subset(upper, halfplanes)
    assert not set_subset(PolyhedralSet.whole(2), halfplanes)


def test_equality_ignores_piece_order(axes):
    swapped = union(2, piece(2, eqs=[(0, 1, 0)]), piece(2, eqs=[(1, 0, 0)]))
    assert set_equal(axes, swapped)


@settings(deadline=None, max_examples=20)
@given(st.integers(min_value=0, max_value=10_000))
def test_random_sets_contain_themselves(seed):
    target = random_set(seed, 2, 2)
    assert set_subset(target, target)
    assert set_subset(target, target.union(PolyhedralSet.whole(2)))

import sys
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))


def test_hnf_is_canonical_for_equal_spans():
    from lattice import hnf

    first = hnf([[2, 4], [0, 6], [2, 10]])
    second = hnf([[2, -2], [4, 2]])
    assert first == second == [[2, 4], [0, 6]]


def test_hnf_drops_zero_rows_and_reduces_above_pivots():
    from lattice import hnf

    assert hnf([[0, 0], [3, 7], [0, 5]]) == [[3, 2], [0, 5]]


def test_kernel_returns_integer_relations():
    from lattice import kernel

    rows = [[1, 2], [2, 4], [3, 6]]
    relations = kernel(rows)
    assert len(relations) == 2
    for x in relations:
        assert [sum(x[i] * rows[i][j] for i in range(3)) for j in range(2)] == [0, 0]


def test_intersect_of_coprime_multiples():
    from lattice import hnf, intersect

    assert intersect([[2, 0], [0, 1]], [[3, 0], [0, 1]]) == hnf([[6, 0], [0, 1]])


def test_rational_hnf_scales_back_to_fractions():
    from lattice import rational_hnf

    result = rational_hnf([[Fraction(1, 2), 0], [0, Fraction(1, 3)], [1, 1]])
    assert result == ((Fraction(1, 2), Fraction(0)), (Fraction(0), Fraction(1, 3)))


def test_determinant_solve_and_index():
    from lattice import determinant, in_lattice, index, solve

    assert determinant([[2, 1], [1, 1]]) == 1
    assert determinant([[1, 2], [2, 4]]) == 0
    assert solve([[2, 1], [1, 3]], [3, 5]) == [Fraction(4, 5), Fraction(7, 5)]
    assert solve([[1, 2], [2, 4]], [1, 1]) is None
    assert index([[2, 0], [0, 3]], [[1, 0], [0, 1]]) == 6
    assert in_lattice([[2, 1], [0, 3]], [4, 5])
    assert not in_lattice([[2, 1], [0, 3]], [4, 3])

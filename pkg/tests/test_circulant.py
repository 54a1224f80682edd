from fractions import Fraction

import numpy as np
import pytest

from errwlab.circulant import (
    alternating_vector,
    boundary_totals,
    incidence_determinant,
    incidence_matrix,
    rational_nullspace,
    transpose_apply,
    transpose_kernel_basis,
    transpose_rank,
)


def test_matrix_rows_mark_both_endpoints():
    m = incidence_matrix(5)
    expected = np.array(
        [
            [1, 1, 0, 0, 0],
            [0, 1, 1, 0, 0],
            [0, 0, 1, 1, 0],
            [0, 0, 0, 1, 1],
            [1, 0, 0, 0, 1],
        ]
    )
    assert np.array_equal(m, expected)
    for l in (3, 4, 7):
        assert incidence_matrix(l).sum(axis=0).tolist() == [2] * l
        assert incidence_matrix(l).sum(axis=1).tolist() == [2] * l


def test_determinant_alternates_with_parity():
    for l in range(3, 13):
        det = incidence_determinant(l)
        assert isinstance(det, int)
        assert det == 1 - (-1) ** l


def test_determinant_matches_numpy_in_float():
    for l in (3, 4, 6, 9):
        ref = round(float(np.linalg.det(incidence_matrix(l).astype(float))))
        assert incidence_determinant(l) == ref


def test_boundary_totals_is_matrix_apply():
    occupation = np.array([1.0, 0.2, 0.0, 2.0])
    z = boundary_totals(4, occupation)
    assert np.allclose(z, incidence_matrix(4) @ occupation)


def test_transpose_apply_matches_matrix():
    beta = np.array([2.0, -1.0, 0.5, 3.0])
    out = transpose_apply(4, beta)
    assert np.allclose(out, incidence_matrix(4).T @ beta)


def test_kernel_dimension_dichotomy():
    assert len(transpose_kernel_basis(4)) == 1
    assert len(transpose_kernel_basis(6)) == 1
    assert len(transpose_kernel_basis(3)) == 0
    assert len(transpose_kernel_basis(5)) == 0
    assert transpose_rank(4) == 3
    assert transpose_rank(5) == 5


def test_even_kernel_is_the_alternating_vector():
    for l in (4, 6, 8):
        (basis,) = transpose_kernel_basis(l)
        alt = alternating_vector(l)
        assert basis == alt or basis == [-x for x in alt]
        # It really annihilates the transpose map.
        image = np.asarray(transpose_apply(l, np.asarray(basis, dtype=float)))
        assert np.all(image == 0)


def test_rational_nullspace_small_examples():
    # x + y = 0 over two unknowns: one free direction.
    rows = [[Fraction(1), Fraction(1)]]
    (vec,) = rational_nullspace(rows)
    assert vec == [1, -1] or vec == [-1, 1]
    # Full-rank square system: trivial nullspace.
    rows = [[Fraction(1), Fraction(0)], [Fraction(0), Fraction(1)]]
    assert rational_nullspace(rows) == []
    # Dependent rows leave the same single direction.
    rows = [[Fraction(2), Fraction(2)], [Fraction(3), Fraction(3)]]
    assert len(rational_nullspace(rows)) == 1


def test_rational_nullspace_returns_primitive_integer_vectors():
    rows = [[Fraction(1, 3), Fraction(1, 6)]]
    (vec,) = rational_nullspace(rows)
    assert all(isinstance(x, int) for x in vec)
    # 1/3 x + 1/6 y = 0 -> y = -2x; primitive representative (1, -2).
    assert sorted(map(abs, vec)) == [1, 2]


def test_length_validation():
    with pytest.raises(ValueError):
        incidence_matrix(2)
    with pytest.raises(ValueError):
        incidence_determinant(1)

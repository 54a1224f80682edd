"""Vertex-edge incidence circulant of a cycle, over exact arithmetic.

Row i of the matrix is the 0/1 indicator of the endpoint pair {i, i+1} of
edge i, so applying it to a vector of per-vertex quantities produces the
per-edge boundary totals.  The determinant alternates with the cycle
parity: regular for odd length, singular with a one-dimensional kernel
(the alternating vector) for even length.  That sign flip is the algebraic
content behind every even-only identity in this package, so everything
here is computed exactly over rationals.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import List, Sequence

import numpy as np

from .cycles import MIN_CYCLE_LENGTH


def _check_length(length: int) -> None:
    if length < MIN_CYCLE_LENGTH:
        raise ValueError(
            f"cycle length must be >= {MIN_CYCLE_LENGTH}, got {length}"
        )


def incidence_matrix(length: int) -> np.ndarray:
    """The l x l 0/1 matrix with row i marking vertices i and i+1 mod l."""
    _check_length(length)
    m = np.zeros((length, length), dtype=np.int64)
    for i in range(length):
        m[i, i] = 1
        m[i, (i + 1) % length] = 1
    return m


def boundary_totals(length: int, per_vertex: Sequence[float]) -> np.ndarray:
    """Apply the incidence matrix: entry i is per_vertex[i] + per_vertex[i+1]."""
    v = np.asarray(per_vertex)
    if v.shape != (length,):
        raise ValueError(f"need {length} per-vertex values, got shape {v.shape}")
    return v + np.roll(v, -1)


def transpose_apply(length: int, beta: Sequence) -> list:
    """Apply the transposed incidence matrix: entry j is beta[j-1] + beta[j]."""
    b = list(beta)
    if len(b) != length:
        raise ValueError(f"need {length} coefficients, got {len(b)}")
    return [b[j - 1] + b[j] for j in range(length)]


def incidence_determinant(length: int) -> int:
    """Exact determinant via Gaussian elimination over rationals.

    Independent of the closed form it is tested against; the result is
    asserted integral before returning.
    """
    _check_length(length)
    m: List[List[Fraction]] = [
        [Fraction(int(x)) for x in row] for row in incidence_matrix(length)
    ]
    det = Fraction(1)
    for col in range(length):
        pivot_row = next(
            (r for r in range(col, length) if m[r][col] != 0), None
        )
        if pivot_row is None:
            return 0
        if pivot_row != col:
            m[col], m[pivot_row] = m[pivot_row], m[col]
            det = -det
        pivot = m[col][col]
        det *= pivot
        for r in range(col + 1, length):
            if m[r][col] != 0:
                factor = m[r][col] / pivot
                for c in range(col, length):
                    m[r][c] -= factor * m[col][c]
    if det.denominator != 1:
        raise AssertionError(f"determinant {det} is not an integer")
    return int(det)


def rational_nullspace(rows: Sequence[Sequence]) -> List[List[int]]:
    """Nullspace basis of a rational matrix, as primitive integer vectors.

    Gauss-Jordan over Fractions; the basis vectors are scaled to clear
    denominators so callers can compare them entrywise.
    """
    mat = [[Fraction(x) for x in row] for row in rows]
    if not mat:
        raise ValueError("nullspace of an empty matrix is undefined")
    width = len(mat[0])
    if any(len(row) != width for row in mat):
        raise ValueError("ragged matrix rows")
    pivots = []
    row = 0
    for col in range(width):
        pivot_row = next(
            (r for r in range(row, len(mat)) if mat[r][col] != 0), None
        )
        if pivot_row is None:
            continue
        mat[row], mat[pivot_row] = mat[pivot_row], mat[row]
        pivot = mat[row][col]
        mat[row] = [x / pivot for x in mat[row]]
        for r in range(len(mat)):
            if r != row and mat[r][col] != 0:
                factor = mat[r][col]
                mat[r] = [x - factor * y for x, y in zip(mat[r], mat[row])]
        pivots.append(col)
        row += 1
    free_cols = [c for c in range(width) if c not in pivots]
    basis = []
    for free in free_cols:
        vec = [Fraction(0)] * width
        vec[free] = Fraction(1)
        for r, col in enumerate(pivots):
            vec[col] = -mat[r][free]
        denom = 1
        for x in vec:
            denom = denom * x.denominator // math.gcd(denom, x.denominator)
        basis.append([int(x * denom) for x in vec])
    return basis


def transpose_kernel_basis(length: int) -> List[List[int]]:
    """Basis of the kernel of the transposed incidence matrix, exactly.

    The kernel equations read beta[j-1] + beta[j] = 0 for all j, which
    forces the alternating vector; it closes up around the cycle only when
    the length is even.  Solved by elimination rather than by that
    argument, so the closed form stays an independent check.
    """
    _check_length(length)
    return rational_nullspace(incidence_matrix(length).T.tolist())


def transpose_rank(length: int) -> int:
    return length - len(transpose_kernel_basis(length))


def alternating_vector(length: int) -> List[int]:
    """(+1, -1, +1, ...): the even-length kernel direction."""
    _check_length(length)
    return [1 if j % 2 == 0 else -1 for j in range(length)]

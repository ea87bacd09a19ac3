from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from src.core.difference_operators import blocks, build_dense_H, green_matrix
from src.core.exact_numeric import (RationalMatrix, dot, float_solve, format_decimal, format_rational, inverse,
                                    parse_rationals, rank, solve_linear, to_rational)
from src.core.exceptions import DimensionMismatchError, DomainError, SingularSystemError, VerificationError

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)


def test_to_rational():
    """Тест разбора рациональных чисел"""
    assert to_rational("1/3") == Fraction(1, 3)
    assert to_rational(" -2 ") == -2
    assert to_rational("0.25") == Fraction(1, 4)
    assert to_rational(np.int64(7)) == 7
    for bad in ("1/0", "abc", 0.5, True, None):
        with pytest.raises(DomainError):
            to_rational(bad)


def test_formatting():
    """Тест вывода чисел"""
    assert format_rational(Fraction(3, 1)) == "3"
    assert format_rational(Fraction(-2, 6)) == "-1/3"
    assert format_decimal(Fraction(1, 3)) == "0.333333333333"
    assert format_decimal(Fraction(2, 3)) == "0.666666666667"
    assert format_decimal(1) == "1"
    assert format_decimal(0.1) == "0.1"


@seed(20240601)
@given(st.lists(rationals, min_size=1, max_size=20))
def test_rational_strings_round_trip(values):
    """Тест повторного разбора выведенных чисел"""
    assert parse_rationals(format_rational(v) for v in values) == tuple(values)


def test_solve_linear_examples():
    """Тест точного решения систем"""
    assert solve_linear(RationalMatrix.identity(2), [3, Fraction(1, 2)]) == [3, Fraction(1, 2)]
    assert solve_linear(RationalMatrix.from_dense([[2, 0], [0, 4]]), [1, 1]) == [Fraction(1, 2), Fraction(1, 4)]


def test_solve_linear_green_columns():
    """Тест решения X_1 x = столбец -G_1 при N=3"""
    x = blocks(3, 1).X
    g = green_matrix(3, 1)
    for k in range(x.n_rows):
        column = [-g[i, k] for i in range(g.n_rows)]
        solution = solve_linear(x, column)
        assert solution == [Fraction(1 if i == k else 0) for i in range(x.n_rows)]


def test_solve_linear_errors():
    """Тест различения вырожденности и несогласованных размеров"""
    with pytest.raises(SingularSystemError):
        solve_linear(RationalMatrix.from_dense([[1, 2], [2, 4]]), [1, 2])
    with pytest.raises(DimensionMismatchError):
        solve_linear(RationalMatrix.identity(2), [1, 2, 3])
    with pytest.raises(DimensionMismatchError):
        solve_linear(RationalMatrix.zeros(2, 3), [1, 2])
    with pytest.raises(DimensionMismatchError):
        RationalMatrix.identity(2) @ RationalMatrix.identity(3)


def test_rank():
    """Тест точного ранга"""
    assert rank(RationalMatrix.identity(3)) == 3
    assert rank(RationalMatrix.zeros(2, 2)) == 0
    assert rank(build_dense_H(2, 0)) == 1
    assert rank(RationalMatrix.from_dense([[1, 2, 3], [2, 4, 6], [1, 0, 1]])) == 2


def test_matrix_algebra():
    """Тест стандартных операций"""
    a = RationalMatrix.from_dense([["1/2", 0, 3], [1, -1, "2/3"]])
    assert RationalMatrix.identity(2) @ a == a
    assert a.T.T == a
    assert (a + a) == a.scale(2)
    assert (a - a) == RationalMatrix.zeros(2, 3)
    assert a.matvec([1, 1, 1]) == [Fraction(7, 2), Fraction(2, 3)]
    assert a.submatrix([1], [0, 2]).to_strings() == [["1", "2/3"]]
    assert dot([1, 2], [Fraction(1, 2), 3]) == Fraction(13, 2)
    block = RationalMatrix.block([[RationalMatrix.identity(1), RationalMatrix.zeros(1, 1)],
                                  [RationalMatrix.zeros(1, 1), RationalMatrix.identity(1)]])
    assert block == RationalMatrix.identity(2)


def test_green_inverse_oracle():
    """Тест X_1·(-G_1) = I при N=3"""
    x = blocks(3, 1).X
    g = green_matrix(3, 1)
    assert x @ (-g) == RationalMatrix.identity(x.n_rows)
    assert inverse(x) == -g


@seed(20240601)
@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=1, max_value=6), st.data())
def test_solve_recovers_solution(size, data):
    """Тест solve_linear(A, A·x) = x"""
    rows = [data.draw(st.lists(rationals, min_size=size, max_size=size)) for _ in range(size)]
    for i in range(size):
        rows[i][i] += 200
    a = RationalMatrix.from_dense(rows)
    x = data.draw(st.lists(rationals, min_size=size, max_size=size))
    assert solve_linear(a, a.matvec(x)) == x


@seed(20240601)
@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=1, max_value=5), st.integers(min_value=1, max_value=5), st.data())
def test_rank_invariants(n_rows, n_cols, data):
    """Тест rank(A) = rank(Aᵀ) и инвариантности к перестановке строк"""
    grid = [data.draw(st.lists(st.sampled_from([0, 1, -1, Fraction(1, 2)]), min_size=n_cols, max_size=n_cols))
            for _ in range(n_rows)]
    if not any(any(row) for row in grid):
        grid[0][0] = 1
    a = RationalMatrix.from_dense(grid)
    assert rank(a) == rank(a.T)
    assert rank(RationalMatrix.from_dense(list(reversed(grid)))) == rank(a)


@seed(20240601)
@given(rationals, rationals)
def test_exact_arithmetic(a, b):
    """Тест точности: (a + b) - b = a"""
    assert (a + b) - b == a


def test_float_solve():
    """Тест решения в плавающей точке с проверкой невязки"""
    a = RationalMatrix.from_dense([[2, 1], [1, 3]])
    x, residual = float_solve(a, [3, 4])
    assert np.allclose(x, [1.0, 1.0])
    assert residual <= 1e-9
    with pytest.raises(SingularSystemError):
        float_solve(RationalMatrix.from_dense([[1, 1], [1, 1]]), [1, 2])
    with pytest.raises(VerificationError):
        float_solve(RationalMatrix.from_dense([[1, 0], [0, "1/1000000000000"]]), [1, 1], tolerance=-1.0)

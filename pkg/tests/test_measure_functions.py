from fractions import Fraction

import pytest

from src.core.difference_operators import energy
from src.core.exact_numeric import random_rational_vector
from src.core.exceptions import AlphabetMismatchError, DomainError, LevelMismatchError
from src.core.measure_functions import (CylinderFunction, DyadicCoordinateSum, LevelVector, alphabet_of,
                                        approximation_error, bernoulli_measure, harmonic_approximation,
                                        indicator, min_energy_extension, restrict)
from src.core.shift_space import Point, enumerate_level


def P(text, n=2):
    return Point.parse(text, n)


def test_bernoulli_measure():
    """Тест равномерной меры Бернулли"""
    assert bernoulli_measure(2, (1, 1)) == Fraction(1, 4)
    assert bernoulli_measure(3, ()) == 1
    assert bernoulli_measure(3, (1, 2, 3)) == Fraction(1, 27)
    with pytest.raises(DomainError):
        bernoulli_measure(2, (3,))


def test_indicator():
    """Тест индикаторов χ_p^m"""
    chi = indicator(P("2~1"), 1)
    assert chi.depth == 2
    assert chi.values == (0, 0, 1, 0)
    assert indicator(P("~1"), 0).values == (1, 0)
    assert chi.integrate() == Fraction(1, 4)
    with pytest.raises(DomainError):
        indicator(P("12~1"), 1)


@pytest.mark.parametrize("n,m", [(2, 2), (3, 2), (4, 1)])
def test_indicator_integrals(n, m):
    """Тест ∫χ_p^m dμ = μ([p_1 ... p_{m+1}])"""
    for p in enumerate_level(n, m):
        assert indicator(p, m).integrate() == bernoulli_measure(n, p.head(m + 1)) == Fraction(1, n ** (m + 1))


def test_evaluate():
    """Тест вычисления цилиндрической функции в точке"""
    chi = indicator(P("2~1"), 1)
    assert chi(P("21~2")) == 1
    assert chi(P("~2")) == 0
    assert CylinderFunction.constant(3, Fraction(5, 7))(Point.parse("121~3", 3)) == Fraction(5, 7)
    with pytest.raises(AlphabetMismatchError):
        chi(Point.parse("~1", 3))


def test_refine_and_simplify():
    """Тест уточнения и упрощения глубины"""
    one = CylinderFunction.constant(2, 1)
    assert one.refine(2).values == (1, 1, 1, 1)
    f = CylinderFunction(3, 1, (1, Fraction(1, 2), 0))
    assert f.refine(1) == f
    assert f.refine(3).integrate() == f.integrate() == Fraction(1, 2)
    assert f.refine(3).simplify() == f
    assert f.refine(2).same_function(f)
    with pytest.raises(DomainError):
        f.refine(2).refine(1)


def test_arithmetic():
    """Тест линейных операций и произведения"""
    f = CylinderFunction(2, 1, (1, 2))
    g = CylinderFunction(2, 2, (1, 0, 0, 1))
    assert (f + g).values == (2, 1, 2, 3)
    assert (f - f).simplify() == CylinderFunction.constant(2, 0)
    assert (f * g).values == (1, 0, 0, 2)
    assert (2 * f).values == (2, 4)
    assert (-f).values == (-1, -2)
    assert (f * 0).integrate() == 0
    assert (indicator(P("~1"), 1) * indicator(P("2~1"), 1)).integrate() == 0
    with pytest.raises(AlphabetMismatchError):
        f + CylinderFunction.constant(3, 1)


def test_cell_integral():
    """Тест интегралов по цилиндрам"""
    f = CylinderFunction(2, 2, (1, 2, 3, 4))
    assert f.cell_integral((1,)) == Fraction(3, 4)
    assert f.cell_integral((2, 1, 1)) == Fraction(3, 8)
    assert f.cell_integral(()) == f.integrate() == Fraction(5, 2)
    assert f.sup_norm() == 4


def test_function_json():
    """Тест формата файла функции"""
    f = CylinderFunction(3, 1, (0, Fraction(1, 3), -2))
    data = f.to_json_dict()
    assert data == {"N": 3, "depth": 1, "values": ["0", "1/3", "-2"]}
    assert CylinderFunction.from_json_dict(data) == f
    with pytest.raises(DomainError):
        CylinderFunction.from_json_dict({"N": 3, "values": []})
    with pytest.raises(DomainError):
        CylinderFunction(3, 1, (1, 2))


def test_level_vector():
    """Тест векторов на V_m"""
    v = LevelVector.from_mapping(2, 1, {P("2~1"): 5})
    assert v.values == (0, 0, 5, 0)
    assert v.at(P("2~1")) == 5
    assert (v + v).values == v.scale(2).values
    assert LevelVector.constant(3, 1, 2).is_constant()
    assert LevelVector.from_json_dict(v.to_json_dict()) == v
    with pytest.raises(LevelMismatchError):
        v + LevelVector.constant(2, 0, 1)
    with pytest.raises(DomainError):
        LevelVector(2, 1, (1, 2))


def test_restrict():
    """Тест ограничения на V_m"""
    assert restrict(CylinderFunction.constant(3, 1), 2).values == (1,) * 27
    assert restrict(indicator(P("~1"), 0), 1).values == (1, 0, 0, 1)
    with pytest.raises(DomainError):
        alphabet_of(lambda p: Fraction(0))
    assert alphabet_of(lambda p: Fraction(0), 4) == 4


def test_min_energy_extension():
    """Тест продолжения с минимальной энергией"""
    assert min_energy_extension(LevelVector(2, 0, (1, 0))).values == (1, 0)
    assert min_energy_extension(LevelVector(2, 1, (1, 0, 0, 1))).values == (1, 1, 0, 0)
    assert min_energy_extension(LevelVector.constant(3, 2, 7)).simplify() == CylinderFunction.constant(3, 7)


@pytest.mark.parametrize("n,m", [(2, 2), (3, 1), (3, 2), (4, 1)])
def test_extension_is_section_and_preserves_energy(n, m, rng):
    """Тест restrict∘extension = id и сохранения 𝔈_{H_m} на следующих уровнях"""
    for _ in range(5):
        v = LevelVector(n, m, tuple(random_rational_vector(rng, n ** (m + 1))))
        extension = min_energy_extension(v)
        assert restrict(extension, m) == v
        assert energy(m + 1, restrict(extension, m + 1)) == energy(m, v)
        assert energy(m + 2, restrict(extension, m + 2)) == energy(m, v)


def test_harmonic_approximation():
    """Тест гармонического приближения u_m"""
    dyadic = DyadicCoordinateSum(2)
    assert harmonic_approximation(dyadic, 0).values == (1, 2)
    f = CylinderFunction(2, 2, (1, 2, 3, 4))
    assert harmonic_approximation(f, 1) == f
    assert harmonic_approximation(CylinderFunction.constant(3, 5), 2).simplify() == CylinderFunction.constant(3, 5)
    for m in range(3):
        approximation = harmonic_approximation(dyadic, m)
        assert all(approximation(p) == dyadic(p) for p in enumerate_level(2, m))


@pytest.mark.parametrize("n", [2, 3])
def test_approximation_error_halves(n):
    """Тест sup|u - u_m| по V_{m+2} = (N-1)/2^{m+1} для суммы x_i 2^{-i}"""
    dyadic = DyadicCoordinateSum(n)
    errors = [approximation_error(dyadic, m) for m in range(1, 6 if n == 2 else 5)]
    for m, error in enumerate(errors, start=1):
        assert error == Fraction(n - 1, 2 ** (m + 1))
    assert all(b / a == Fraction(1, 2) for a, b in zip(errors, errors[1:]))

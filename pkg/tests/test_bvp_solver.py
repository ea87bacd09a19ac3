from fractions import Fraction

import pytest

from src.core.bvp_solver import (BoundaryData, add_harmonic_perturbation, evaluate_solution, solve, superpose,
                                 verify_solution)
from src.core.exceptions import AlphabetMismatchError, DomainError
from src.core.green_laplacian import green_operator_fast
from src.core.measure_functions import CylinderFunction, restrict
from src.core.shift_space import Point, enumerate_level, fixed_point


def P(text, n=2):
    return Point.parse(text, n)


def random_cylinder(rng, n, depth):
    return CylinderFunction(n, depth, tuple(Fraction(int(v)) for v in rng.integers(-4, 5, size=n ** depth)))


def test_solve_examples():
    """Тест решений для простых данных"""
    u = solve(CylinderFunction.constant(2, 0), BoundaryData(2, (0, 1)))
    assert u(fixed_point(2, 1)) == 0
    assert u(fixed_point(2, 2)) == 1

    u = solve(CylinderFunction.constant(2, 1), BoundaryData(2, (0, 0)))
    assert u(P("2~1")) == Fraction(-1, 4)
    assert evaluate_solution(u, P("2~1")) == Fraction(-1, 4)

    u = solve(CylinderFunction.constant(3, 1), BoundaryData(3, (1, 1, 1)))
    assert u(fixed_point(3, 1)) == 1


def test_solution_is_harmonic_minus_green(rng):
    """Тест u = Σ ζ(l̇)·1_{[l]} - G_μf"""
    f = random_cylinder(rng, 3, 2)
    zeta = BoundaryData(3, (1, Fraction(1, 2), -3))
    u = solve(f, zeta)
    for p in enumerate_level(3, 2):
        assert u(p) == zeta.at(p.symbol(1)) - green_operator_fast(f, p)


@pytest.mark.parametrize("n,depth", [(2, 0), (2, 3), (3, 1), (3, 2)])
def test_verify_solution(n, depth, rng):
    """Тест граничных значений и нулевой невязки начиная с max(1, K-1)"""
    f = random_cylinder(rng, n, depth)
    zeta = BoundaryData(n, tuple(range(n)))
    u = solve(f, zeta)
    assert 1 <= u.exact_from_level <= max(1, depth - 1)
    report = verify_solution(u, 5 if n == 2 else 4)
    assert report.passed and report.boundary_exact
    assert [level.m for level in report.levels] == list(range(1, report.m_max + 1))
    for level in report.levels:
        if level.asserted:
            assert level.max_residual == "0"
    assert all(level.asserted for level in report.levels if level.m >= u.exact_from_level)


def test_exact_from_level():
    """Тест уровня, с которого невязка обязана быть нулевой"""
    zeta = BoundaryData(2, (0, 0))
    assert solve(CylinderFunction.constant(2, 1), zeta).exact_from_level == 1
    deep = CylinderFunction(2, 4, tuple(range(16)))
    assert solve(deep, zeta).exact_from_level == 3


def test_harmonic_perturbation():
    """Тест неединственности: u + h с h = 0 на V₀ тоже решение"""
    u = solve(CylinderFunction.constant(2, 1), BoundaryData(2, (0, 1)))
    h = CylinderFunction(2, 2, (0, 1, 1, 0))
    perturbed = add_harmonic_perturbation(u, h)
    assert perturbed.exact_from_level == 2
    report = verify_solution(perturbed, 5)
    assert report.passed
    assert perturbed(P("1~2")) == u(P("1~2")) + 1
    assert perturbed(fixed_point(2, 2)) == 1

    with pytest.raises(DomainError):
        add_harmonic_perturbation(u, CylinderFunction(2, 2, (1, 0, 0, 0)))
    with pytest.raises(AlphabetMismatchError):
        add_harmonic_perturbation(u, CylinderFunction.constant(3, 0))


def test_superpose(rng):
    """Тест линейности решения по (f, ζ)"""
    f1, f2 = random_cylinder(rng, 3, 1), random_cylinder(rng, 3, 2)
    z1, z2 = BoundaryData(3, (1, 0, 0)), BoundaryData(3, (0, 2, Fraction(1, 3)))
    combined = superpose(2, (f1, z1), Fraction(-1, 2), (f2, z2))
    first, second = solve(f1, z1), solve(f2, z2)
    for p in enumerate_level(3, 2):
        assert combined(p) == 2 * first(p) - second(p) / 2
    assert verify_solution(combined, 3).passed


def test_sample():
    """Тест цилиндрического приближения решения"""
    u = solve(CylinderFunction.constant(2, 1), BoundaryData(2, (0, 1)))
    sampled = u.sample(3)
    assert restrict(sampled, 3) == restrict(u, 3)
    assert sampled.n_symbols == 2


def test_boundary_data():
    """Тест граничных данных и их формата"""
    zeta = BoundaryData(3, ("1/2", 0, -1))
    assert zeta.at(1) == Fraction(1, 2)
    assert zeta.as_cylinder().values == (Fraction(1, 2), 0, -1)
    data = zeta.to_json_dict()
    assert data == {"N": 3, "values": ["1/2", "0", "-1"]}
    assert BoundaryData.from_json_dict(data) == zeta
    with pytest.raises(DomainError):
        BoundaryData(3, (1, 2))
    with pytest.raises(DomainError):
        BoundaryData.from_json_dict({"values": ["1"]})
    with pytest.raises(AlphabetMismatchError):
        solve(CylinderFunction.constant(2, 1), zeta)

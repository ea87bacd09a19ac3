"""Энергия, условная минимизация формы Дирихле и эффективное сопротивление"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Tuple, Union

import numpy as np

from .difference_operators import (DEFAULT_MAX_DENSE_POINTS, energy, get_operator,
                                   level_energy_increment)
from .exact_numeric import Number, RationalMatrix, float_solve, solve_linear
from .exceptions import DomainError, NoAdmissiblePairError, SingularSystemError, VerificationError
from .measure_functions import CylinderFunction, LevelVector, PointEvaluator, alphabet_of, restrict
from .shift_space import Point, Word, connecting_chain, enumerate_level, new_neighbours

logger = logging.getLogger(__name__)

DEFAULT_EXACT_SOLVE_LIMIT = 500
DEFAULT_FLOAT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class EnergyTrace:
    """Последовательность (m, 𝔈_{H_m}(u|_{V_m}))"""
    entries: Tuple[Tuple[int, Fraction], ...]
    status: str

    @property
    def values(self) -> List[Fraction]:
        return [value for _, value in self.entries]

    @property
    def stabilized(self) -> bool:
        return self.status == "stabilized"

    def is_non_decreasing(self) -> bool:
        values = self.values
        return all(a <= b for a, b in zip(values, values[1:]))


def energy_trace(u: PointEvaluator, m_max: int, n_symbols: Optional[int] = None) -> EnergyTrace:
    """𝔈_{H_m}(u|_{V_m}) для m = 0..m_max.

    Для цилиндрической функции глубины K значения постоянны начиная с m = K-1;
    в этом случае последовательность помечается как стабилизировавшаяся.
    """
    n = alphabet_of(u, n_symbols)
    entries = []
    for m in range(m_max + 1):
        entries.append((m, energy(m, restrict(u, m, n))))
        logger.debug(f"Энергия уровня {m}: {entries[-1][1]}")
    values = [v for _, v in entries]
    if any(b < a for a, b in zip(values, values[1:])):
        raise VerificationError("energy_monotone", n, detail="последовательность энергий убывает")
    if isinstance(u, CylinderFunction) and m_max >= max(0, u.simplify().depth - 1):
        status = "stabilized"
    elif len(set(values)) == 1:
        status = "constant-so-far"
    else:
        status = "growing"
    return EnergyTrace(tuple(entries), status)


def energy_of_cylinder(f: CylinderFunction) -> Fraction:
    """ℰ(f) = 𝔈_{H_{K-1}}(f|_{V_{K-1}}); 0 при K = 0"""
    f = f.simplify()
    if f.depth == 0:
        return Fraction(0)
    return energy(f.depth - 1, restrict(f, f.depth - 1))


def extension_defect(v: LevelVector, w: LevelVector) -> Fraction:
    """𝔈_{H_{m+1}}(w) - 𝔈_{H_m}(v) для продолжения w вектора v"""
    if w.level != v.level + 1 or w.n_symbols != v.n_symbols:
        raise DomainError("w должен быть вектором уровня m+1 над тем же алфавитом")
    if w.values[:len(v.values)] != v.values:
        raise DomainError("w не продолжает v")
    return energy(w.level, w) - energy(v.level, v)


def _normalize_constraints(n: int, m: int, constraints: Mapping[Point, Number]) -> Dict[int, Fraction]:
    if not constraints:
        raise DomainError("Нужно хотя бы одно ограничение")
    level = enumerate_level(n, m)
    fixed = {}
    for p, value in constraints.items():
        if p.n != n or p not in level:
            raise DomainError(f"Точка {p} не лежит в V_{m} (N={n})")
        fixed[level.index[p]] = Fraction(value)
    return fixed


def _reduced_system(n: int, m: int, fixed: Dict[int, Fraction]) -> Tuple[List[int], RationalMatrix, List[Fraction]]:
    """(H_m u)(p) = 0 в свободных точках: A u_free = -H_{free,fixed} c"""
    operator = get_operator(n, m)
    level = operator.level
    free = [i for i in range(len(level)) if i not in fixed]
    position = {i: k for k, i in enumerate(free)}
    rows = {}
    rhs = []
    for k, i in enumerate(free):
        full_row = operator.row(level[i])
        rows[k] = {position[j]: v for j, v in full_row.items() if j in position}
        rhs.append(-sum((v * fixed[j] for j, v in full_row.items() if j in fixed), Fraction(0)))
    return free, RationalMatrix(len(free), len(free), rows), rhs


def min_energy_with_constraints(n: int, m: int, constraints: Mapping[Point, Number]) -> Tuple[Fraction, LevelVector]:
    """Точный минимум 𝔈_{H_m} при заданных значениях в точках V_m"""
    fixed = _normalize_constraints(n, m, constraints)
    values = [Fraction(0)] * n ** (m + 1)
    for i, c in fixed.items():
        values[i] = c
    if len(fixed) < len(values):
        free, system, rhs = _reduced_system(n, m, fixed)
        try:
            solution = solve_linear(system, rhs)
        except SingularSystemError as e:
            raise VerificationError("constrained_system_nonsingular", n, m, detail=str(e)) from e
        for i, x in zip(free, solution):
            values[i] = x
    minimizer = LevelVector(n, m, tuple(values))
    operator = get_operator(n, m)
    for i, p in enumerate(operator.level):
        if i not in fixed and operator.apply_at(minimizer, p) != 0:
            raise VerificationError("minimizer_harmonic", n, m, p)
    return energy(m, minimizer), minimizer


def min_energy_with_constraints_float(n: int, m: int, constraints: Mapping[Point, Number],
                                      tolerance: float = DEFAULT_FLOAT_TOLERANCE) -> Tuple[float, np.ndarray, float]:
    """Минимум в 64-битной арифметике: (энергия, минимизатор, невязка системы)"""
    fixed = _normalize_constraints(n, m, constraints)
    values = np.zeros(n ** (m + 1), dtype=np.float64)
    for i, c in fixed.items():
        values[i] = float(c)
    residual = 0.0
    if len(fixed) < len(values):
        free, system, rhs = _reduced_system(n, m, fixed)
        solution, residual = float_solve(system, rhs, tolerance)
        values[free] = solution
    h = get_operator(n, m, max(DEFAULT_MAX_DENSE_POINTS, len(values))).dense_float()
    return float(-values @ (h @ values)), values, residual


@dataclass(frozen=True)
class ResistanceResult:
    """R(a, b) = 1 / min{𝔈 : u(a) = 1, u(b) = 0}"""
    a: Point
    b: Point
    level: int
    min_energy: Union[Fraction, float]
    resistance: Union[Fraction, float]
    minimizer: Optional[LevelVector] = None
    exact: bool = True
    residual: float = 0.0

    def exceeds(self, threshold: Number) -> bool:
        return self.resistance > threshold

    def margin_below(self, bound: Number) -> Union[Fraction, float]:
        """bound - min_energy"""
        if self.exact:
            return Fraction(bound) - self.min_energy
        return float(bound) - self.min_energy


def effective_resistance(a: Point, b: Point, level: Optional[int] = None,
                         exact_solve_limit: int = DEFAULT_EXACT_SOLVE_LIMIT,
                         float_fallback: bool = True,
                         tolerance: float = DEFAULT_FLOAT_TOLERANCE) -> ResistanceResult:
    """Эффективное сопротивление на уровне m* = max(depth a, depth b)"""
    if a == b:
        raise DomainError(f"R(a, a) не определено: a = b = {a}")
    if a.n != b.n:
        raise DomainError("Точки заданы над разными алфавитами")
    n = a.n
    m = max(a.depth, b.depth) if level is None else level
    constraints = {a: Fraction(1), b: Fraction(0)}
    unknowns = n ** (m + 1) - 2
    if float_fallback and unknowns > exact_solve_limit:
        logger.warning(f"R({a}, {b}): {unknowns} неизвестных, используется решение в плавающей точке")
        value, _, residual = min_energy_with_constraints_float(n, m, constraints, tolerance)
        return ResistanceResult(a, b, m, value, 1.0 / value, None, exact=False, residual=residual)
    value, minimizer = min_energy_with_constraints(n, m, constraints)
    return ResistanceResult(a, b, m, value, 1 / value, minimizer)


def block_path_resistance(a: Point, b: Point) -> Fraction:
    """R(a, b) как 2/N на каждый класс на пути между a и b в дереве классов"""
    if a == b:
        raise DomainError(f"R(a, a) не определено: a = b = {a}")

    def walk(p: Point) -> List[object]:
        chain = connecting_chain(p)
        items: List[object] = [("class", 0, ()), chain[0]]
        for q in chain[1:]:
            items.append(("class", q.depth, q.head(q.depth)))
            items.append(q)
        return items

    left, right = walk(a), walk(b)
    common = 0
    while common < min(len(left), len(right)) and left[common] == right[common]:
        common += 1
    meeting = left[common - 1]
    count = sum(1 for item in left[common:] + right[common:] if isinstance(item, tuple))
    if isinstance(meeting, tuple):
        count += 1
    return Fraction(2 * count, a.n)


def unbounded_pair(n: int, m: int) -> Tuple[Point, Point]:
    """Лексикографически первая пара a, b ∈ V_m \\ V_{m-1} с a_i ≠ a_{i+1}, b_i ≠ b_{i+1}, a_i ≠ b_i (i ≤ m)"""
    if m < 1:
        raise DomainError("Нужен уровень m ≥ 1")
    symbols = range(1, n + 1)

    def search(a: Word, b: Word) -> Optional[Tuple[Word, Word]]:
        i = len(a)
        if i == m + 1:
            return a, b
        for x in symbols:
            if i > 0 and x == a[-1]:
                continue
            for y in symbols:
                if i > 0 and y == b[-1]:
                    continue
                if i < m and x == y:
                    continue
                found = search(a + (x,), b + (y,))
                if found:
                    return found
        return None

    found = search((), ())
    if found is None:
        raise NoAdmissiblePairError(f"Для N={n}, m={m} не существует пары с нужными координатами")
    a, b = found
    return Point.of(n, a[:-1], a[-1]), Point.of(n, b[:-1], b[-1])


def witness_bound(n: int, m: int) -> Fraction:
    """6(m²-m-1) / ((m⁴+m)(N-1)²(2N²-N)) - ограничение на δ₁² + δ₂²"""
    return Fraction(6 * (m * m - m - 1), (m ** 4 + m) * (n - 1) ** 2 * (2 * n * n - n))


def default_deltas(n: int, m: int) -> Tuple[Fraction, Fraction]:
    """δ₁ = δ₂ = половина более жесткой из двух границ"""
    scale = 10 ** 12
    half_bound = witness_bound(n, m) / 2
    # рациональная нижняя оценка sqrt(B/2)
    root = Fraction(math.isqrt(half_bound.numerator * scale * scale // half_bound.denominator), scale)
    delta = min(Fraction(1, 2 * m * (n - 1)), root) / 2
    return delta, delta


@dataclass(frozen=True)
class WitnessResult:
    vector: LevelVector
    energy: Fraction
    bound: Fraction
    delta1: Fraction
    delta2: Fraction

    @property
    def below_bound(self) -> bool:
        return self.energy < self.bound


def _chain_schedule(top: Point, m: int, start: Fraction, step: Fraction,
                    values: Dict[Point, Fraction]) -> Fraction:
    """Значения на классах [t_1..t_i]|_{V_i}, i = m..1, со сдвигом step на каждую точку"""
    current = top
    value = start
    values[current] = value
    for i in range(m, 0, -1):
        fresh, inherited = new_neighbours(current, i)
        level = enumerate_level(current.n, i)
        for q in sorted(fresh, key=level.index_of):
            value += step
            values[q] = value
        value += step
        values[inherited] = value
        current = inherited
    return value


def resistance_witness(n: int, m: int, delta1: Optional[Fraction] = None,
                       delta2: Optional[Fraction] = None) -> WitnessResult:
    """Явная функция на V_m с u(a) = 1, u(b) = 0 и ее энергия.

    На классах цепочки a значения убывают с шагом δ₁ от 1, на классах цепочки b
    возрастают с шагом δ₂ от 0, в остальных точках равны u(ȧ₁) - (δ₁+δ₂)/2.
    """
    if m < 2:
        raise DomainError("Конструкция требует m ≥ 2")
    if delta1 is None or delta2 is None:
        default1, default2 = default_deltas(n, m)
        delta1 = default1 if delta1 is None else delta1
        delta2 = default2 if delta2 is None else delta2
    delta1, delta2 = Fraction(delta1), Fraction(delta2)
    cap = Fraction(1, 2 * m * (n - 1))
    for delta in (delta1, delta2):
        if not 0 < delta < cap:
            raise DomainError(f"δ = {delta} должно лежать в (0, {cap})")
    if not delta1 ** 2 + delta2 ** 2 < witness_bound(n, m):
        raise DomainError(f"δ₁² + δ₂² должно быть меньше {witness_bound(n, m)}")

    a, b = unbounded_pair(n, m)
    values: Dict[Point, Fraction] = {}
    a_root = _chain_schedule(a, m, Fraction(1), -delta1, values)
    _chain_schedule(b, m, Fraction(0), delta2, values)
    remaining = a_root - (delta1 + delta2) / 2
    vector = LevelVector.from_mapping(n, m, values, default=remaining)
    value = energy(m, vector)
    result = WitnessResult(vector, value, Fraction(1, m + 1), delta1, delta2)
    if not result.below_bound:
        logger.warning(
            f"Явная функция для N={n}, m={m}: 𝔈 = {float(value):.6g} не меньше 1/(m+1) = {float(result.bound):.6g}")
    return result


def energy_growth_identity(u: PointEvaluator, m: int, n_symbols: Optional[int] = None) -> bool:
    """𝔈_{H_{m+1}}(u) = 𝔈_{H_m}(u) + вклад классов уровня m+1"""
    n = alphabet_of(u, n_symbols)
    upper = restrict(u, m + 1, n)
    return energy(m + 1, upper) == energy(m, restrict(u, m, n)) + level_energy_increment(upper)

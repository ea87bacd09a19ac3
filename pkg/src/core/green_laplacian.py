"""Функция и оператор Грина, невязка лапласиана и поточечный след"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel

from .difference_operators import green_matrix_entry, local_laplacian
from .exceptions import AlphabetMismatchError, DomainError, VerificationError
from .measure_functions import CylinderFunction, LevelVector, PointEvaluator, alphabet_of
from .shift_space import Alphabet, Point, enumerate_level, rho

logger = logging.getLogger(__name__)

GreenValue = Union[Fraction, float]
GREEN_INFINITY = math.inf


def cell_representative(x: Point, m: int) -> Optional[Point]:
    """r ∈ V_m \\ V_{m-1} с χ_r^m(x) = 1, если x_m ≠ x_{m+1}"""
    if x.symbol(m) == x.symbol(m + 1):
        return None
    return Point.of(x.n, x.head(m), x.symbol(m + 1))


def green_function(x: Point, y: Point) -> GreenValue:
    """g(x, y) = Σ_m Σ_{r,s} (G_m)_{rs} χ_r^m(x) χ_s^m(y), усеченная сумма"""
    if x.n != y.n:
        raise AlphabetMismatchError(x.n, y.n)
    r = rho(x, y)
    if r == 1:
        return Fraction(0)
    top = max(x.depth, y.depth)
    if r != math.inf:
        top = min(top, int(r) - 1)
    total = Fraction(0)
    for m in range(1, top + 1):
        cell_x = cell_representative(x, m)
        cell_y = cell_representative(y, m)
        if cell_x is not None and cell_y is not None:
            total += green_matrix_entry(cell_x, cell_y, m)
    return total


def _closed_form(n: int, xs: Sequence[int], ys: Sequence[int], r: int) -> Fraction:
    """(1/N)(2·#{m ≤ ρ-2 : x_m ≠ x_{m+1}} + [x_{ρ-1} ≠ x_ρ, y_{ρ-1} ≠ y_ρ]); xs, ys - первые ρ координат"""
    if r == 1:
        return Fraction(0)
    count = 2 * sum(1 for m in range(1, r - 1) if xs[m - 1] != xs[m])
    if xs[r - 2] != xs[r - 1] and ys[r - 2] != ys[r - 1]:
        count += 1
    return Fraction(count, n)


def green_function_fast(x: Point, y: Point) -> GreenValue:
    """Замкнутая форма g(x, y)"""
    if x.n != y.n:
        raise AlphabetMismatchError(x.n, y.n)
    r = rho(x, y)
    if r == math.inf:
        return Fraction(2 * sum(1 for m in range(1, x.depth + 1) if x.symbol(m) != x.symbol(m + 1)), x.n)
    r = int(r)
    return _closed_form(x.n, x.head(r), y.head(r), r)


def green_function_on_prefixes(n: int, x_prefix: Sequence[int], y_prefix: Sequence[int]) -> GreenValue:
    """g для точек вне V_*, заданных префиксами.

    Совпадающие префиксы считаются одной точкой вне V_* (значение ∞).
    """
    alphabet = Alphabet(n)
    for symbol in tuple(x_prefix) + tuple(y_prefix):
        alphabet.check_symbol(symbol)
    for i, (a, b) in enumerate(zip(x_prefix, y_prefix), start=1):
        if a != b:
            return _closed_form(n, x_prefix[:i], y_prefix[:i], i)
    if tuple(x_prefix) == tuple(y_prefix):
        return GREEN_INFINITY
    raise DomainError("Префиксы не различают точки: нужна более длинная запись")


def green_section(p: Point) -> CylinderFunction:
    """g(p, ·) как цилиндрическая функция глубины depth(p) + 1"""
    depth = p.depth + 1
    values = tuple(green_function_fast(p, Point.from_word(p.n, w)) for w in Alphabet(p.n).words(depth))
    return CylinderFunction(p.n, depth, values)


def green_operator(f: CylinderFunction, p: Point) -> Fraction:
    """G_μf(p) = ∫ g(p, y) f(y) dμ(y) по определению"""
    return (green_section(p) * f).integrate()


def green_operator_fast(f: CylinderFunction, p: Point) -> Fraction:
    """G_μf(p) через интегралы f по цилиндрам:
    Σ_{m: p_m ≠ p_{m+1}} (2/N ∫_{[p_1..p_{m+1}]} f + 1/N Σ_{l ∉ {p_m, p_{m+1}}} ∫_{[p_1..p_m l]} f)
    """
    if f.n_symbols != p.n:
        raise AlphabetMismatchError(f.n_symbols, p.n)
    n = p.n
    total = Fraction(0)
    for m in range(1, p.depth + 1):
        current, following = p.symbol(m), p.symbol(m + 1)
        if current == following:
            continue
        head = p.head(m)
        total += 2 * f.cell_integral(head + (following,))
        for l in range(1, n + 1):
            if l != current and l != following:
                total += f.cell_integral(head + (l,))
    return total / n


class GreenOperator:
    """Вычислитель G_μf с кэшем значений в точках"""

    def __init__(self, f: CylinderFunction):
        self.f = f
        self.n_symbols = f.n_symbols
        self._cache: Dict[Point, Fraction] = {}

    def __call__(self, p: Point) -> Fraction:
        value = self._cache.get(p)
        if value is None:
            value = green_operator_fast(self.f, p)
            self._cache[p] = value
        return value

    def __repr__(self) -> str:
        return f"GreenOperator(N={self.n_symbols}, depth={self.f.depth})"


def green_operator_level(f: CylinderFunction, m: int, max_points: Optional[int] = None) -> LevelVector:
    """G_μf на V_m в порядке ≺"""
    level = enumerate_level(f.n_symbols, m) if max_points is None else enumerate_level(f.n_symbols, m, max_points)
    evaluator = GreenOperator(f)
    return LevelVector(f.n_symbols, m, tuple(evaluator(p) for p in level))


def green_operator_bound(f: CylinderFunction, p: Point) -> Fraction:
    """sup|f| · G_μ1(p) ≥ |G_μf(p)|"""
    return f.sup_norm() * green_operator_fast(CylinderFunction.constant(f.n_symbols, 1), p)


def check_green_operator_bounds(f: CylinderFunction, m: int) -> Dict[str, object]:
    """|G_μf(p)| ≤ sup|f|·G_μ1(p) ≤ sup|f|/(N(N-1)) на V_m"""
    n = f.n_symbols
    uniform = f.sup_norm() / (n * (n - 1))
    evaluator = GreenOperator(f)
    for p in enumerate_level(n, m):
        value = abs(evaluator(p))
        bound = green_operator_bound(f, p)
        if not value <= bound <= uniform:
            raise VerificationError("green_operator_bound", n, m, p, f"|G_μf| = {value}, оценка {bound}")
    return {"N": n, "m": m, "uniform_bound": uniform, "passed": True}


def laplacian_at(u: PointEvaluator, p: Point, m: int) -> Fraction:
    """N^{m+1}·(H_m u|_{V_m})(p)"""
    return p.n ** (m + 1) * local_laplacian(u, p, m)


def laplacian_residuals(u: PointEvaluator, f: PointEvaluator, m: int,
                        n_symbols: Optional[int] = None) -> List[Tuple[Point, Fraction]]:
    """(p, N^{m+1}H_m u(p) - f(p)) для p ∈ V_m \\ V_{m-1}"""
    if m < 1:
        raise DomainError("Невязка определена для m ≥ 1")
    n = alphabet_of(u, n_symbols)
    return [(p, laplacian_at(u, p, m) - f(p)) for p in enumerate_level(n, m).new_points]


def laplacian_residual(u: PointEvaluator, f: PointEvaluator, m: int,
                       n_symbols: Optional[int] = None) -> Fraction:
    """max_{p ∈ V_m \\ V_{m-1}} |N^{m+1}H_m u(p) - f(p)|"""
    return max(abs(r) for _, r in laplacian_residuals(u, f, m, n_symbols))


@dataclass(frozen=True)
class LaplacianTrace:
    """(m, p^m, N^{m+1}H_m u(p^m))"""
    entries: Tuple[Tuple[int, Point, Fraction], ...]

    @property
    def values(self) -> List[Fraction]:
        return [v for _, _, v in self.entries]

    def rows(self) -> List[Tuple[int, Fraction]]:
        return [(m, v) for m, _, v in self.entries]


def trace_point(n: int, x_prefix: Sequence[int], m: int) -> Point:
    """p^m = (x_1 ... x_m l̇) с наименьшим l ≠ x_m"""
    symbol = next(l for l in range(1, n + 1) if l != x_prefix[m - 1])
    return Point.of(n, tuple(x_prefix[:m]), symbol)


def pointwise_laplacian_trace(u: PointEvaluator, x_prefix: Sequence[int], m_max: int,
                              n_symbols: Optional[int] = None) -> LaplacianTrace:
    n = alphabet_of(u, n_symbols)
    if len(x_prefix) < m_max:
        raise DomainError(f"Префикс длины {len(x_prefix)} короче m_max = {m_max}")
    alphabet = Alphabet(n)
    for symbol in x_prefix:
        alphabet.check_symbol(symbol)
    entries = []
    for m in range(1, m_max + 1):
        p = trace_point(n, x_prefix, m)
        entries.append((m, p, laplacian_at(u, p, m)))
    return LaplacianTrace(tuple(entries))


class GreenBoundReport(BaseModel):
    """Итог проверки оценки g(x, y) ≤ (2ρ-3)/N"""
    n: int
    depth: int
    pairs: int
    equality_pairs: int
    passed: bool = True


def check_green_bound(n: int, depth: int, max_points: int = 5000) -> GreenBoundReport:
    """Оценка g(x, y) ≤ |(2ρ(x,y)-3)/N| на всех упорядоченных парах V_depth"""
    level = enumerate_level(n, depth, max_points)
    pairs = 0
    equalities = 0
    for x in level:
        for y in level:
            if x == y:
                continue
            pairs += 1
            value = green_function(x, y)
            r = int(rho(x, y))
            bound = abs(Fraction(2 * r - 3, n))
            if value < 0 or value > bound:
                raise VerificationError("green_bound", n, depth, f"({x}, {y})",
                                        f"g = {value}, граница {bound}")
            if r >= 2 and value == bound:
                equalities += 1
    logger.info(f"Оценка функции Грина N={n}, V_{depth}: {pairs} пар, равенство на {equalities}")
    return GreenBoundReport(n=n, depth=depth, pairs=pairs, equality_pairs=equalities)


def approximating_point(x: Point, k: int) -> Point:
    """xᵏ: первые k координат x, далее символ, отличный от x_{k+1}"""
    tail = next(l for l in range(1, x.n + 1) if l != x.symbol(k + 1))
    return Point.of(x.n, x.head(k), tail)


def green_stabilization(x: Point, y: Point, n_max: int) -> Dict[str, object]:
    """g(xᵏ, yᵏ) для k = 1..n_max и индекс, с которого значения равны g(x, y)"""
    if x == y:
        raise DomainError("Нужны различные точки")
    target = green_function(x, y)
    values = [green_function(approximating_point(x, k), approximating_point(y, k)) for k in range(1, n_max + 1)]
    stable_from = None
    for k in range(n_max, 0, -1):
        if values[k - 1] != target:
            break
        stable_from = k
    predicted = int(rho(x, y))
    if predicted <= n_max and (stable_from is None or stable_from > predicted):
        raise VerificationError("green_continuity", x.n, detail=f"x={x}, y={y}, стабилизация с {stable_from}")
    return {"target": target, "values": values, "stable_from": stable_from, "predicted": predicted}

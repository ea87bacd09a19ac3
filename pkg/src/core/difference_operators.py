"""Разностные операторы H_m, блочное разложение, матрица G_m и формы Дирихле"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel

from .exact_numeric import (RationalMatrix, SparseRow, dot, format_rational, inverse, rank,
                            random_rational_vector)
from .exceptions import AlphabetMismatchError, DomainError, LevelMismatchError, ResourceLimitError, VerificationError
from .measure_functions import LevelVector
from .shift_space import LevelSet, Point, enumerate_level, new_neighbours, relation_class

logger = logging.getLogger(__name__)

DEFAULT_MAX_DENSE_POINTS = 2200
DEFAULT_SAMPLE_COUNT = 200


def class_neighbours(p: Point, i: int) -> List[Point]:
    """𝒰_{p,i} в порядке хвостового символа"""
    return [q for q in relation_class(p.n, p.head(i)) if q != p]


def local_laplacian(u: Callable[[Point], Fraction], p: Point, m: int) -> Fraction:
    """(H_m u)(p) по значениям u только в точках, связанных с p"""
    n = p.n
    if p.depth > m:
        raise DomainError(f"Точка {p} глубины {p.depth} не лежит в V_{m}")
    value = Fraction(u(p))
    total = -(m - p.depth + 1) * (n - 1) * value
    for i in range(p.depth, m + 1):
        for q in class_neighbours(p, i):
            total += u(q)
    return total


class DifferenceOperator:
    """Оператор H_m на функциях V_m (матрично-свободное применение).

    Плотная (в смысле полной сборки) матрица строится лениво и кэшируется.
    """

    def __init__(self, n: int, m: int, max_dense_points: int = DEFAULT_MAX_DENSE_POINTS):
        self.n = n
        self.m = m
        self.max_dense_points = max_dense_points
        self.level: LevelSet = enumerate_level(n, m)
        self.logger = logging.getLogger(__name__)
        self._matrix: Optional[RationalMatrix] = None

    def __repr__(self) -> str:
        return f"DifferenceOperator(N={self.n}, m={self.m})"

    def _check_vector(self, u: LevelVector):
        if u.n_symbols != self.n:
            raise AlphabetMismatchError(self.n, u.n_symbols)
        if u.level != self.m:
            raise LevelMismatchError(self.m, u.level)

    def row(self, p: Point) -> SparseRow:
        """Строка H_m в точке p (индексы в порядке ≺)"""
        index = self.level.index_of(p)
        row: SparseRow = {index: Fraction(-(self.m - p.depth + 1) * (self.n - 1))}
        for i in range(p.depth, self.m + 1):
            for q in class_neighbours(p, i):
                j = self.level.index[q]
                row[j] = row.get(j, Fraction(0)) + 1
        return row

    def apply_at(self, u: LevelVector, p: Point) -> Fraction:
        self._check_vector(u)
        return local_laplacian(lambda q: u.values[self.level.index[q]], p, self.m)

    def apply(self, u: LevelVector) -> LevelVector:
        """H_m u; каждый шаг - телескопическая добавка уровня i"""
        self._check_vector(u)
        index = self.level.index
        values = u.values
        result = []
        for p in self.level:
            acc = Fraction(0)
            for i in range(p.depth, self.m + 1):
                acc += -(self.n - 1) * values[index[p]] + sum(values[index[q]] for q in class_neighbours(p, i))
            result.append(acc)
        return LevelVector(self.n, self.m, tuple(result))

    @property
    def matrix(self) -> RationalMatrix:
        if self._matrix is None:
            size = len(self.level)
            if size > self.max_dense_points:
                raise ResourceLimitError(size, self.max_dense_points, "строк матрицы")
            self.logger.info(f"Сборка матрицы H_{self.m} для N={self.n}: {size}x{size}")
            self._matrix = RationalMatrix(size, size, {i: self.row(p) for i, p in enumerate(self.level)})
        return self._matrix

    def dense_float(self) -> np.ndarray:
        return self.matrix.to_float()


@lru_cache(maxsize=64)
def get_operator(n: int, m: int, max_dense_points: int = DEFAULT_MAX_DENSE_POINTS) -> DifferenceOperator:
    return DifferenceOperator(n, m, max_dense_points)


def apply_H(m: int, u: LevelVector) -> LevelVector:
    return get_operator(u.n_symbols, m).apply(u)


def build_dense_H(n: int, m: int, max_dense_points: int = DEFAULT_MAX_DENSE_POINTS) -> RationalMatrix:
    return get_operator(n, m, max_dense_points).matrix


@dataclass(frozen=True)
class BlockDecomposition:
    """H_m = [[T, Jᵀ], [J, X]] по разбиению V_{m-1} | V_m \\ V_{m-1}"""
    n: int
    m: int
    T: RationalMatrix
    J: RationalMatrix
    X: RationalMatrix

    def reassemble(self) -> RationalMatrix:
        return RationalMatrix.block([[self.T, self.J.T], [self.J, self.X]])


def _split(n: int, m: int) -> Tuple[range, range]:
    if m < 1:
        raise DomainError("Блочное разложение определено только для m ≥ 1")
    old = n ** m
    return range(old), range(old, n ** (m + 1))


def blocks(n: int, m: int, max_dense_points: int = DEFAULT_MAX_DENSE_POINTS) -> BlockDecomposition:
    old, fresh = _split(n, m)
    h = build_dense_H(n, m, max_dense_points)
    return BlockDecomposition(
        n=n, m=m,
        T=h.submatrix(old, old),
        J=h.submatrix(fresh, old),
        X=h.submatrix(fresh, fresh),
    )


def green_matrix_entry(r: Point, s: Point, m: int) -> Fraction:
    """(G_m)_{rs} для r, s ∈ V_m \\ V_{m-1}"""
    if r.depth != m or s.depth != m:
        raise DomainError(f"Точки {r}, {s} должны лежать в V_{m} \\ V_{m - 1}")
    if r == s:
        return Fraction(2, r.n)
    if r.head(m) == s.head(m):
        return Fraction(1, r.n)
    return Fraction(0)


def green_matrix(n: int, m: int) -> RationalMatrix:
    """G_m на V_m \\ V_{m-1}: 2/N на диагонали, 1/N для новых соседей"""
    _split(n, m)
    level = enumerate_level(n, m)
    fresh = level.new_points
    position = {p: k for k, p in enumerate(fresh)}
    rows: Dict[int, SparseRow] = {}
    for k, p in enumerate(fresh):
        row = {k: Fraction(2, n)}
        for q in new_neighbours(p, m)[0]:
            row[position[q]] = Fraction(1, n)
        rows[k] = row
    return RationalMatrix(len(fresh), len(fresh), rows)


def t_block_entry(p: Point, q: Point, m: int) -> Fraction:
    """(T_m)_{pq} по таблице: диагональ -(m-n+1)(N-1), 1 при q ∈ 𝒰_{p,i}, n ≤ i < m"""
    if m < 1 or p.depth > m - 1 or q.depth > m - 1:
        raise DomainError(f"Точки {p}, {q} должны лежать в V_{m - 1}")
    if p == q:
        return Fraction(-(m - p.depth + 1) * (p.n - 1))
    for i in range(p.depth, m):
        if q.depth <= i and q.head(i) == p.head(i):
            return Fraction(1)
    return Fraction(0)


def dirichlet_form(m: int, u: LevelVector, v: LevelVector) -> Fraction:
    """𝔈_{H_m}(u, v) = -⟨u, H_m v⟩"""
    u.check_compatible(v)
    if u.level != m:
        raise LevelMismatchError(m, u.level)
    return -dot(u.values, apply_H(m, v).values)


def dirichlet_form_pairwise(m: int, u: LevelVector, v: LevelVector) -> Fraction:
    """½ Σ_{p,q} (H_m)_{pq}(u(p)-u(q))(v(p)-v(q)) как сумма по классам всех уровней ≤ m"""
    u.check_compatible(v)
    if u.level != m:
        raise LevelMismatchError(m, u.level)
    n = u.n_symbols
    level = enumerate_level(n, m)
    total = Fraction(0)
    for p in level:
        i_p = level.index[p]
        for i in range(p.depth, m + 1):
            for q in class_neighbours(p, i):
                i_q = level.index[q]
                total += (u.values[i_p] - u.values[i_q]) * (v.values[i_p] - v.values[i_q])
    return total / 2


def energy(m: int, u: LevelVector) -> Fraction:
    return dirichlet_form(m, u, u)


def level_energy_increment(u: LevelVector) -> Fraction:
    """½ Σ_{p∈V_m} Σ_{q∈𝒰_{p,m}} (u(p)-u(q))²: вклад классов верхнего уровня m = u.level"""
    n, m = u.n_symbols, u.level
    level = enumerate_level(n, m)
    total = Fraction(0)
    for p in level:
        for q in class_neighbours(p, m):
            diff = u.values[level.index[p]] - u.values[level.index[q]]
            total += diff * diff
    return total / 2


def unit_clamp(u: LevelVector) -> LevelVector:
    """ū: значения, обрезанные до отрезка [0, 1]"""
    return LevelVector(u.n_symbols, u.level,
                       tuple(min(max(v, Fraction(0)), Fraction(1)) for v in u.values))


class PropertyResult(BaseModel):
    passed: bool
    detail: str = ""


class StructuralReport(BaseModel):
    """Отчет структурной проверки H_m"""
    n: int
    m: int
    size: int
    rank: int
    properties: Dict[str, PropertyResult]

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.properties.values())

    def failures(self) -> List[str]:
        return [name for name, p in self.properties.items() if not p.passed]

    def raise_for_failures(self):
        for name, result in self.properties.items():
            if not result.passed:
                raise VerificationError(name, self.n, self.m, detail=result.detail)


def check_block_identities(n: int, m: int, rng: np.random.Generator,
                           sample_count: int = DEFAULT_SAMPLE_COUNT,
                           max_dense_points: int = DEFAULT_MAX_DENSE_POINTS) -> Dict[str, PropertyResult]:
    """Блочные тождества: сборка, вид X_m, X_m·(-G_m) = I, дополнение Шура, таблица T_m"""
    properties: Dict[str, PropertyResult] = {}
    decomposition = blocks(n, m, max_dense_points)
    h = build_dense_H(n, m, max_dense_points)
    properties["block_reassembly"] = PropertyResult(passed=decomposition.reassemble() == h)

    x = decomposition.X
    off = x.off_diagonal_values()
    diagonal_ok = all(x[i, i] == -(n - 1) for i in range(x.n_rows))
    properties["block_x_shape"] = PropertyResult(
        passed=diagonal_ok and off <= {Fraction(0), Fraction(1)},
        detail=f"внедиагональные значения X: {sorted(format_rational(v) for v in off)}")

    g = green_matrix(n, m)
    identity = RationalMatrix.identity(x.n_rows)
    properties["green_inverse"] = PropertyResult(passed=x @ (-g) == identity)

    # X^{-1} = -G, поэтому T = H_{m-1} - Jᵀ G J
    previous = build_dense_H(n, m - 1, max_dense_points)
    schur = previous - decomposition.J.T @ g @ decomposition.J
    properties["schur_complement"] = PropertyResult(passed=decomposition.T == schur)

    level = enumerate_level(n, m)
    old = n ** m
    mismatches = []
    for _ in range(sample_count):
        i, j = (int(k) for k in rng.integers(0, old, size=2))
        p, q = level[i], level[j]
        if t_block_entry(p, q, m) != decomposition.T[i, j]:
            mismatches.append(f"({p}, {q})")
    properties["t_block_table"] = PropertyResult(
        passed=not mismatches, detail=", ".join(mismatches[:5]))
    return properties


def structural_check(n: int, m: int, seed: int = 0, sample_count: int = DEFAULT_SAMPLE_COUNT,
                     max_dense_points: int = DEFAULT_MAX_DENSE_POINTS,
                     include_blocks: bool = True, raise_on_failure: bool = False) -> StructuralReport:
    """Проверка свойств H_m: симметрия, нулевые суммы строк, ранг, ядро, знак формы, блоки"""
    h = build_dense_H(n, m, max_dense_points)
    size = h.n_rows
    properties: Dict[str, PropertyResult] = {}

    properties["symmetric"] = PropertyResult(passed=h.is_symmetric())
    row_sums = h.row_sums()
    properties["zero_row_sums"] = PropertyResult(passed=all(s == 0 for s in row_sums))
    off = h.off_diagonal_values()
    properties["off_diagonal_unit"] = PropertyResult(
        passed=off <= {Fraction(0), Fraction(1)},
        detail=f"значения: {sorted(format_rational(v) for v in off)}")

    h_rank = rank(h)
    properties["operator_rank"] = PropertyResult(
        passed=h_rank == size - 1, detail=f"ранг {h_rank}, ожидался {size - 1}")
    # ранг size-1 и H·1 = 0 дают ядро ровно из констант
    properties["kernel_constants"] = PropertyResult(
        passed=h_rank == size - 1 and all(s == 0 for s in row_sums))

    rng = np.random.default_rng(seed)
    violations = 0
    mismatches = 0
    for _ in range(sample_count):
        u = LevelVector(n, m, tuple(random_rational_vector(rng, size)))
        form = energy(m, u)
        if form < 0:
            violations += 1
        if form != dirichlet_form_pairwise(m, u, u):
            mismatches += 1
    properties["form_nonnegative"] = PropertyResult(
        passed=violations == 0, detail=f"{violations} из {sample_count} векторов с 𝔈 < 0")
    properties["form_pairwise_agreement"] = PropertyResult(
        passed=mismatches == 0, detail=f"{mismatches} расхождений")

    if include_blocks and m >= 1:
        properties.update(check_block_identities(n, m, rng, sample_count, max_dense_points))

    report = StructuralReport(n=n, m=m, size=size, rank=h_rank, properties=properties)
    if report.passed:
        logger.info(f"Структурная проверка N={n}, m={m}: все свойства выполнены")
    else:
        logger.warning(f"Структурная проверка N={n}, m={m}: нарушены {report.failures()}")
    if raise_on_failure:
        report.raise_for_failures()
    return report


def check_inverse_green(n: int, m: int) -> bool:
    """X_m^{-1} = -G_m, через явное обращение X_m"""
    x = blocks(n, m).X
    return inverse(x) == -green_matrix(n, m)

"""Точная рациональная арифметика: разбор и вывод чисел, матрицы, решатели"""

import logging
from collections import defaultdict
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Set, Tuple, Union

import numpy as np

from .exceptions import DimensionMismatchError, DomainError, SingularSystemError, VerificationError

logger = logging.getLogger(__name__)

Number = Union[int, Fraction]
SparseRow = Dict[int, Fraction]

DECIMAL_DIGITS = 12


def to_rational(value) -> Fraction:
    """Приведение к Fraction; строки вида 'p/q', '3', '0.25'"""
    if isinstance(value, bool):
        raise DomainError(f"Логическое значение не является числом: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise DomainError(f"Некорректное рациональное число: '{value}'") from e
    if isinstance(value, (float, np.floating)):
        raise DomainError(f"Число с плавающей точкой {value!r} не допускается, используйте 'p/q'")
    raise DomainError(f"Неподдерживаемый тип числа: {type(value).__name__}")


def format_rational(value: Number) -> str:
    """'p/q', знаменатель 1 опускается"""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def format_decimal(value: Union[Number, float], digits: int = DECIMAL_DIGITS) -> str:
    """Десятичная запись с digits значащими цифрами"""
    if isinstance(value, float):
        return format(value, f".{digits}g")
    value = Fraction(value)
    with localcontext() as ctx:
        ctx.prec = digits
        decimal = Decimal(value.numerator) / Decimal(value.denominator)
        return format(decimal, f".{digits}g")


class RationalMatrix:
    """Матрица с точными рациональными элементами.

    Хранится построчно в разреженном виде (ненулевые элементы), что позволяет
    работать с операторами H_m на тысячах точек без квадратичной памяти.
    """

    __slots__ = ("shape", "_rows")

    def __init__(self, n_rows: int, n_cols: int,
                 rows: Optional[Mapping[int, Mapping[int, Number]]] = None):
        if n_rows <= 0 or n_cols <= 0:
            raise DimensionMismatchError(f"Размеры матрицы должны быть положительными: {n_rows}x{n_cols}")
        self.shape = (n_rows, n_cols)
        self._rows: Dict[int, SparseRow] = {}
        for i, row in (rows or {}).items():
            if not 0 <= i < n_rows:
                raise DimensionMismatchError(f"Индекс строки {i} вне диапазона 0..{n_rows - 1}")
            clean = {}
            for j, v in row.items():
                if not 0 <= j < n_cols:
                    raise DimensionMismatchError(f"Индекс столбца {j} вне диапазона 0..{n_cols - 1}")
                if v:
                    clean[j] = Fraction(v)
            if clean:
                self._rows[i] = clean

    @classmethod
    def from_dense(cls, values: Union[Sequence[Sequence], np.ndarray]) -> "RationalMatrix":
        grid = [list(row) for row in values]
        if not grid or not grid[0]:
            raise DimensionMismatchError("Пустая матрица")
        width = len(grid[0])
        if any(len(row) != width for row in grid):
            raise DimensionMismatchError("Строки матрицы разной длины")
        rows = {i: {j: to_rational(v) for j, v in enumerate(row) if v}
                for i, row in enumerate(grid)}
        return cls(len(grid), width, rows)

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls(n, n, {i: {i: Fraction(1)} for i in range(n)})

    @classmethod
    def zeros(cls, n_rows: int, n_cols: int) -> "RationalMatrix":
        return cls(n_rows, n_cols)

    @classmethod
    def block(cls, blocks: Sequence[Sequence["RationalMatrix"]]) -> "RationalMatrix":
        """Сборка блочной матрицы [[A, B], [C, D]]"""
        heights = [row[0].shape[0] for row in blocks]
        widths = [b.shape[1] for b in blocks[0]]
        rows: Dict[int, SparseRow] = defaultdict(dict)
        row_offset = 0
        for r, block_row in enumerate(blocks):
            if len(block_row) != len(widths):
                raise DimensionMismatchError("Несогласованное число блоков в строке")
            col_offset = 0
            for c, b in enumerate(block_row):
                if b.shape != (heights[r], widths[c]):
                    raise DimensionMismatchError(f"Блок ({r}, {c}) имеет размер {b.shape}")
                for i, row in b._rows.items():
                    target = rows[row_offset + i]
                    for j, v in row.items():
                        target[col_offset + j] = v
                col_offset += widths[c]
            row_offset += heights[r]
        return cls(sum(heights), sum(widths), rows)

    @property
    def n_rows(self) -> int:
        return self.shape[0]

    @property
    def n_cols(self) -> int:
        return self.shape[1]

    @property
    def nnz(self) -> int:
        return sum(len(row) for row in self._rows.values())

    def __getitem__(self, key: Tuple[int, int]) -> Fraction:
        i, j = key
        return self._rows.get(i, {}).get(j, Fraction(0))

    def row(self, i: int) -> SparseRow:
        return dict(self._rows.get(i, {}))

    def items(self) -> Iterator[Tuple[int, int, Fraction]]:
        """Ненулевые элементы (i, j, value) по возрастанию индексов"""
        for i in sorted(self._rows):
            row = self._rows[i]
            for j in sorted(row):
                yield i, j, row[j]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return self.shape == other.shape and self._rows == other._rows

    __hash__ = None

    def __repr__(self) -> str:
        return f"RationalMatrix({self.n_rows}x{self.n_cols}, nnz={self.nnz})"

    def _require_same_shape(self, other: "RationalMatrix"):
        if self.shape != other.shape:
            raise DimensionMismatchError(f"Размеры {self.shape} и {other.shape} не совпадают")

    def __add__(self, other: "RationalMatrix") -> "RationalMatrix":
        self._require_same_shape(other)
        rows = {i: dict(row) for i, row in self._rows.items()}
        for i, row in other._rows.items():
            target = rows.setdefault(i, {})
            for j, v in row.items():
                target[j] = target.get(j, 0) + v
        return RationalMatrix(self.n_rows, self.n_cols, rows)

    def __neg__(self) -> "RationalMatrix":
        return self.scale(-1)

    def __sub__(self, other: "RationalMatrix") -> "RationalMatrix":
        return self + (-other)

    def scale(self, factor: Number) -> "RationalMatrix":
        factor = Fraction(factor)
        return RationalMatrix(self.n_rows, self.n_cols,
                              {i: {j: v * factor for j, v in row.items()} for i, row in self._rows.items()})

    @property
    def T(self) -> "RationalMatrix":
        rows: Dict[int, SparseRow] = defaultdict(dict)
        for i, row in self._rows.items():
            for j, v in row.items():
                rows[j][i] = v
        return RationalMatrix(self.n_cols, self.n_rows, rows)

    def transpose(self) -> "RationalMatrix":
        return self.T

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        if self.n_cols != other.n_rows:
            raise DimensionMismatchError(f"Нельзя умножить {self.shape} на {other.shape}")
        rows: Dict[int, SparseRow] = {}
        for i, row in self._rows.items():
            acc: SparseRow = defaultdict(Fraction)
            for k, a in row.items():
                for j, b in other._rows.get(k, {}).items():
                    acc[j] += a * b
            rows[i] = acc
        return RationalMatrix(self.n_rows, other.n_cols, rows)

    def matvec(self, vector: Sequence[Number]) -> List[Fraction]:
        if len(vector) != self.n_cols:
            raise DimensionMismatchError(f"Длина вектора {len(vector)} не равна {self.n_cols}")
        result = [Fraction(0)] * self.n_rows
        for i, row in self._rows.items():
            result[i] = sum((v * vector[j] for j, v in row.items()), Fraction(0))
        return result

    def submatrix(self, row_indices: Sequence[int], col_indices: Sequence[int]) -> "RationalMatrix":
        col_map = {j: c for c, j in enumerate(col_indices)}
        rows: Dict[int, SparseRow] = {}
        for r, i in enumerate(row_indices):
            source = self._rows.get(i)
            if source:
                rows[r] = {col_map[j]: v for j, v in source.items() if j in col_map}
        return RationalMatrix(len(row_indices), len(col_indices), rows)

    def is_square(self) -> bool:
        return self.n_rows == self.n_cols

    def is_symmetric(self) -> bool:
        return self.is_square() and self == self.T

    def row_sums(self) -> List[Fraction]:
        return [sum(self._rows.get(i, {}).values(), Fraction(0)) for i in range(self.n_rows)]

    def off_diagonal_values(self) -> Set[Fraction]:
        """Множество значений вне диагонали (включая 0, если есть нулевые позиции)"""
        values = {v for i, row in self._rows.items() for j, v in row.items() if i != j}
        diagonal_present = sum(1 for i, row in self._rows.items() if i in row)
        if self.nnz - diagonal_present < self.n_rows * self.n_cols - min(self.shape):
            values.add(Fraction(0))
        return values

    def to_numpy(self) -> np.ndarray:
        """Плотный массив объектов Fraction"""
        dense = np.empty(self.shape, dtype=object)
        dense.fill(Fraction(0))
        for i, j, v in self.items():
            dense[i, j] = v
        return dense

    def to_float(self) -> np.ndarray:
        dense = np.zeros(self.shape, dtype=np.float64)
        for i, j, v in self.items():
            dense[i, j] = float(v)
        return dense

    def to_strings(self) -> List[List[str]]:
        return [[format_rational(self[i, j]) for j in range(self.n_cols)] for i in range(self.n_rows)]


def _eliminate(rows: List[SparseRow], n_coef: int) -> Tuple[List[Tuple[int, SparseRow]], List[SparseRow]]:
    """Исключение Гаусса по разреженным строкам.

    Ключи < n_coef - коэффициенты, остальные - правые части. Ведущая строка
    выбирается с наименьшим числом ненулевых коэффициентов, ведущий столбец в ней -
    встречающийся в наименьшем числе строк. Возвращает ведущие пары
    (столбец, строка) в порядке выбора и строки без коэффициентов.
    """
    rows = [{j: Fraction(v) for j, v in row.items() if v} for row in rows]
    col_rows: Dict[int, Set[int]] = defaultdict(set)
    n_nonzero = []
    for i, row in enumerate(rows):
        count = 0
        for j in row:
            if j < n_coef:
                col_rows[j].add(i)
                count += 1
        n_nonzero.append(count)

    active = set(range(len(rows)))
    pivots: List[Tuple[int, SparseRow]] = []
    leftovers: List[SparseRow] = []

    while active:
        i = min(active, key=lambda r: (n_nonzero[r], r))
        active.discard(i)
        pivot_row = rows[i]
        if n_nonzero[i] == 0:
            leftovers.append(pivot_row)
            continue
        col = min((j for j in pivot_row if j < n_coef), key=lambda c: (len(col_rows[c]), c))
        for j in pivot_row:
            if j < n_coef:
                col_rows[j].discard(i)
        pivot_value = pivot_row[col]
        for k in sorted(col_rows[col]):
            target = rows[k]
            factor = target[col] / pivot_value
            for j, v in pivot_row.items():
                new_value = target.get(j, 0) - factor * v
                if new_value:
                    if j not in target and j < n_coef:
                        col_rows[j].add(k)
                        n_nonzero[k] += 1
                    target[j] = new_value
                elif j in target:
                    del target[j]
                    if j < n_coef:
                        col_rows[j].discard(k)
                        n_nonzero[k] -= 1
        pivots.append((col, pivot_row))
    return pivots, leftovers


def _back_substitute(pivots: List[Tuple[int, SparseRow]], n_coef: int,
                     rhs_key: int) -> Dict[int, Fraction]:
    solution: Dict[int, Fraction] = {}
    for col, row in reversed(pivots):
        total = row.get(rhs_key, Fraction(0))
        for j, v in row.items():
            if j < n_coef and j != col:
                total -= v * solution.get(j, Fraction(0))
        solution[col] = total / row[col]
    return solution


def rank(matrix: RationalMatrix) -> int:
    """Точный ранг над полем рациональных чисел"""
    rows = [matrix.row(i) for i in range(matrix.n_rows)]
    pivots, _ = _eliminate(rows, matrix.n_cols)
    return len(pivots)


def solve_linear(matrix: RationalMatrix, rhs: Sequence[Number]) -> List[Fraction]:
    """Точное решение A x = b для квадратной невырожденной A"""
    if not matrix.is_square():
        raise DimensionMismatchError(f"Матрица системы не квадратная: {matrix.shape}")
    n = matrix.n_rows
    if len(rhs) != n:
        raise DimensionMismatchError(f"Длина правой части {len(rhs)} не равна {n}")
    rows = []
    for i in range(n):
        row = matrix.row(i)
        if rhs[i]:
            row[n] = to_rational(rhs[i])
        rows.append(row)
    pivots, _ = _eliminate(rows, n)
    if len(pivots) < n:
        raise SingularSystemError(f"Вырожденная система: ранг {len(pivots)} < {n}")
    solution = _back_substitute(pivots, n, n)
    return [solution[j] for j in range(n)]


def inverse(matrix: RationalMatrix) -> RationalMatrix:
    """Обратная матрица через присоединенную единичную"""
    if not matrix.is_square():
        raise DimensionMismatchError(f"Матрица не квадратная: {matrix.shape}")
    n = matrix.n_rows
    rows = []
    for i in range(n):
        row = matrix.row(i)
        row[n + i] = Fraction(1)
        rows.append(row)
    pivots, _ = _eliminate(rows, n)
    if len(pivots) < n:
        raise SingularSystemError(f"Матрица вырождена: ранг {len(pivots)} < {n}")
    columns: Dict[int, SparseRow] = defaultdict(dict)
    for k in range(n):
        solution = _back_substitute(pivots, n, n + k)
        for j, v in solution.items():
            if v:
                columns[j][k] = v
    return RationalMatrix(n, n, columns)


def float_solve(matrix: RationalMatrix, rhs: Sequence[Number],
                tolerance: float = 1e-9) -> Tuple[np.ndarray, float]:
    """Решение в 64-битной арифметике с проверкой невязки ‖Ax - b‖_∞"""
    if not matrix.is_square():
        raise DimensionMismatchError(f"Матрица системы не квадратная: {matrix.shape}")
    if len(rhs) != matrix.n_rows:
        raise DimensionMismatchError(f"Длина правой части {len(rhs)} не равна {matrix.n_rows}")
    a = matrix.to_float()
    b = np.array([float(v) for v in rhs], dtype=np.float64)
    try:
        x = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as e:
        raise SingularSystemError(f"Вырожденная система: {e}") from e
    residual = float(np.max(np.abs(a @ x - b)))
    if residual > tolerance:
        raise VerificationError("float_residual", detail=f"невязка {residual:.3e} > {tolerance:.1e}")
    logger.debug(f"Решение в плавающей точке: n={matrix.n_rows}, невязка {residual:.3e}")
    return x, residual


def random_rational_vector(rng: np.random.Generator, size: int,
                           max_numerator: int = 10, max_denominator: int = 9) -> List[Fraction]:
    """Псевдослучайный рациональный вектор для выборочных проверок"""
    numerators = rng.integers(-max_numerator, max_numerator + 1, size=size)
    denominators = rng.integers(1, max_denominator + 1, size=size)
    return [Fraction(int(p), int(q)) for p, q in zip(numerators, denominators)]


def random_rational_matrix(rng: np.random.Generator, n_rows: int, n_cols: int,
                           max_numerator: int = 10, max_denominator: int = 9) -> RationalMatrix:
    values = [random_rational_vector(rng, n_cols, max_numerator, max_denominator) for _ in range(n_rows)]
    return RationalMatrix(n_rows, n_cols, {i: dict(enumerate(row)) for i, row in enumerate(values)})


def dot(u: Sequence[Number], v: Sequence[Number]) -> Fraction:
    if len(u) != len(v):
        raise DimensionMismatchError(f"Длины векторов {len(u)} и {len(v)} не совпадают")
    return sum((Fraction(a) * b for a, b in zip(u, v)), Fraction(0))


def parse_rationals(values: Iterable) -> Tuple[Fraction, ...]:
    return tuple(to_rational(v) for v in values)

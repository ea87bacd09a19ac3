"""Мера Бернулли, цилиндрические функции и функции на уровнях V_m"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, Iterator, Optional, Sequence, Tuple, Union

from .exact_numeric import Number, format_rational, parse_rationals, to_rational
from .exceptions import AlphabetMismatchError, DomainError, LevelMismatchError
from .shift_space import Alphabet, Point, Word, enumerate_level, word_index

logger = logging.getLogger(__name__)

PointEvaluator = Callable[[Point], Fraction]


def bernoulli_measure(n: int, word: Sequence[int]) -> Fraction:
    """μ([w]) = N^{-|w|}"""
    alphabet = Alphabet(n)
    for symbol in word:
        alphabet.check_symbol(symbol)
    return Fraction(1, n ** len(word))


@dataclass(frozen=True)
class CylinderFunction:
    """Локально постоянная функция глубины K.

    values[i] - значение на i-м слове длины K в лексикографическом порядке.
    """
    n_symbols: int
    depth: int
    values: Tuple[Fraction, ...]

    def __post_init__(self):
        Alphabet(self.n_symbols)
        if self.depth < 0:
            raise DomainError(f"Глубина должна быть неотрицательной, получено {self.depth}")
        if len(self.values) != self.n_symbols ** self.depth:
            raise DomainError(
                f"Ожидалось {self.n_symbols ** self.depth} значений, получено {len(self.values)}")
        object.__setattr__(self, "values", tuple(Fraction(v) for v in self.values))

    @classmethod
    def constant(cls, n: int, value: Number) -> "CylinderFunction":
        return cls(n, 0, (Fraction(value),))

    @classmethod
    def from_cells(cls, n: int, depth: int, cells: Dict[Word, Number]) -> "CylinderFunction":
        """Функция по словарю слово -> значение (отсутствующие клетки равны 0)"""
        values = [Fraction(0)] * (n ** depth)
        for word, value in cells.items():
            if len(word) != depth:
                raise DomainError(f"Слово {word} не имеет длины {depth}")
            values[word_index(n, word)] = Fraction(value)
        return cls(n, depth, tuple(values))

    def _check_alphabet(self, n: int):
        if n != self.n_symbols:
            raise AlphabetMismatchError(self.n_symbols, n)

    def words(self) -> Iterator[Word]:
        return Alphabet(self.n_symbols).words(self.depth)

    def cell_value(self, word: Sequence[int]) -> Fraction:
        return self.values[word_index(self.n_symbols, word[:self.depth])]

    def evaluate(self, x: Point) -> Fraction:
        self._check_alphabet(x.n)
        return self.values[word_index(self.n_symbols, x.head(self.depth))]

    __call__ = evaluate

    def refine(self, new_depth: int) -> "CylinderFunction":
        if new_depth < self.depth:
            raise DomainError(f"Нельзя уменьшить глубину {self.depth} до {new_depth} уточнением")
        factor = self.n_symbols ** (new_depth - self.depth)
        return CylinderFunction(self.n_symbols, new_depth,
                                tuple(v for v in self.values for _ in range(factor)))

    def simplify(self) -> "CylinderFunction":
        """Наименьшая глубина, задающая ту же функцию"""
        current = self
        n = self.n_symbols
        while current.depth > 0:
            blocks = [current.values[i:i + n] for i in range(0, len(current.values), n)]
            if any(len(set(block)) != 1 for block in blocks):
                break
            current = CylinderFunction(n, current.depth - 1, tuple(block[0] for block in blocks))
        return current

    def integrate(self) -> Fraction:
        """∫ f dμ = Σ_w f(w) N^{-K}"""
        return sum(self.values, Fraction(0)) / self.n_symbols ** self.depth

    def cell_integral(self, word: Sequence[int]) -> Fraction:
        """∫_{[w]} f dμ"""
        n = self.n_symbols
        if len(word) >= self.depth:
            return self.cell_value(word) / n ** len(word)
        span = n ** (self.depth - len(word))
        start = word_index(n, word) * span
        return sum(self.values[start:start + span], Fraction(0)) / n ** self.depth

    def sup_norm(self) -> Fraction:
        return max(abs(v) for v in self.values)

    def _aligned(self, other: "CylinderFunction") -> Tuple["CylinderFunction", "CylinderFunction"]:
        self._check_alphabet(other.n_symbols)
        depth = max(self.depth, other.depth)
        return self.refine(depth), other.refine(depth)

    def _combine(self, other: Union["CylinderFunction", Number], op) -> "CylinderFunction":
        if isinstance(other, CylinderFunction):
            left, right = self._aligned(other)
            return CylinderFunction(self.n_symbols, left.depth,
                                    tuple(op(a, b) for a, b in zip(left.values, right.values)))
        scalar = to_rational(other)
        return CylinderFunction(self.n_symbols, self.depth, tuple(op(a, scalar) for a in self.values))

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def __mul__(self, other):
        return self._combine(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __neg__(self) -> "CylinderFunction":
        return self * -1

    def same_function(self, other: "CylinderFunction") -> bool:
        """Равенство как функций на Σ_N⁺ (независимо от глубины записи)"""
        left, right = self._aligned(other)
        return left.values == right.values

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "N": self.n_symbols,
            "depth": self.depth,
            "values": [format_rational(v) for v in self.values],
        }

    @classmethod
    def from_json_dict(cls, data: Dict[str, Any]) -> "CylinderFunction":
        try:
            return cls(int(data["N"]), int(data["depth"]), parse_rationals(data["values"]))
        except KeyError as e:
            raise DomainError(f"В файле функции отсутствует поле {e}") from e


@dataclass(frozen=True)
class LevelVector:
    """Функция на V_m, значения в порядке ≺"""
    n_symbols: int
    level: int
    values: Tuple[Fraction, ...]

    def __post_init__(self):
        Alphabet(self.n_symbols)
        expected = self.n_symbols ** (self.level + 1)
        if len(self.values) != expected:
            raise DomainError(f"Вектор уровня {self.level} должен иметь длину {expected}, получено {len(self.values)}")
        object.__setattr__(self, "values", tuple(Fraction(v) for v in self.values))

    @classmethod
    def constant(cls, n: int, level: int, value: Number) -> "LevelVector":
        return cls(n, level, (Fraction(value),) * n ** (level + 1))

    @classmethod
    def from_mapping(cls, n: int, level: int, mapping: Dict[Point, Number],
                     default: Number = 0) -> "LevelVector":
        points = enumerate_level(n, level)
        return cls(n, level, tuple(Fraction(mapping.get(p, default)) for p in points))

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> Fraction:
        return self.values[i]

    def at(self, p: Point) -> Fraction:
        return self.values[enumerate_level(self.n_symbols, self.level).index_of(p)]

    def check_compatible(self, other: "LevelVector"):
        if other.n_symbols != self.n_symbols:
            raise AlphabetMismatchError(self.n_symbols, other.n_symbols)
        if other.level != self.level:
            raise LevelMismatchError(self.level, other.level)

    def __add__(self, other: "LevelVector") -> "LevelVector":
        self.check_compatible(other)
        return LevelVector(self.n_symbols, self.level, tuple(a + b for a, b in zip(self.values, other.values)))

    def __sub__(self, other: "LevelVector") -> "LevelVector":
        self.check_compatible(other)
        return LevelVector(self.n_symbols, self.level, tuple(a - b for a, b in zip(self.values, other.values)))

    def scale(self, factor: Number) -> "LevelVector":
        factor = Fraction(factor)
        return LevelVector(self.n_symbols, self.level, tuple(v * factor for v in self.values))

    def is_constant(self) -> bool:
        return len(set(self.values)) == 1

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "N": self.n_symbols,
            "level": self.level,
            "values": [format_rational(v) for v in self.values],
        }

    @classmethod
    def from_json_dict(cls, data: Dict[str, Any]) -> "LevelVector":
        try:
            return cls(int(data["N"]), int(data["level"]), parse_rationals(data["values"]))
        except KeyError as e:
            raise DomainError(f"В файле вектора отсутствует поле {e}") from e


def alphabet_of(u: PointEvaluator, n_symbols: Optional[int] = None) -> int:
    """Размер алфавита вычислителя: явный аргумент или атрибут n_symbols"""
    if n_symbols is not None:
        return n_symbols
    n = getattr(u, "n_symbols", None)
    if n is None:
        raise DomainError("Для вычислителя без атрибута n_symbols нужно указать размер алфавита")
    return n


def indicator(p: Point, m: int) -> CylinderFunction:
    """χ_p^m: 1 на цилиндре [p_1 ... p_{m+1}]"""
    if p.depth > m:
        raise DomainError(f"Точка {p} глубины {p.depth} не лежит в V_{m}")
    return CylinderFunction.from_cells(p.n, m + 1, {p.head(m + 1): 1})


def restrict(u: PointEvaluator, m: int, n_symbols: Optional[int] = None) -> LevelVector:
    """u|_{V_m}"""
    n = alphabet_of(u, n_symbols)
    return LevelVector(n, m, tuple(Fraction(u(p)) for p in enumerate_level(n, m)))


def min_energy_extension(v: LevelVector) -> CylinderFunction:
    """Продолжение с V_m, постоянное на цилиндрах длины m+1"""
    n, m = v.n_symbols, v.level
    level = enumerate_level(n, m)
    values = tuple(v.values[level.index_of(Point.from_word(n, word))]
                   for word in Alphabet(n).words(m + 1))
    return CylinderFunction(n, m + 1, values)


def harmonic_approximation(u: PointEvaluator, m: int, n_symbols: Optional[int] = None) -> CylinderFunction:
    """u_m = Σ_{p∈V_m} u(p) χ_p^m"""
    return min_energy_extension(restrict(u, m, n_symbols))


def approximation_error(u: PointEvaluator, m: int, probe_level: Optional[int] = None,
                        n_symbols: Optional[int] = None) -> Fraction:
    """sup по V_probe от |u - u_m| (по умолчанию probe = m + 2)"""
    n = alphabet_of(u, n_symbols)
    probe = m + 2 if probe_level is None else probe_level
    approximation = harmonic_approximation(u, m, n)
    return max(abs(Fraction(u(p)) - approximation(p)) for p in enumerate_level(n, probe))


@dataclass(frozen=True)
class DyadicCoordinateSum:
    """Вычислитель u(x) = Σ_i x_i 2^{-i}"""
    n_symbols: int

    def __call__(self, p: Point) -> Fraction:
        total = sum((Fraction(s, 2 ** i) for i, s in enumerate(p.prefix, start=1)), Fraction(0))
        return total + Fraction(p.tail, 2 ** p.depth)

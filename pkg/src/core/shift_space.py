"""Комбинаторика одностороннего полного сдвига на финально-постоянных точках.

Точка хранится в канонической форме (prefix, tail): последний символ
непустого префикса отличен от хвостового символа, поэтому глубина точки
равна длине префикса и совпадает с минимальным m, при котором точка лежит в V_m.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, FrozenSet, Iterator, List, Sequence, Tuple, Union

from .exceptions import AlphabetMismatchError, DomainError, ResourceLimitError

logger = logging.getLogger(__name__)

Word = Tuple[int, ...]
RhoValue = Union[int, float]

DEFAULT_MAX_POINTS = 10 ** 6


@dataclass(frozen=True)
class Alphabet:
    """Алфавит {1, ..., N}"""
    size: int

    def __post_init__(self):
        if self.size < 2:
            raise DomainError(f"Размер алфавита должен быть не меньше 2, получено {self.size}")

    @property
    def symbols(self) -> range:
        return range(1, self.size + 1)

    def check_symbol(self, symbol: int) -> int:
        if not 1 <= symbol <= self.size:
            raise DomainError(f"Символ {symbol} вне алфавита 1..{self.size}")
        return symbol

    def words(self, length: int) -> Iterator[Word]:
        """Все слова длины length в лексикографическом порядке"""
        return itertools.product(self.symbols, repeat=length)


def word_index(n: int, word: Sequence[int]) -> int:
    """Позиция слова в лексикографическом порядке слов той же длины"""
    index = 0
    for symbol in word:
        index = index * n + (symbol - 1)
    return index


@dataclass(frozen=True)
class Point:
    """Финально-постоянная точка (p_1 ... p_k ṫ) пространства Σ_N⁺"""
    n: int
    prefix: Word
    tail: int

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"Размер алфавита должен быть не меньше 2, получено {self.n}")
        for symbol in self.prefix + (self.tail,):
            if not 1 <= symbol <= self.n:
                raise DomainError(f"Символ {symbol} вне алфавита 1..{self.n}")
        if self.prefix and self.prefix[-1] == self.tail:
            raise DomainError(f"Неканоническая запись точки: {self.prefix}~{self.tail}")

    @classmethod
    def of(cls, n: int, prefix: Sequence[int], tail: int) -> "Point":
        """Построение точки с приведением к канонической форме"""
        word = tuple(prefix)
        end = len(word)
        while end > 0 and word[end - 1] == tail:
            end -= 1
        return cls(n, word[:end], tail)

    @classmethod
    def from_word(cls, n: int, word: Sequence[int]) -> "Point":
        """Точка (w_1 ... w_{K-1} ẇ_K), представляющая цилиндр [w]"""
        if not word:
            raise DomainError("Пустое слово не задает точку")
        return cls.of(n, word[:-1], word[-1])

    @classmethod
    def parse(cls, text: str, n: int) -> "Point":
        """Разбор строки вида '12~1' (для N ≥ 10 символы префикса разделяются точкой)"""
        head, sep, tail = text.strip().partition("~")
        if not sep or not tail:
            raise DomainError(f"Некорректная запись точки: '{text}'")
        try:
            if "." in head or n >= 10:
                prefix = tuple(int(s) for s in head.split(".") if s)
            else:
                prefix = tuple(int(s) for s in head)
            tail_symbol = int(tail)
        except ValueError as e:
            raise DomainError(f"Некорректная запись точки: '{text}'") from e
        return cls.of(n, prefix, tail_symbol)

    @property
    def depth(self) -> int:
        return len(self.prefix)

    def symbol(self, i: int) -> int:
        """Координата x_i (нумерация с 1)"""
        if i < 1:
            raise DomainError(f"Индекс координаты должен быть положительным, получено {i}")
        return self.prefix[i - 1] if i <= len(self.prefix) else self.tail

    def head(self, length: int) -> Word:
        """Первые length координат"""
        if length <= len(self.prefix):
            return self.prefix[:length]
        return self.prefix + (self.tail,) * (length - len(self.prefix))

    def __str__(self) -> str:
        sep = "." if self.n >= 10 else ""
        return f"{sep.join(str(s) for s in self.prefix)}~{self.tail}"


def fixed_point(n: int, symbol: int) -> Point:
    return Point(n, (), symbol)


def _check_same_alphabet(x: Point, y: Point):
    if x.n != y.n:
        raise AlphabetMismatchError(x.n, y.n)


def shift(p: Point) -> Point:
    """σ: отбрасывает первый символ"""
    if not p.prefix:
        return p
    return Point.of(p.n, p.prefix[1:], p.tail)


def inverse_branch(symbol: int, p: Point) -> Point:
    """σ_l: приписывает символ l слева"""
    Alphabet(p.n).check_symbol(symbol)
    return Point.of(p.n, (symbol,) + p.prefix, p.tail)


def rho(x: Point, y: Point) -> RhoValue:
    """Первый индекс несовпадения; math.inf при x = y"""
    _check_same_alphabet(x, y)
    for i in range(1, max(x.depth, y.depth) + 2):
        if x.symbol(i) != y.symbol(i):
            return i
    return math.inf


def distance(x: Point, y: Point) -> Fraction:
    r = rho(x, y)
    if r == math.inf:
        return Fraction(0)
    return Fraction(1, 2 ** int(r))


@dataclass(frozen=True)
class LevelSet:
    """Упорядоченное множество V_m"""
    n: int
    m: int
    points: Tuple[Point, ...]
    index: Dict[Point, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {p: i for i, p in enumerate(self.points)})

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[Point]:
        return iter(self.points)

    def __getitem__(self, i: int) -> Point:
        return self.points[i]

    def __contains__(self, p: object) -> bool:
        return p in self.index

    @property
    def inherited_count(self) -> int:
        """Число точек V_{m-1} (0 для m = 0)"""
        return self.n ** self.m if self.m > 0 else 0

    @property
    def new_points(self) -> Tuple[Point, ...]:
        """V_m \\ V_{m-1}"""
        return self.points[self.inherited_count:]

    def index_of(self, p: Point) -> int:
        try:
            return self.index[p]
        except KeyError:
            raise DomainError(f"Точка {p} не принадлежит V_{self.m} (N={self.n})") from None

    def to_strings(self) -> List[str]:
        return [str(p) for p in self.points]


@lru_cache(maxsize=None)
def _build_level(n: int, m: int) -> LevelSet:
    if m == 0:
        return LevelSet(n, 0, tuple(fixed_point(n, l) for l in range(1, n + 1)))
    previous = _build_level(n, m - 1)
    fresh = []
    # ключ новой точки q: (позиция σ(q) в V_{m-1}, q_1)
    for parent in previous.new_points:
        for symbol in range(1, n + 1):
            candidate = Point.of(n, (symbol,) + parent.prefix, parent.tail)
            if candidate.depth == m:
                fresh.append(candidate)
    logger.debug(f"Построен уровень V_{m} для N={n}: {len(previous) + len(fresh)} точек")
    return LevelSet(n, m, previous.points + tuple(fresh))


def enumerate_level(n: int, m: int, max_points: int = DEFAULT_MAX_POINTS) -> LevelSet:
    """V_m в порядке ≺"""
    Alphabet(n)
    if m < 0:
        raise DomainError(f"Уровень должен быть неотрицательным, получено {m}")
    size = n ** (m + 1)
    if size > max_points:
        raise ResourceLimitError(size, max_points)
    return _build_level(n, m)


def relation_class(n: int, word: Sequence[int]) -> Tuple[Point, ...]:
    """Класс m-отношения [w]|_{V_m}, m = |w|, в порядке хвостового символа"""
    return tuple(Point.of(n, word, l) for l in range(1, n + 1))


def is_related(p: Point, q: Point, m: int) -> bool:
    """p и q лежат в V_m и совпадают в первых m координатах"""
    _check_same_alphabet(p, q)
    return p.depth <= m and q.depth <= m and p.head(m) == q.head(m)


def neighbours(p: Point, m: int) -> FrozenSet[Point]:
    """𝒰_{p,m}: N-1 точек V_m, m-связанных с p"""
    if p.depth > m:
        raise DomainError(f"Точка {p} глубины {p.depth} не лежит в V_{m}")
    return frozenset(q for q in relation_class(p.n, p.head(m)) if q != p)


def new_neighbours(p: Point, m: int) -> Tuple[FrozenSet[Point], Point]:
    """U_{p,m} (соседи из V_m \\ V_{m-1}) и унаследованный сосед q^{N-1} из V_{m-1}"""
    if m < 1 or p.depth != m:
        raise DomainError(f"Точка {p} не лежит в V_{m} \\ V_{m - 1}")
    fresh = []
    inherited = None
    for q in relation_class(p.n, p.head(m)):
        if q == p:
            continue
        if q.depth == m:
            fresh.append(q)
        else:
            inherited = q
    return frozenset(fresh), inherited


def connecting_chain(p: Point) -> List[Point]:
    """Цепочка (ṗ_1), ..., p по координатам n с p_n ≠ p_{n+1}"""
    chain = [fixed_point(p.n, p.symbol(1))]
    for k in range(1, p.depth + 1):
        if p.symbol(k) != p.symbol(k + 1):
            chain.append(Point.of(p.n, p.head(k), p.symbol(k + 1)))
    return chain


def join_points(a: Point, b: Point) -> List[Point]:
    """Путь a → (ȧ_1) → (ḃ_1) → b из связующих цепочек"""
    _check_same_alphabet(a, b)
    path: List[Point] = []
    for q in list(reversed(connecting_chain(a))) + connecting_chain(b):
        if not path or path[-1] != q:
            path.append(q)
    return path


def is_valid_path(path: Sequence[Point]) -> bool:
    """Каждая пара соседних точек k-связана при k = глубине более глубокой точки"""
    for x, y in zip(path, path[1:]):
        if x == y:
            continue
        if not is_related(x, y, max(x.depth, y.depth)):
            return False
    return True

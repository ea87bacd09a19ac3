"""Иерархия исключений библиотеки shift-laplace"""

from typing import Any, Optional


class ShiftLaplaceError(Exception):
    """Базовое исключение библиотеки"""


class DomainError(ShiftLaplaceError, ValueError):
    """Нарушение предусловий операции (символ вне алфавита, a = b и т.п.)"""


class AlphabetMismatchError(DomainError):
    """Операнды заданы над разными алфавитами"""

    def __init__(self, left: int, right: int):
        super().__init__(f"Несовпадение алфавитов: N={left} и N={right}")
        self.left = left
        self.right = right


class LevelMismatchError(DomainError):
    """Уровень вектора не совпадает с уровнем оператора"""

    def __init__(self, expected: int, actual: int):
        super().__init__(f"Ожидался уровень m={expected}, получен m={actual}")
        self.expected = expected
        self.actual = actual


class NoAdmissiblePairError(DomainError):
    """Для (N, m) не существует пары с требуемыми координатными условиями"""


class ResourceLimitError(ShiftLaplaceError):
    """Превышен лимит на число точек или размер матрицы"""

    def __init__(self, requested: int, limit: int, what: str = "точек"):
        super().__init__(f"Запрошено {requested} {what}, лимит {limit}")
        self.requested = requested
        self.limit = limit


class DimensionMismatchError(ShiftLaplaceError, ValueError):
    """Несогласованные размерности матриц или векторов"""


class SingularSystemError(ShiftLaplaceError, ArithmeticError):
    """Вырожденная линейная система"""


class VerificationError(ShiftLaplaceError, AssertionError):
    """Нарушено проверяемое свойство.

    Сообщение содержит имя свойства и координаты (N, m[, p]) нарушения.
    """

    def __init__(self, prop: str, n: Optional[int] = None, m: Optional[int] = None,
                 point: Optional[Any] = None, detail: str = ""):
        where = []
        if n is not None:
            where.append(f"N={n}")
        if m is not None:
            where.append(f"m={m}")
        if point is not None:
            where.append(f"p={point}")
        message = f"Свойство '{prop}' нарушено"
        if where:
            message += f" ({', '.join(where)})"
        if detail:
            message += f": {detail}"
        super().__init__(message)
        self.prop = prop
        self.n = n
        self.m = m
        self.point = point
        self.detail = detail

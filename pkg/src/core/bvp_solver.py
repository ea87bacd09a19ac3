"""Решение задачи Дирихле Δu = f, u|_{V₀} = ζ и его проверка"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Tuple

from pydantic import BaseModel

from .exact_numeric import Number, format_rational, parse_rationals
from .exceptions import AlphabetMismatchError, DomainError, VerificationError
from .green_laplacian import GreenOperator, laplacian_residuals
from .measure_functions import CylinderFunction, min_energy_extension, restrict
from .shift_space import Point, enumerate_level, fixed_point

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoundaryData:
    """ζ(l̇), l = 1..N"""
    n_symbols: int
    values: Tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.values) != self.n_symbols:
            raise DomainError(f"Ожидалось {self.n_symbols} граничных значений, получено {len(self.values)}")
        object.__setattr__(self, "values", tuple(Fraction(v) for v in self.values))

    def at(self, symbol: int) -> Fraction:
        return self.values[symbol - 1]

    def as_cylinder(self) -> CylinderFunction:
        """Σ_l ζ(l̇)·1_{[l]}"""
        return CylinderFunction(self.n_symbols, 1, self.values)

    def to_json_dict(self) -> Dict[str, Any]:
        return {"N": self.n_symbols, "values": [format_rational(v) for v in self.values]}

    @classmethod
    def from_json_dict(cls, data: Dict[str, Any]) -> "BoundaryData":
        try:
            return cls(int(data["N"]), parse_rationals(data["values"]))
        except KeyError as e:
            raise DomainError(f"В файле граничных данных отсутствует поле {e}") from e


@dataclass(frozen=True)
class BvpSolution:
    """u = harmonic - G_μf"""
    boundary: BoundaryData
    harmonic: CylinderFunction
    source: CylinderFunction
    green: GreenOperator = field(compare=False, repr=False)

    @property
    def n_symbols(self) -> int:
        return self.source.n_symbols

    def __call__(self, p: Point) -> Fraction:
        return self.harmonic(p) - self.green(p)

    @property
    def exact_from_level(self) -> int:
        """Уровень, начиная с которого невязка обязана быть нулевой"""
        return max(1, self.source.simplify().depth - 1, self.harmonic.simplify().depth)

    def sample(self, depth: int) -> CylinderFunction:
        """Цилиндрическое приближение: продолжение u|_{V_depth}"""
        return min_energy_extension(restrict(self, depth))


def solve(f: CylinderFunction, zeta: BoundaryData) -> BvpSolution:
    """u = Σ_{p∈V₀} ζ(p)χ_p^0 - G_μf"""
    if f.n_symbols != zeta.n_symbols:
        raise AlphabetMismatchError(f.n_symbols, zeta.n_symbols)
    logger.debug(f"Решение задачи Дирихле: N={f.n_symbols}, глубина f = {f.depth}")
    return BvpSolution(zeta, zeta.as_cylinder(), f, GreenOperator(f))


def evaluate_solution(solution: BvpSolution, p: Point) -> Fraction:
    return solution(p)


class LevelResidual(BaseModel):
    m: int
    max_residual: str
    asserted: bool


class VerificationReport(BaseModel):
    """Итог проверки решения"""
    n: int
    source_depth: int
    harmonic_depth: int
    exact_from_level: int
    m_max: int
    boundary_exact: bool
    levels: List[LevelResidual]
    passed: bool


def verify_solution(solution: BvpSolution, m_max: int) -> VerificationReport:
    """Проверка граничных значений и нулевой невязки N^{m+1}H_m u - f"""
    n = solution.n_symbols
    for l in range(1, n + 1):
        value = solution(fixed_point(n, l))
        if value != solution.boundary.at(l):
            raise VerificationError("boundary_values", n, 0, fixed_point(n, l),
                                    f"u = {value}, ζ = {solution.boundary.at(l)}")

    start = solution.exact_from_level
    levels = []
    for m in range(1, m_max + 1):
        residuals = laplacian_residuals(solution, solution.source, m)
        asserted = m >= start
        if asserted:
            for p, r in residuals:
                if r != 0:
                    raise VerificationError("laplacian_residual", n, m, p, f"невязка {r}")
        worst = max(abs(r) for _, r in residuals)
        levels.append(LevelResidual(m=m, max_residual=format_rational(worst), asserted=asserted))
        logger.debug(f"Уровень {m}: максимальная невязка {worst}")

    return VerificationReport(
        n=n,
        source_depth=solution.source.depth,
        harmonic_depth=solution.harmonic.depth,
        exact_from_level=start,
        m_max=m_max,
        boundary_exact=True,
        levels=levels,
        passed=True,
    )


def add_harmonic_perturbation(solution: BvpSolution, h: CylinderFunction) -> BvpSolution:
    """u + h для цилиндрической h, равной нулю на V₀"""
    if h.n_symbols != solution.n_symbols:
        raise AlphabetMismatchError(solution.n_symbols, h.n_symbols)
    for p in enumerate_level(h.n_symbols, 0):
        if h(p) != 0:
            raise DomainError(f"Возмущение должно обращаться в 0 на V₀, h({p}) = {h(p)}")
    return BvpSolution(solution.boundary, solution.harmonic + h, solution.source, solution.green)


def superpose(alpha: Number, first: Tuple[CylinderFunction, BoundaryData],
              beta: Number, second: Tuple[CylinderFunction, BoundaryData]) -> BvpSolution:
    """Решение для (αf₁ + βf₂, αζ₁ + βζ₂)"""
    (f1, z1), (f2, z2) = first, second
    zeta = BoundaryData(z1.n_symbols, tuple(alpha * a + beta * b for a, b in zip(z1.values, z2.values)))
    return solve(f1 * alpha + f2 * beta, zeta)

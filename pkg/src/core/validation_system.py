"""Набор приемочных проверок и асинхронный запуск (report-all)"""

import asyncio
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel

from .bvp_solver import BoundaryData, solve, verify_solution
from .config import RunConfig
from .difference_operators import (check_block_identities, dirichlet_form, dirichlet_form_pairwise, energy,
                                   local_laplacian, structural_check, unit_clamp)
from .energy_resistance import block_path_resistance, effective_resistance, resistance_witness, unbounded_pair
from .exact_numeric import format_decimal, format_rational, random_rational_vector
from .exceptions import ShiftLaplaceError
from .green_laplacian import (GreenOperator, check_green_bound, green_function, green_function_fast,
                              green_operator, pointwise_laplacian_trace)
from .measure_functions import (CylinderFunction, DyadicCoordinateSum, LevelVector, approximation_error,
                                min_energy_extension, restrict)
from .shift_space import Point, enumerate_level

logger = logging.getLogger(__name__)


class CriterionResult(BaseModel):
    """Итог одного приемочного критерия"""
    criterion: int
    name: str
    passed: bool
    details: Dict[str, Any] = {}
    error: Optional[str] = None


class AcceptanceReport(BaseModel):
    quick: bool
    seed: int
    results: List[CriterionResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)


def _grid(limit: int, alphabets: Sequence[int] = (2, 3, 4, 5)) -> List[tuple]:
    """(N, m) с N^{m+1} ≤ limit"""
    cases = []
    for n in alphabets:
        m = 0
        while n ** (m + 1) <= limit:
            cases.append((n, m))
            m += 1
    return cases


def random_cylinder(rng: np.random.Generator, n: int, depth: int) -> CylinderFunction:
    return CylinderFunction(n, depth, tuple(random_rational_vector(rng, n ** depth)))


def random_point(rng: np.random.Generator, n: int, max_depth: int) -> Point:
    depth = int(rng.integers(0, max_depth + 1))
    word = [int(s) for s in rng.integers(1, n + 1, size=depth + 1)]
    return Point.of(n, word[:-1], word[-1])


def operator_structure(config: Dict[str, Any], quick: bool) -> Dict[str, Any]:
    """Симметрия, нулевые суммы строк, внедиагональные 0/1, ранг, ядро, 𝔈 ≥ 0"""
    settings = RunConfig(**config)
    limit = 130 if quick else 1300
    samples = 20 if quick else settings.sample_count
    cases = {}
    passed = True
    for n, m in _grid(limit):
        report = structural_check(n, m, seed=settings.seed, sample_count=samples,
                                  max_dense_points=settings.max_dense_points, include_blocks=False)
        cases[f"N={n},m={m}"] = {"rank": report.rank, "failures": report.failures()}
        passed = passed and report.passed
    return {"passed": passed, "cases": cases}


def block_identities(config: Dict[str, Any], quick: bool) -> Dict[str, Any]:
    """T_m = H_{m-1} + J_mᵀX_m⁻¹J_m и X_m·(-G_m) = I"""
    settings = RunConfig(**config)
    limit = 130 if quick else 1300
    rng = np.random.default_rng(settings.seed)
    cases = {}
    passed = True
    for n, m in _grid(limit):
        if m == 0:
            continue
        properties = check_block_identities(n, m, rng, 20 if quick else settings.sample_count,
                                            settings.max_dense_points)
        failures = [name for name, result in properties.items() if not result.passed]
        cases[f"N={n},m={m}"] = failures
        passed = passed and not failures
    return {"passed": passed, "cases": cases}


def form_equivalence(config: Dict[str, Any], quick: bool) -> Dict[str, Any]:
    """-⟨u, H_m v⟩ совпадает с полусуммой произведений разностей"""
    settings = RunConfig(**config)
    rng = np.random.default_rng(settings.seed + 3)
    pairs = 10 if quick else 100
    mismatches = 0
    total = 0
    for n, m in _grid(130 if quick else 1300):
        size = n ** (m + 1)
        for _ in range(pairs):
            u = LevelVector(n, m, tuple(random_rational_vector(rng, size)))
            v = LevelVector(n, m, tuple(random_rational_vector(rng, size)))
            total += 1
            if dirichlet_form(m, u, v) != dirichlet_form_pairwise(m, u, v):
                mismatches += 1
    return {"passed": mismatches == 0, "pairs": total, "mismatches": mismatches}


def markov_property(config: Dict[str, Any], quick: bool) -> Dict[str, Any]:
    """Обрезка до [0, 1] не увеличивает форму"""
    settings = RunConfig(**config)
    rng = np.random.default_rng(settings.seed + 4)
    cases = _grid(130 if quick else 1300)
    count = 50 if quick else 500
    violations = 0
    for k in range(count):
        n, m = cases[k % len(cases)]
        u = LevelVector(n, m, tuple(random_rational_vector(rng, n ** (m + 1), max_numerator=6, max_denominator=4)))
        if energy(m, unit_clamp(u)) > energy(m, u):
            violations += 1
    return {"passed": violations == 0, "vectors": count, "violations": violations}


def compatible_extension(config: Dict[str, Any], quick: bool) -> Dict[str, Any]:
    """Продолжение сохраняет форму, любое другое продолжение ее строго увеличивает"""
    settings = RunConfig(**config)
    rng = np.random.default_rng(settings.seed + 5)
    m_top = 2 if quick else 4
    failures = []
    checked = 0
    for n in (2, 3):
        for m in range(m_top + 1):
            size = n ** (m + 1)
            for _ in range(3 if quick else 10):
                v = LevelVector(n, m, tuple(random_rational_vector(rng, size)))
                extended = restrict(min_energy_extension(v), m + 1)
                if extended.values[:size] != v.values or energy(m + 1, extended) != energy(m, v):
                    failures.append(f"N={n},m={m}: сохранение энергии")
                noise = random_rational_vector(rng, n ** (m + 2) - size)
                if not any(noise):
                    noise[0] = Fraction(1)
                other = LevelVector(n, m + 1, v.values + tuple(
                    a + b for a, b in zip(extended.values[size:], noise)))
                if not energy(m + 1, other) > energy(m, v):
                    failures.append(f"N={n},m={m}: другое продолжение")
                checked += 1
    return {"passed": not failures, "checked": checked, "failures": failures[:10]}


def green_bound(config: Dict[str, Any], quick: bool) -> Dict[str, Any]:
    """g(x, y) ≤ (2ρ-3)/N полным перебором; замкнутая форма = определение"""
    settings = RunConfig(**config)
    reports = [check_green_bound(2, 3 if quick else 4), check_green_bound(3, 2 if quick else 3)]
    rng = np.random.default_rng(settings.seed + 6)
    samples = 1000 if quick else 10_000
    mismatches = 0
    for k in range(samples):
        n = (2, 3, 4)[k % 3]
        x, y = random_point(rng, n, 6), random_point(rng, n, 6)
        if green_function(x, y) != green_function_fast(x, y):
            mismatches += 1
    return {
        "passed": all(r.passed for r in reports) and mismatches == 0,
        "exhaustive": [r.dict() for r in reports],
        "sampled_pairs": samples,
        "mismatches": mismatches,
    }


def green_operator_identity(config: Dict[str, Any], quick: bool) -> Dict[str, Any]:
    """H_n(G_μf)(p) = -∫χ_p^n f dμ для p ∈ V_n \\ V_{n-1}"""
    settings = RunConfig(**config)
    rng = np.random.default_rng(settings.seed + 7)
    functions = 10 if quick else 50
    n_top = 3 if quick else 4
    failures = []
    checked = 0
    for k in range(functions):
        n = 2 + k % 2
        f = random_cylinder(rng, n, k % 4)
        evaluator = GreenOperator(f)
        for level in range(1, n_top + 1):
            for p in enumerate_level(n, level).new_points:
                checked += 1
                if local_laplacian(evaluator, p, level) != -f.cell_integral(p.head(level + 1)):
                    failures.append(f"N={n}, n={level}, p={p}")
        probe = enumerate_level(n, 2).new_points[0]
        if green_operator(f, probe) != evaluator(probe):
            failures.append(f"N={n}: определение G_μf в {probe}")
    return {"passed": not failures, "checked": checked, "failures": failures[:10]}


def boundary_value_problem(config: Dict[str, Any], quick: bool) -> Dict[str, Any]:
    """Граничные значения точны, невязка равна 0 при max(1, K-1) ≤ m ≤ 6"""
    settings = RunConfig(**config)
    rng = np.random.default_rng(settings.seed + 8)
    m_max = 4 if quick else 6
    runs = []
    passed = True
    for n in (2, 3):
        for depth in range(3 if quick else 4):
            f = random_cylinder(rng, n, depth)
            zeta = BoundaryData(n, tuple(random_rational_vector(rng, n)))
            try:
                report = verify_solution(solve(f, zeta), m_max)
                runs.append({"N": n, "depth": depth, "exact_from_level": report.exact_from_level})
            except ShiftLaplaceError as e:
                passed = False
                runs.append({"N": n, "depth": depth, "error": str(e)})
    return {"passed": passed, "runs": runs}


def resistance_unboundedness(config: Dict[str, Any], quick: bool) -> Dict[str, Any]:
    """N = 3: min 𝔈 < 1/(m+1), т.е. R(a, b) > m+1"""
    settings = RunConfig(**config)
    n = 3
    levels = range(2, 5) if quick else range(2, 7)
    cases = {}
    passed = True
    for m in levels:
        a, b = unbounded_pair(n, m)
        result = effective_resistance(a, b, exact_solve_limit=settings.exact_solve_limit,
                                      float_fallback=settings.float_fallback,
                                      tolerance=settings.float_tolerance)
        bound = Fraction(1, m + 1)
        margin = result.margin_below(bound)
        ok = margin > 0
        if not result.exact:
            ok = ok and margin >= 10 * result.residual
        closed_form = block_path_resistance(a, b)
        if result.exact:
            ok = ok and result.resistance == closed_form
        else:
            ok = ok and abs(result.resistance - float(closed_form)) <= 1e-6
        witness = resistance_witness(n, m)
        cases[str(m)] = {
            "a": str(a),
            "b": str(b),
            "exact": result.exact,
            "min_energy": format_rational(result.min_energy) if result.exact else format_decimal(result.min_energy),
            "resistance_decimal": format_decimal(result.resistance),
            "clique_path_resistance": format_rational(closed_form),
            "witness_energy": format_decimal(witness.energy),
            "witness_below_bound": witness.below_bound,
            "passed": ok,
        }
        passed = passed and ok
    return {"passed": passed, "levels": cases}


def pointwise_laplacian(config: Dict[str, Any], quick: bool) -> Dict[str, Any]:
    """След G_μ1 равен -1; след цилиндрической функции глубины K равен 0 с уровня max(1, K)"""
    settings = RunConfig(**config)
    rng = np.random.default_rng(settings.seed + 10)
    m_max = 5 if quick else 8
    failures = []
    for n in (2, 3):
        prefix = [int(s) for s in rng.integers(1, n + 1, size=m_max)]
        green_of_one = GreenOperator(CylinderFunction.constant(n, 1))
        trace = pointwise_laplacian_trace(green_of_one, prefix, m_max)
        if any(v != -1 for v in trace.values):
            failures.append(f"N={n}: след G_μ1")
        for depth in range(4):
            h = random_cylinder(rng, n, depth)
            values = pointwise_laplacian_trace(h, prefix, m_max).values
            start = max(1, depth)
            if any(v != 0 for v in values[start - 1:]):
                failures.append(f"N={n}: цилиндрическая функция глубины {depth}")
    return {"passed": not failures, "failures": failures}


def harmonic_approximation_rate(config: Dict[str, Any], quick: bool) -> Dict[str, Any]:
    """sup_{V_{m+2}} |u - u_m| убывает вдвое для u(x) = Σ x_i 2^{-i}"""
    m_top = 5 if quick else 8
    u = DyadicCoordinateSum(2)
    errors = [approximation_error(u, m) for m in range(1, m_top + 1)]
    ratios = [b / a for a, b in zip(errors, errors[1:])]
    passed = all(float(r) <= 0.5 + 1e-12 for r in ratios)
    return {
        "passed": passed,
        "errors": [format_rational(e) for e in errors],
        "ratios": [format_rational(r) for r in ratios],
    }


CRITERIA: List[tuple] = [
    (1, "operator_structure", operator_structure),
    (2, "block_identities", block_identities),
    (3, "form_equivalence", form_equivalence),
    (4, "markov_property", markov_property),
    (5, "compatible_extension", compatible_extension),
    (6, "green_bound", green_bound),
    (7, "green_operator_identity", green_operator_identity),
    (8, "boundary_value_problem", boundary_value_problem),
    (9, "resistance_unboundedness", resistance_unboundedness),
    (10, "pointwise_laplacian", pointwise_laplacian),
    (11, "harmonic_approximation_rate", harmonic_approximation_rate),
]


def run_criterion(criterion: int, name: str, check: Callable, config: Dict[str, Any], quick: bool) -> CriterionResult:
    started = time.perf_counter()
    try:
        details = check(config, quick)
        result = CriterionResult(criterion=criterion, name=name, passed=bool(details.pop("passed")), details=details)
    except Exception as e:
        logger.error(f"Ошибка критерия {criterion} ({name}): {e}")
        result = CriterionResult(criterion=criterion, name=name, passed=False, error=str(e))
    logger.info(f"Критерий {criterion} ({name}): {'выполнен' if result.passed else 'НЕ выполнен'}, "
                f"{time.perf_counter() - started:.1f} с")
    return result


class ValidationSystem:
    def __init__(self, config: RunConfig):
        self.config = config
        self.logger = logging.getLogger(__name__)
        self.validation_history: List[Dict[str, Any]] = []

    async def run_suite(self, quick: bool = False, criteria: Optional[Sequence[int]] = None) -> AcceptanceReport:
        """Запуск приемочных критериев; порядок результатов фиксирован.

        При workers > 1 критерии выполняются в пуле процессов, иначе по одному.
        """
        selected = [c for c in CRITERIA if criteria is None or c[0] in criteria]
        config = self.config.dict()
        loop = asyncio.get_running_loop()
        self.logger.info(f"Запуск {len(selected)} критериев (quick={quick}, workers={self.config.workers})")
        results: List[CriterionResult] = []
        if self.config.workers > 1:
            with ProcessPoolExecutor(max_workers=self.config.workers) as executor:
                tasks = [loop.run_in_executor(executor, run_criterion, number, name, check, config, quick)
                         for number, name, check in selected]
                results = list(await asyncio.gather(*tasks))
        else:
            for number, name, check in selected:
                results.append(await loop.run_in_executor(None, run_criterion, number, name, check, config, quick))
        report = AcceptanceReport(quick=quick, seed=self.config.seed, results=results)
        self.validation_history.append({
            "quick": quick,
            "criteria": [r.criterion for r in report.results],
            "status": "success" if report.passed else "failure",
        })
        return report

    def get_validation_history(self) -> List[Dict[str, Any]]:
        """История запусков"""
        return self.validation_history

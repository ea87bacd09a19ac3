"""Командная строка shift-laplace"""

import asyncio
import functools
import json
import logging
import math
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional

import click
from pydantic import ValidationError
from pythonjsonlogger import jsonlogger
from rich.console import Console
from rich.table import Table

from src.core.bvp_solver import BoundaryData, solve, verify_solution
from src.core.config import RunConfig, load_config
from src.core.difference_operators import blocks, build_dense_H, green_matrix, structural_check
from src.core.energy_resistance import (block_path_resistance, effective_resistance, energy_trace,
                                        resistance_witness, unbounded_pair)
from src.core.exact_numeric import format_decimal, format_rational
from src.core.exceptions import DomainError, ResourceLimitError, VerificationError
from src.core.green_laplacian import (GreenOperator, green_function, green_function_fast,
                                      green_operator_level, pointwise_laplacian_trace)
from src.core.measure_functions import (CylinderFunction, DyadicCoordinateSum, LevelVector, PointEvaluator,
                                        alphabet_of, min_energy_extension)
from src.core.shift_space import Point, enumerate_level, rho
from src.core.validation_system import ValidationSystem
from src.visualization.report_export import emit_convergence_csv, emit_matrix_csv, write_json

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
LOG_FILE = "shift_laplace.log"

logger = logging.getLogger(__name__)
console = Console()


def setup_logging(config: RunConfig):
    """Настройка логирования: файл в каталоге вывода и консоль"""
    config.output_dir.mkdir(parents=True, exist_ok=True)
    file_handler = logging.FileHandler(config.output_dir / LOG_FILE, encoding="utf-8")
    if config.log_json:
        file_handler.setFormatter(jsonlogger.JsonFormatter(LOG_FORMAT))
    else:
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
    console_handler = logging.StreamHandler()
    console_handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logging.basicConfig(level=config.log_level, handlers=[file_handler, console_handler], force=True)


def handle_errors(func: Callable) -> Callable:
    """Нарушенная проверка - код 1, некорректный ввод - код 2"""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except VerificationError as e:
            logger.error(f"Проверка не пройдена: {e}")
            console.print(f"[red]FAIL[/red] {e}")
            raise SystemExit(1)
        except (DomainError, ResourceLimitError, ValidationError) as e:
            logger.error(f"Некорректные входные данные: {e}")
            raise click.UsageError(str(e))
    return wrapper


def _read_json(path: str) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise DomainError(f"Не удалось прочитать {path}: {e}") from e


def load_function(path: str) -> CylinderFunction:
    """Файл функции; файл вектора уровня продолжается с минимальной энергией"""
    data = _read_json(path)
    if "level" in data:
        return min_energy_extension(LevelVector.from_json_dict(data))
    return CylinderFunction.from_json_dict(data)


def load_evaluator(spec: str, n: Optional[int]) -> PointEvaluator:
    """Файл функции или встроенный вычислитель: green-of-one, dyadic"""
    if spec in ("green-of-one", "dyadic"):
        if n is None:
            raise DomainError(f"Для '{spec}' нужен параметр --N")
        if spec == "green-of-one":
            return GreenOperator(CylinderFunction.constant(n, 1))
        return DyadicCoordinateSum(n)
    return load_function(spec)


def parse_word(text: str, n: int) -> List[int]:
    if "." in text or n >= 10:
        word = [int(s) for s in text.split(".") if s]
    else:
        word = [int(s) for s in text]
    for symbol in word:
        if not 1 <= symbol <= n:
            raise DomainError(f"Символ {symbol} вне алфавита 1..{n}")
    return word


def _summary(title: str, rows: Dict[str, Any]):
    table = Table(title=title)
    table.add_column("параметр")
    table.add_column("значение")
    for key, value in rows.items():
        table.add_row(str(key), str(value))
    console.print(table)


@click.group()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="YAML/JSON файл конфигурации")
@click.option("--output-dir", type=click.Path(file_okay=False), default=None)
@click.option("--log-level", default=None)
@click.pass_context
def cli(ctx: click.Context, config_path: Optional[str], output_dir: Optional[str], log_level: Optional[str]):
    """Анализ на одностороннем полном сдвиге: операторы, энергия, функция Грина, задача Дирихле"""
    try:
        config = load_config(config_path).with_overrides(output_dir=output_dir, log_level=log_level)
    except (DomainError, ValueError) as e:
        raise click.UsageError(str(e))
    setup_logging(config)
    ctx.obj = config


def _alphabet_option(func):
    return click.option("--N", "n", type=int, default=None, help="размер алфавита")(func)


def _n(config: RunConfig, n: Optional[int]) -> int:
    return config.n_symbols if n is None else n


@cli.command("vm-enum")
@_alphabet_option
@click.option("--m", "m", type=int, required=True)
@click.pass_obj
@handle_errors
def vm_enum(config: RunConfig, n: Optional[int], m: int):
    """V_m в порядке ≺"""
    n = _n(config, n)
    level = enumerate_level(n, m, config.max_points)
    path = write_json(level.to_strings(), config.output_dir / f"vm_N{n}_m{m}.json")
    console.print(" ".join(level.to_strings()[:64]) + (" ..." if len(level) > 64 else ""))
    _summary("V_m", {"N": n, "m": m, "points": len(level), "file": path})


@cli.command("operator")
@_alphabet_option
@click.option("--m", "m", type=int, required=True)
@click.option("--blocks", "with_blocks", is_flag=True, help="также T_m, J_m, X_m, G_m")
@click.pass_obj
@handle_errors
def operator_command(config: RunConfig, n: Optional[int], m: int, with_blocks: bool):
    """Матрица H_m в CSV"""
    n = _n(config, n)
    level = enumerate_level(n, m, config.max_points)
    labels = level.to_strings()
    h = build_dense_H(n, m, config.max_dense_points)
    files = [emit_matrix_csv(h, config.output_dir / f"H_N{n}_m{m}.csv", labels)]
    if with_blocks:
        if m < 1:
            raise DomainError("Блочное разложение требует m ≥ 1")
        decomposition = blocks(n, m, config.max_dense_points)
        old, fresh = labels[:n ** m], labels[n ** m:]
        files.append(emit_matrix_csv(decomposition.T, config.output_dir / f"T_N{n}_m{m}.csv", old))
        files.append(emit_matrix_csv(decomposition.J, config.output_dir / f"J_N{n}_m{m}.csv", fresh, old))
        files.append(emit_matrix_csv(decomposition.X, config.output_dir / f"X_N{n}_m{m}.csv", fresh))
        files.append(emit_matrix_csv(green_matrix(n, m), config.output_dir / f"G_N{n}_m{m}.csv", fresh))
    _summary("H_m", {"N": n, "m": m, "size": h.n_rows, "files": ", ".join(str(f) for f in files)})


@cli.command("check")
@_alphabet_option
@click.option("--m", "m", type=int, required=True)
@click.option("--seed", type=int, default=None)
@click.pass_obj
@handle_errors
def check_command(config: RunConfig, n: Optional[int], m: int, seed: Optional[int]):
    """Структурная проверка H_m и блочных тождеств"""
    n = _n(config, n)
    report = structural_check(n, m, seed=config.seed if seed is None else seed,
                              sample_count=config.sample_count, max_dense_points=config.max_dense_points)
    write_json(report.dict(), config.output_dir / f"check_N{n}_m{m}.json")
    _summary("Структурная проверка", {name: "ok" if r.passed else "FAIL" for name, r in report.properties.items()})
    report.raise_for_failures()


@cli.command("energy-trace")
@click.option("--function", "function_spec", required=True, help="файл функции, 'dyadic' или 'green-of-one'")
@click.option("--mmax", type=int, required=True)
@_alphabet_option
@click.pass_obj
@handle_errors
def energy_trace_command(config: RunConfig, function_spec: str, mmax: int, n: Optional[int]):
    """𝔈_{H_m}(u|_{V_m}) для m = 0..mmax"""
    u = load_evaluator(function_spec, n)
    trace = energy_trace(u, mmax, alphabet_of(u, n))
    path = emit_convergence_csv(trace.entries, config.output_dir / "energy_trace.csv")
    _summary("Энергия", {"status": trace.status, "last": format_rational(trace.values[-1]), "file": path})


@cli.command("resistance")
@_alphabet_option
@click.option("--m", "m", type=int, default=None)
@click.option("--a", "a_text", default=None)
@click.option("--b", "b_text", default=None)
@click.pass_obj
@handle_errors
def resistance_command(config: RunConfig, n: Optional[int], m: Optional[int],
                       a_text: Optional[str], b_text: Optional[str]):
    """Эффективное сопротивление R(a, b)"""
    n = _n(config, n)
    if a_text and b_text:
        a, b = Point.parse(a_text, n), Point.parse(b_text, n)
    elif m is not None:
        a, b = unbounded_pair(n, m)
    else:
        raise DomainError("Укажите --m или пару --a/--b")
    result = effective_resistance(a, b, exact_solve_limit=config.exact_solve_limit,
                                  float_fallback=config.float_fallback, tolerance=config.float_tolerance)
    level = result.level
    report: Dict[str, Any] = {
        "a": str(a),
        "b": str(b),
        "N": n,
        "level": level,
        "exact": result.exact,
        "min_energy": format_rational(result.min_energy) if result.exact else format_decimal(result.min_energy),
        "min_energy_decimal": format_decimal(result.min_energy),
        "resistance": format_rational(result.resistance) if result.exact else format_decimal(result.resistance),
        "resistance_decimal": format_decimal(result.resistance),
        "float_residual": format_decimal(result.residual),
        "exceeds_m_plus_1": bool(result.resistance > level + 1),
        "clique_path_resistance": format_rational(block_path_resistance(a, b)),
    }
    if m is not None and not (a_text and b_text) and m >= 2:
        witness = resistance_witness(n, m)
        report["witness"] = {
            "delta1": format_rational(witness.delta1),
            "delta2": format_rational(witness.delta2),
            "energy": format_rational(witness.energy),
            "energy_decimal": format_decimal(witness.energy),
            "bound": format_rational(witness.bound),
            "below_bound": witness.below_bound,
        }
    write_json(report, config.output_dir / f"resistance_N{n}_m{level}.json")
    _summary("Сопротивление", {k: v for k, v in report.items() if k != "witness"})


@cli.command("green-eval")
@click.argument("x_text")
@click.argument("y_text")
@_alphabet_option
@click.pass_obj
@handle_errors
def green_eval(config: RunConfig, x_text: str, y_text: str, n: Optional[int]):
    """g(x, y) по определению и в замкнутой форме"""
    n = _n(config, n)
    x, y = Point.parse(x_text, n), Point.parse(y_text, n)
    r = rho(x, y)
    value = green_function(x, y)
    fast = green_function_fast(x, y)
    if value != fast:
        raise VerificationError("green_closed_form", n, detail=f"{value} != {fast}")
    report = {
        "x": str(x),
        "y": str(y),
        "rho": "inf" if r == math.inf else int(r),
        "green": format_rational(value),
        "green_fast": format_rational(fast),
        "decimal": format_decimal(value),
        "bound": None if r == math.inf else format_rational(abs(Fraction(2 * int(r) - 3, n))),
    }
    write_json(report, config.output_dir / "green_eval.json")
    _summary("Функция Грина", report)


@cli.command("green-apply")
@click.argument("function_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--level", "m", type=int, required=True)
@click.pass_obj
@handle_errors
def green_apply(config: RunConfig, function_path: str, m: int):
    """G_μf на V_m"""
    f = load_function(function_path)
    values = green_operator_level(f, m, config.max_points)
    path = write_json(values.to_json_dict(), config.output_dir / f"green_apply_m{m}.json")
    _summary("Оператор Грина", {"N": f.n_symbols, "m": m, "points": len(values), "file": path})


@cli.command("laplacian-trace")
@click.argument("function_spec")
@click.option("--prefix", required=True, help="префикс x, например 1212")
@click.option("--mmax", type=int, required=True)
@_alphabet_option
@click.pass_obj
@handle_errors
def laplacian_trace_command(config: RunConfig, function_spec: str, prefix: str, mmax: int, n: Optional[int]):
    """N^{m+1}H_m u(p^m) вдоль префикса x"""
    u = load_evaluator(function_spec, n)
    n = alphabet_of(u, n)
    trace = pointwise_laplacian_trace(u, parse_word(prefix, n), mmax, n)
    path = emit_convergence_csv(trace.rows(), config.output_dir / "laplacian_trace.csv")
    rows: Dict[str, Any] = {f"m={m} p={p}": format_rational(v) for m, p, v in trace.entries}
    rows["file"] = path
    _summary("След лапласиана", rows)


@cli.command("solve-bvp")
@click.option("--f", "f_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--zeta", "zeta_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--sample-depth", type=int, default=None)
@click.option("--verify", "verify_level", type=int, default=None)
@click.pass_obj
@handle_errors
def solve_bvp(config: RunConfig, f_path: str, zeta_path: str, sample_depth: Optional[int],
              verify_level: Optional[int]):
    """Решение Δu = f, u|_{V₀} = ζ"""
    f = load_function(f_path)
    zeta = BoundaryData.from_json_dict(_read_json(zeta_path))
    solution = solve(f, zeta)
    depth = max(1, f.depth) if sample_depth is None else sample_depth
    sample_path = write_json(solution.sample(depth).to_json_dict(), config.output_dir / "bvp_solution.json")
    rows: Dict[str, Any] = {"N": f.n_symbols, "sample_depth": depth, "solution_file": sample_path}
    if verify_level is not None:
        report = verify_solution(solution, verify_level)
        write_json(report.dict(), config.output_dir / "bvp_verification.json")
        rows["exact_from_level"] = report.exact_from_level
        rows["verified"] = report.passed
    _summary("Задача Дирихле", rows)


@cli.command("report-all")
@click.option("--quick", is_flag=True, help="уменьшенные сетки")
@click.option("--workers", type=int, default=None)
@click.pass_obj
@handle_errors
def report_all(config: RunConfig, quick: bool, workers: Optional[int]):
    """Все приемочные критерии одним запуском"""
    config = config.with_overrides(workers=workers)
    system = ValidationSystem(config)
    report = asyncio.run(system.run_suite(quick=quick))
    write_json(report.dict(), config.output_dir / "acceptance_report.json")
    table = Table(title="Приемочные критерии")
    table.add_column("#")
    table.add_column("критерий")
    table.add_column("итог")
    for result in report.results:
        table.add_row(str(result.criterion), result.name, "ok" if result.passed else "FAIL")
    console.print(table)
    if not report.passed:
        failed = [r.name for r in report.results if not r.passed]
        raise VerificationError("acceptance", detail=", ".join(failed))


if __name__ == "__main__":
    cli()

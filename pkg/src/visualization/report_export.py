"""Выгрузка последовательностей в CSV и отчетов в JSON"""

import json
import logging
import threading
from collections import defaultdict
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import pandas as pd

from src.core.exact_numeric import RationalMatrix, format_decimal, format_rational

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ["m", "exact", "decimal"]

_path_locks: Dict[str, threading.Lock] = defaultdict(threading.Lock)
_registry_lock = threading.Lock()


def _lock_for(path: Path) -> threading.Lock:
    with _registry_lock:
        return _path_locks[str(Path(path).resolve())]


def to_jsonable(value: Any) -> Any:
    """Fraction -> 'p/q', Path -> str, рекурсивно для контейнеров"""
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if hasattr(value, "dict") and callable(value.dict):
        return to_jsonable(value.dict())
    return value


def render_json(data: Any) -> str:
    return json.dumps(to_jsonable(data), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(data: Any, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with _lock_for(path):
        with open(path, "w", encoding="utf-8") as f:
            f.write(render_json(data))
    logger.info(f"Записан JSON: {path}")
    return path


def trace_frame(rows: Iterable[Tuple[int, Union[Fraction, float]]]) -> pd.DataFrame:
    """DataFrame со столбцами (m, exact, decimal)"""
    records = []
    for m, value in rows:
        exact = format_rational(value) if isinstance(value, (int, Fraction)) else ""
        records.append({"m": int(m), "exact": exact, "decimal": format_decimal(value)})
    return pd.DataFrame(records, columns=TRACE_COLUMNS)


def emit_convergence_csv(rows: Iterable[Tuple[int, Union[Fraction, float]]],
                         path: Union[str, Path]) -> Path:
    """CSV (m, 'p/q', десятичное значение); пустая последовательность дает только заголовок"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = trace_frame(rows)
    with _lock_for(path):
        frame.to_csv(path, index=False, lineterminator="\n")
    logger.info(f"Записан CSV ({len(frame)} строк): {path}")
    return path


def matrix_frame(matrix: RationalMatrix, labels: Optional[Sequence[str]] = None,
                 column_labels: Optional[Sequence[str]] = None) -> pd.DataFrame:
    rows = labels if labels is not None else [str(i) for i in range(matrix.n_rows)]
    cols = column_labels if column_labels is not None else (
        labels if labels is not None and matrix.is_square() else [str(j) for j in range(matrix.n_cols)])
    return pd.DataFrame(matrix.to_strings(), index=list(rows), columns=list(cols))


def emit_matrix_csv(matrix: RationalMatrix, path: Union[str, Path],
                    labels: Optional[Sequence[str]] = None,
                    column_labels: Optional[Sequence[str]] = None) -> Path:
    """Матрица в CSV строками 'p/q' с подписями точек"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = matrix_frame(matrix, labels, column_labels)
    with _lock_for(path):
        frame.to_csv(path, index_label="point", lineterminator="\n")
    logger.info(f"Записана матрица {matrix.n_rows}x{matrix.n_cols}: {path}")
    return path


def read_trace_csv(path: Union[str, Path]) -> List[Tuple[int, Fraction]]:
    frame = pd.read_csv(path, dtype={"exact": str})
    return [(int(m), Fraction(exact)) for m, exact in zip(frame["m"], frame["exact"])]

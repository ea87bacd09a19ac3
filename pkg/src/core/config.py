"""Конфигурация запуска"""

import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, validator

from .exceptions import DomainError

logger = logging.getLogger(__name__)

ENV_OUTPUT_DIR = "SHIFT_LAPLACE_OUTPUT_DIR"
ENV_LOG_LEVEL = "SHIFT_LAPLACE_LOG_LEVEL"
DEFAULT_CONFIG_PATH = Path("config/run_config.yaml")


class RunConfig(BaseModel):
    """Параметры запуска: алфавит, лимиты уровней, решатель, зерно, вывод"""
    n_symbols: int = 3
    max_level: int = 8
    max_points: int = 1_000_000
    max_dense_points: int = 2200
    exact_solve_limit: int = 500
    float_fallback: bool = True
    float_tolerance: float = 1e-9
    seed: int = 20240601
    sample_count: int = 200
    output_dir: Path = Path("output")
    log_level: str = "INFO"
    log_json: bool = False
    workers: int = 1

    @validator("n_symbols")
    def _alphabet_size(cls, value):
        if value < 2:
            raise ValueError("размер алфавита должен быть не меньше 2")
        return value

    @validator("max_level")
    def _level(cls, value):
        if value < 0:
            raise ValueError("уровень должен быть неотрицательным")
        return value

    @validator("max_points", "max_dense_points", "exact_solve_limit", "sample_count", "workers")
    def _positive(cls, value):
        if value <= 0:
            raise ValueError("значение должно быть положительным")
        return value

    @validator("float_tolerance")
    def _tolerance(cls, value):
        if not value > 0:
            raise ValueError("допуск должен быть положительным")
        return value

    @validator("log_level")
    def _log_level(cls, value):
        level = str(value).upper()
        if level not in logging._nameToLevel:
            raise ValueError(f"неизвестный уровень логирования: {value}")
        return level

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        """Копия с заменой заданных (не None) полей"""
        values = self.dict()
        values.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfig(**values)


def load_config(path: Optional[Union[str, Path]] = None) -> RunConfig:
    """Загрузка конфигурации из YAML/JSON с учетом переменных окружения"""
    load_dotenv()
    data: Dict[str, Any] = {}
    config_path = Path(path) if path is not None else DEFAULT_CONFIG_PATH
    if config_path.exists():
        with open(config_path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
        if not isinstance(data, dict):
            raise DomainError(f"Файл конфигурации {config_path} должен содержать словарь")
        logger.debug(f"Загружена конфигурация из {config_path}")
    elif path is not None:
        raise DomainError(f"Файл конфигурации не найден: {config_path}")

    if os.getenv(ENV_OUTPUT_DIR):
        data["output_dir"] = os.getenv(ENV_OUTPUT_DIR)
    if os.getenv(ENV_LOG_LEVEL):
        data["log_level"] = os.getenv(ENV_LOG_LEVEL)
    try:
        return RunConfig(**data)
    except ValueError as e:
        raise DomainError(f"Некорректная конфигурация: {e}") from e

import shutil
import tempfile
from pathlib import Path

import numpy as np
import pytest

from src.core.config import RunConfig


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: длительные проверки на больших уровнях")


@pytest.fixture(scope="session")
def test_root():
    """Создание временной директории для тестов"""
    temp_dir = tempfile.mkdtemp()
    yield Path(temp_dir)
    shutil.rmtree(temp_dir)


@pytest.fixture
def test_config(tmp_path):
    """Создание тестовой конфигурации"""
    return RunConfig(
        n_symbols=3,
        max_level=4,
        max_points=100_000,
        max_dense_points=2200,
        exact_solve_limit=500,
        seed=12345,
        sample_count=20,
        output_dir=tmp_path / "output",
        log_level="DEBUG",
    )


@pytest.fixture
def rng():
    """Генератор с фиксированным зерном"""
    return np.random.default_rng(20240601)

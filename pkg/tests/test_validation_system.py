import time

import pytest

from src.core import validation_system
from src.core.exceptions import DomainError
from src.core.validation_system import CRITERIA, ValidationSystem, run_criterion


def test_criteria_table():
    """Тест нумерации приемочных критериев"""
    assert [number for number, _, _ in CRITERIA] == list(range(1, 12))
    assert len({name for _, name, _ in CRITERIA}) == 11


@pytest.mark.asyncio
async def test_run_suite_quick(test_config):
    """Тест быстрого прогона части критериев"""
    system = ValidationSystem(test_config)
    report = await system.run_suite(quick=True, criteria=[3, 4, 6, 10, 11])
    assert [r.criterion for r in report.results] == [3, 4, 6, 10, 11]
    assert report.passed, [r for r in report.results if not r.passed]
    assert report.seed == test_config.seed
    rates = report.results[-1].details
    assert rates["errors"][0] == "1/4"
    assert all(r == "1/2" for r in rates["ratios"])
    assert system.get_validation_history() == [
        {"quick": True, "criteria": [3, 4, 6, 10, 11], "status": "success"}]


@pytest.mark.asyncio
async def test_run_suite_resistance(test_config):
    """Тест критерия неограниченности сопротивления"""
    report = await ValidationSystem(test_config).run_suite(quick=True, criteria=[9])
    result = report.results[0]
    assert result.passed
    assert set(result.details["levels"]) == {"2", "3", "4"}
    assert result.details["levels"]["2"]["a"] == "12~1"
    assert result.details["levels"]["4"]["clique_path_resistance"] == "6"


def test_run_criterion_catches_errors(test_config):
    """Тест перехвата исключений критерия"""
    def broken(config, quick):
        raise DomainError("сбой")

    result = run_criterion(99, "broken", broken, test_config.dict(), True)
    assert not result.passed
    assert result.error == "сбой"

    result = run_criterion(1, "ok", lambda config, quick: {"passed": True, "value": 1}, test_config.dict(), True)
    assert result.passed
    assert result.details == {"value": 1}


@pytest.mark.asyncio
async def test_run_suite_sequential_with_one_worker(test_config, monkeypatch):
    """Тест последовательного запуска критериев при workers=1"""
    spans = []

    def sleeping(config, quick):
        started = time.perf_counter()
        time.sleep(0.05)
        spans.append((started, time.perf_counter()))
        return {"passed": True}

    monkeypatch.setattr(validation_system, "CRITERIA", [(n, f"sleep_{n}", sleeping) for n in (1, 2, 3)])
    report = await ValidationSystem(test_config.with_overrides(workers=1)).run_suite(quick=True)
    assert [r.criterion for r in report.results] == [1, 2, 3]
    assert report.passed
    assert len(spans) == 3
    spans.sort()
    for (_, end), (start, _) in zip(spans, spans[1:]):
        assert end <= start

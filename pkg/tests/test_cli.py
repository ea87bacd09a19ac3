import json

import pytest
from click.testing import CliRunner

from src.main import cli
from src.visualization.report_export import read_trace_csv


@pytest.fixture
def run(tmp_path):
    runner = CliRunner()

    def invoke(*args):
        return runner.invoke(cli, ["--output-dir", str(tmp_path), "--log-level", "WARNING", *args])
    return invoke


def load(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def test_vm_enum(run, tmp_path):
    """Тест перечисления V_1 при N=2"""
    result = run("vm-enum", "--N", "2", "--m", "1")
    assert result.exit_code == 0, result.output
    assert load(tmp_path / "vm_N2_m1.json") == ["~1", "~2", "2~1", "1~2"]
    assert "2~1 1~2" in result.output


def test_operator_blocks(run, tmp_path):
    """Тест выгрузки H_m и блоков"""
    result = run("operator", "--N", "3", "--m", "1", "--blocks")
    assert result.exit_code == 0, result.output
    for name in ("H", "T", "J", "X", "G"):
        assert (tmp_path / f"{name}_N3_m1.csv").exists()
    assert run("operator", "--N", "3", "--m", "0", "--blocks").exit_code == 2


def test_check(run, tmp_path):
    """Тест структурной проверки из командной строки"""
    result = run("check", "--N", "2", "--m", "1")
    assert result.exit_code == 0, result.output
    report = load(tmp_path / "check_N2_m1.json")
    assert report["rank"] == 3
    assert all(p["passed"] for p in report["properties"].values())


@pytest.mark.parametrize("m,expected", [(2, "10/3"), (4, "6")])
def test_resistance(run, tmp_path, m, expected):
    """Тест сопротивления для пары уровня m при N=3"""
    result = run("resistance", "--N", "3", "--m", str(m))
    assert result.exit_code == 0, result.output
    report = load(tmp_path / f"resistance_N3_m{m}.json")
    assert report["exact"]
    assert report["resistance"] == expected
    assert report["clique_path_resistance"] == expected
    assert report["exceeds_m_plus_1"]
    assert "witness" in report


def test_resistance_pair(run, tmp_path):
    """Тест сопротивления для заданной пары"""
    result = run("resistance", "--N", "3", "--a", "~1", "--b", "~2")
    assert result.exit_code == 0, result.output
    report = load(tmp_path / "resistance_N3_m0.json")
    assert report["resistance"] == "2/3"
    assert "witness" not in report


def test_green_eval(run, tmp_path):
    """Тест вычисления g(x, y)"""
    result = run("green-eval", "1~2", "1~3", "--N", "3")
    assert result.exit_code == 0, result.output
    report = load(tmp_path / "green_eval.json")
    assert report["green"] == report["green_fast"] == "1/3"
    assert report["rho"] == 2
    assert report["bound"] == "1/3"


def test_laplacian_trace(run, tmp_path):
    """Тест следа лапласиана G_μ1"""
    result = run("laplacian-trace", "green-of-one", "--prefix", "1212", "--mmax", "4", "--N", "3")
    assert result.exit_code == 0, result.output
    assert [v for _, v in read_trace_csv(tmp_path / "laplacian_trace.csv")] == [-1] * 4


def test_energy_trace(run, tmp_path):
    """Тест последовательности энергии для файла функции"""
    f = tmp_path / "f.json"
    f.write_text(json.dumps({"N": 2, "depth": 1, "values": ["1", "0"]}), encoding="utf-8")
    result = run("energy-trace", "--function", str(f), "--mmax", "3")
    assert result.exit_code == 0, result.output
    assert read_trace_csv(tmp_path / "energy_trace.csv") == [(m, 1) for m in range(4)]


def test_solve_bvp(run, tmp_path):
    """Тест решения задачи Дирихле с проверкой"""
    f = tmp_path / "f.json"
    zeta = tmp_path / "zeta.json"
    f.write_text(json.dumps({"N": 2, "depth": 0, "values": ["1"]}), encoding="utf-8")
    zeta.write_text(json.dumps({"N": 2, "values": ["0", "0"]}), encoding="utf-8")
    result = run("solve-bvp", "--f", str(f), "--zeta", str(zeta), "--verify", "4")
    assert result.exit_code == 0, result.output
    assert load(tmp_path / "bvp_solution.json")["values"] == ["0", "-1/4", "-1/4", "0"]
    assert load(tmp_path / "bvp_verification.json")["passed"]


def test_usage_errors(run, tmp_path):
    """Тест кода 2 для некорректных входных данных"""
    assert run("resistance", "--N", "3", "--a", "~1", "--b", "~1").exit_code == 2
    assert run("resistance", "--N", "3").exit_code == 2
    assert run("laplacian-trace", "dyadic", "--prefix", "12", "--mmax", "2").exit_code == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{", encoding="utf-8")
    assert run("green-apply", str(bad), "--level", "1").exit_code == 2


@pytest.mark.slow
def test_report_all_quick(run, tmp_path):
    """Тест полного быстрого прогона критериев"""
    result = run("report-all", "--quick")
    assert result.exit_code == 0, result.output
    report = load(tmp_path / "acceptance_report.json")
    assert [r["criterion"] for r in report["results"]] == list(range(1, 12))

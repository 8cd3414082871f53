"""End-to-end tests of the isingvote command line."""

import csv
import io
import json

import pytest

from src.cli import EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, render, run
from src.main import main
from src.models.asymptotics import error_exponent_lb, pe_limit_iid

pytestmark = pytest.mark.integration


def _rows(text: str):
    return list(csv.DictReader(io.StringIO(text)))


def test_render_formats():
    records = [{"a": 0.1, "b": None, "c": 3}]
    assert render(records, ["a", "b", "c"], "csv") == "a,b,c\n0.1,,3\n"
    assert json.loads(render(records, ["a", "b"], "json")) == [{"a": 0.1, "b": None}]


def test_limit_empty_graph(capsys):
    assert run(["limit", "--graph", "empty", "--p", "0.25"]) == EXIT_OK
    (row,) = _rows(capsys.readouterr().out)
    assert row["quantity"] == "pe_limit"
    assert float(row["value"]) == pytest.approx(1 / 3, abs=1e-12)


def test_limit_supercritical_reports_exponent(capsys):
    assert run(["limit", "--graph", "complete", "--theta", "0.7", "--p", "0.1"]) == EXIT_OK
    (row,) = _rows(capsys.readouterr().out)
    assert row["quantity"] == "error_exponent_lb"
    assert float(row["value"]) == pytest.approx(error_exponent_lb(0.7, 0.1))


def test_limit_without_closed_form(capsys):
    assert run(["limit", "--graph", "chain", "--p", "0.1"]) == EXIT_USAGE
    assert "needs --theta" in capsys.readouterr().err


def test_simulate_is_deterministic(capsys):
    argv = ["simulate", "--graph", "empty", "--n", "3", "--p", "0.1", "--trials", "20000", "--seed", "7"]
    assert run(argv) == EXIT_OK
    first = capsys.readouterr().out
    assert run(argv) == EXIT_OK
    assert capsys.readouterr().out == first

    (row,) = _rows(first)
    assert float(row["ci_low"]) <= float(row["pe_hat"]) <= float(row["ci_high"])
    assert float(row["limit"]) == pytest.approx(pe_limit_iid(0.1))
    assert row["bound"] != ""
    assert row["seed"] == "7"


def test_simulate_json_and_output_file(tmp_path):
    target = tmp_path / "out" / "result.json"
    argv = [
        "simulate", "--graph", "chain-pbc", "--n", "5", "--theta", "0.5", "--p", "0.2",
        "--trials", "5000", "--format", "json", "--output", str(target),
    ]
    assert run(argv) == EXIT_OK
    (record,) = json.loads(target.read_text())
    assert record["graph"] == "chain-pbc"
    assert record["trials"] == 5000


def test_simulate_from_config_file(tmp_path, capsys):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"graph": "empty", "n": 9, "p": 0.2, "trials": 1000, "seed": 3}))
    assert run(["simulate", "--config", str(path), "--n", "5"]) == EXIT_OK
    (row,) = _rows(capsys.readouterr().out)
    assert row["n"] == "5"
    assert row["seed"] == "3"


def test_simulate_custom_graph_has_no_limit(custom_graph_path, capsys):
    argv = [
        "simulate", "--graph", f"custom:{custom_graph_path}", "--n", "5", "--theta", "0.3",
        "--p", "0.2", "--trials", "256",
    ]
    assert run(argv) == EXIT_OK
    (row,) = _rows(capsys.readouterr().out)
    assert row["limit"] == ""
    assert row["bound"] != ""


def test_exact_command(capsys):
    assert run(["exact", "--graph", "empty", "--n", "3", "--p", "0.1"]) == EXIT_OK
    (row,) = _rows(capsys.readouterr().out)
    assert float(row["pe_exact"]) == pytest.approx(0.136, abs=1e-12)
    assert float(row["bound"]) >= float(row["pe_exact"])
    assert 0.0 < float(row["q_functional"]) < 0.5


def test_sweep_command(capsys):
    argv = ["sweep", "--graph", "empty", "--p", "0.25", "--trials", "2000", "--axis", "n", "--values", "3,11,51"]
    assert run(argv) == EXIT_OK
    rows = _rows(capsys.readouterr().out)
    assert [row["n"] for row in rows] == ["3", "11", "51"]


def test_exponent_command(capsys):
    assert run(["exponent", "--theta", "0.7", "--p", "0.1"]) == EXIT_OK
    (row,) = _rows(capsys.readouterr().out)
    assert float(row["bound"]) == pytest.approx(float(row["f_max_theta"]) - float(row["f_max_theta_minus_cp"]))
    assert float(row["bound"]) > 0


def test_figure_ftheta(capsys):
    assert run(["figure", "ftheta"]) == EXIT_OK
    rows = _rows(capsys.readouterr().out)
    assert len(rows) == 40
    for row in rows:
        if float(row["theta"]) <= 0.5:
            assert float(row["f_max"]) == 0.0
        else:
            assert float(row["f_max"]) > 0.0


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "--graph", "empty", "--n", "4", "--p", "0.1"],
        ["simulate", "--graph", "empty", "--n", "3", "--p", "0.6"],
        ["simulate", "--graph", "chain", "--n", "5", "--p", "0.1"],
        ["exact", "--graph", "custom:missing.txt", "--n", "3", "--theta", "0.5", "--p", "0.1"],
        ["exponent", "--theta", "0.4", "--p", "0.1"],
        ["simulate", "--unknown-flag"],
        ["figure", "no-such-figure"],
    ],
)
def test_usage_errors_exit_with_status_two(argv, capsys):
    assert run(argv) == EXIT_USAGE
    assert capsys.readouterr().out == ""


def test_runtime_errors_exit_with_status_one(monkeypatch, capsys):
    from src.shared.exceptions import ConvergenceError

    def fail(*_args, **_kwargs):
        raise ConvergenceError("quadrature did not converge", residual=1.0)

    monkeypatch.setattr("src.cli.error_exponent_lb", fail)
    assert run(["exponent", "--theta", "0.7", "--p", "0.1"]) == EXIT_RUNTIME
    assert "quadrature" in capsys.readouterr().err


def test_main_keeps_stdout_clean(capsys, package_logger, monkeypatch):
    """Test that logs go to stderr and stdout holds only the result table."""
    monkeypatch.setenv("ISINGVOTE_LOG_LEVEL", "DEBUG")
    assert main(["limit", "--graph", "empty", "--p", "0.25"]) == EXIT_OK
    captured = capsys.readouterr()
    assert captured.out.splitlines()[0] == "graph,theta,p,quantity,value"
    assert len(captured.out.splitlines()) == 2
    assert "run_id" in captured.err

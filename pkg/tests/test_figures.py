"""Tests for figure data tables and SVG output."""

import pytest

from src.experiments.figures import (
    FIGURES,
    SWEEP_COLUMNS,
    build_figure,
    figure_complete_supercritical,
    figure_empty,
    figure_ftheta,
    write_svg,
)
from src.shared.exceptions import ConfigurationError


def test_registry_names():
    assert set(FIGURES) == {"empty", "complete-sub", "complete-super", "ftheta"}


def test_empty_figure_table():
    figure = figure_empty(trials=500, seed=1, p_values=(0.1, 0.3), n_values=(3, 11))
    assert figure.columns == SWEEP_COLUMNS
    assert len(figure.records) == 4
    assert [r["n"] for r in figure.records] == [3, 11, 3, 11]
    assert all(r["limit"] is not None for r in figure.records)


def test_supercritical_figure_adds_decay_rate():
    figure = figure_complete_supercritical(trials=2000, seed=2, p_values=(0.3,), n_values=(11, 21))
    assert figure.columns[-1] == "neg_log_pe_over_n"
    for record in figure.records:
        if record["pe_hat"] > 0:
            assert record["neg_log_pe_over_n"] > 0
        else:
            assert record["neg_log_pe_over_n"] is None


def test_ftheta_is_zero_up_to_critical_point():
    figure = figure_ftheta(thetas=(0.25, 0.5, 0.75, 1.0))
    values = [r["f_max"] for r in figure.records]
    assert values[:2] == [0.0, 0.0]
    assert 0.0 < values[2] < values[3]


def test_unknown_figure():
    with pytest.raises(ConfigurationError, match="unknown figure"):
        build_figure("lattice", trials=10, seed=0)


def test_write_svg(tmp_path):
    pytest.importorskip("matplotlib")
    figure = figure_empty(trials=200, seed=3, p_values=(0.2,), n_values=(3, 11, 51))
    target = tmp_path / "plots" / "empty.svg"
    write_svg(figure, target)
    assert target.read_text().lstrip().startswith("<?xml")

"""Data behind the error-probability and free-energy figures."""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from src.experiments.config import ExperimentConfig
from src.experiments.montecarlo import SweepAxis, SweepRow, derive_seed, sweep
from src.models.asymptotics import f_max
from src.shared.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

FIGURE_P_VALUES = (0.1, 0.2, 0.3, 0.4)
FIGURE_N_VALUES = (11, 51, 101, 501, 1001, 5001)
SUBCRITICAL_THETA = 0.3
SUPERCRITICAL_THETA = 0.7
FTHETA_GRID = tuple(round(0.05 * i, 2) for i in range(1, 41))

SWEEP_COLUMNS = ["graph", "n", "theta", "p", "trials", "seed", "pe_hat", "ci_low", "ci_high", "limit", "bound"]


@dataclass(frozen=True)
class FigureData:
    """A table of figure data plus how to plot it."""

    name: str
    columns: List[str]
    records: List[dict]
    x: str
    y: str
    series: Optional[str] = None
    reference: Optional[str] = None
    log_y: bool = False


def _pe_versus_n(
    graph: str,
    theta: Optional[float],
    trials: int,
    seed: int,
    workers: Optional[int],
    p_values: Sequence[float],
    n_values: Sequence[int],
) -> List[SweepRow]:
    rows: List[SweepRow] = []
    for i, p in enumerate(p_values):
        base = ExperimentConfig(graph=graph, n=n_values[0], theta=theta, p=p, trials=trials, seed=derive_seed(seed, i))
        rows.extend(sweep(base, SweepAxis.N, list(n_values), workers=workers))
    return rows


def figure_empty(trials: int, seed: int, workers: Optional[int] = None,
                 p_values: Sequence[float] = FIGURE_P_VALUES,
                 n_values: Sequence[int] = FIGURE_N_VALUES) -> FigureData:
    """P_e versus n on the empty graph with the i.i.d. asymptote as ``limit``."""
    rows = _pe_versus_n("empty", None, trials, seed, workers, p_values, n_values)
    return FigureData("empty", SWEEP_COLUMNS, [r.as_record() for r in rows],
                      x="n", y="pe_hat", series="p", reference="limit")


def figure_complete_subcritical(trials: int, seed: int, workers: Optional[int] = None,
                                p_values: Sequence[float] = FIGURE_P_VALUES,
                                n_values: Sequence[int] = FIGURE_N_VALUES) -> FigureData:
    """P_e versus n on the Curie-Weiss model at theta = 0.3."""
    rows = _pe_versus_n("complete", SUBCRITICAL_THETA, trials, seed, workers, p_values, n_values)
    return FigureData("complete-sub", SWEEP_COLUMNS, [r.as_record() for r in rows],
                      x="n", y="pe_hat", series="p", reference="limit")


def figure_complete_supercritical(trials: int, seed: int, workers: Optional[int] = None,
                                  p_values: Sequence[float] = FIGURE_P_VALUES,
                                  n_values: Sequence[int] = FIGURE_N_VALUES) -> FigureData:
    """P_e versus n at theta = 0.7, with the empirical decay rate -(1/n) log P_e."""
    rows = _pe_versus_n("complete", SUPERCRITICAL_THETA, trials, seed, workers, p_values, n_values)
    records = []
    for row in rows:
        record = row.as_record()
        pe = row.estimate.point
        record["neg_log_pe_over_n"] = -math.log(pe) / row.n if pe > 0 else None
        records.append(record)
    return FigureData("complete-super", SWEEP_COLUMNS + ["neg_log_pe_over_n"], records,
                      x="n", y="pe_hat", series="p", log_y=True)


def figure_ftheta(thetas: Sequence[float] = FTHETA_GRID, **_: object) -> FigureData:
    """max_s f(theta, s) and its maximizer over a theta grid."""
    records = []
    for theta in thetas:
        value, argmax = f_max(theta)
        records.append({"theta": theta, "f_max": value, "argmax": argmax})
    return FigureData("ftheta", ["theta", "f_max", "argmax"], records, x="theta", y="f_max")


FIGURES: Dict[str, Callable[..., FigureData]] = {
    "empty": figure_empty,
    "complete-sub": figure_complete_subcritical,
    "complete-super": figure_complete_supercritical,
    "ftheta": figure_ftheta,
}


def build_figure(name: str, trials: int, seed: int, workers: Optional[int] = None) -> FigureData:
    """Compute the data table of a named figure.

    Raises:
        ConfigurationError: If the figure name is unknown
    """
    if name not in FIGURES:
        raise ConfigurationError(f"unknown figure '{name}' (choose from {', '.join(FIGURES)})")
    logger.info(f"Building figure data '{name}' with {trials} trials per point")
    return FIGURES[name](trials=trials, seed=seed, workers=workers)


def write_svg(figure: FigureData, path: Path) -> None:
    """Render a line plot of the figure data to a self-contained SVG file.

    Raises:
        ConfigurationError: If matplotlib (the ``plot`` extra) is not installed
    """
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        raise ConfigurationError("SVG output needs matplotlib: pip install 'isingvote[plot]'")

    fig, ax = plt.subplots(figsize=(6, 4))
    groups: Dict[object, List[dict]] = {}
    for record in figure.records:
        groups.setdefault(record.get(figure.series) if figure.series else None, []).append(record)

    for key, records in groups.items():
        xs = np.array([r[figure.x] for r in records], dtype=float)
        ys = np.array([np.nan if r[figure.y] is None else r[figure.y] for r in records], dtype=float)
        if figure.log_y:
            ys = np.where(ys > 0, ys, np.nan)
        label = f"{figure.series}={key}" if figure.series else figure.y
        (line,) = ax.plot(xs, ys, marker="o", label=label)
        if figure.reference and records[0].get(figure.reference) is not None:
            ax.axhline(records[0][figure.reference], linestyle="--", color=line.get_color(), linewidth=0.8)

    if figure.x == "n":
        ax.set_xscale("log")
    if figure.log_y:
        ax.set_yscale("log")
    ax.set_xlabel(figure.x)
    ax.set_ylabel(figure.y)
    ax.legend()
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg")
    plt.close(fig)
    logger.info(f"Wrote SVG plot to {path}")

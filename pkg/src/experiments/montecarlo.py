"""Seeded Monte Carlo harness for detection error and magnetization statistics.

Trials are drawn in fixed-size blocks. Block ``b`` uses its own generator
derived from ``(seed, b)``, so every trial's randomness is fixed by the seed
and its index alone, and results do not depend on how many workers run.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError
from scipy.stats import norm
from tqdm import tqdm

from src.experiments.config import ExperimentConfig
from src.models.asymptotics import BoundMethod, hoeffding_bound, limit_for
from src.models.detection import NoiseChannel, bsc_apply_counts
from src.models.exact import exact_magnetization_pmf, exact_pmf_available
from src.models.ising import GlauberOptions, IsingModel, sample_plus_counts, sampler_info
from src.shared.exceptions import ConfigurationError
from src.shared.settings import get_settings

logger = logging.getLogger(__name__)

# spawn-key tags keeping the different substream families disjoint
_BLOCK_STREAM = 0
_TRIAL_STREAM = 1
_ROW_STREAM = 2
_BOUND_STREAM = 3


class EstimateMethod(Enum):
    """How an estimate was produced."""

    MONTE_CARLO = "monte-carlo"
    EXACT = "exact"


class SweepAxis(Enum):
    """Parameter varied along a sweep."""

    N = "n"
    THETA = "theta"
    P = "p"


@dataclass(frozen=True)
class Estimate:
    """Point estimate of a probability with a two-sided confidence interval."""

    point: float
    ci_low: float
    ci_high: float
    trials: int
    seed: int
    method: EstimateMethod = EstimateMethod.MONTE_CARLO
    approximate: bool = False
    successes: Optional[int] = None

    def __post_init__(self) -> None:
        if not (0.0 <= self.ci_low <= self.point <= self.ci_high <= 1.0):
            raise ValueError(f"inconsistent interval: {self.ci_low} <= {self.point} <= {self.ci_high}")


@dataclass(frozen=True)
class MagnetizationStats:
    """Finite-n statistics of sqrt(n) * mean."""

    var_scaled: float
    below_b_mass: float
    bound: float
    histogram: np.ndarray
    bin_edges: np.ndarray
    trials: int
    method: EstimateMethod


@dataclass(frozen=True)
class ResidualMoments:
    """Moments of sqrt(n) (mean(Y) - (1 - 2p) mean(X)) across trials."""

    mean: float
    var: float
    mean_std_error: float
    var_std_error: float
    trials: int


@dataclass(frozen=True)
class SweepRow:
    """One row of a parameter sweep, re-runnable from its own seed."""

    graph: str
    n: int
    theta: Optional[float]
    p: float
    trials: int
    seed: int
    estimate: Estimate
    limit: Optional[float] = None
    bound: Optional[float] = None
    config: Optional[ExperimentConfig] = field(default=None, compare=False)

    def as_record(self) -> dict:
        return {
            "graph": self.graph,
            "n": self.n,
            "theta": self.theta,
            "p": self.p,
            "trials": self.trials,
            "seed": self.seed,
            "pe_hat": self.estimate.point,
            "ci_low": self.estimate.ci_low,
            "ci_high": self.estimate.ci_high,
            "limit": self.limit,
            "bound": self.bound,
        }


def substream(seed: int, kind: int, index: int) -> np.random.Generator:
    """Independent generator keyed by (seed, kind, index)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(kind, index))))


def block_rng(seed: int, block: int) -> np.random.Generator:
    return substream(seed, _BLOCK_STREAM, block)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Generator for a single trial, for one-off draws outside the block harness."""
    return substream(seed, _TRIAL_STREAM, trial)


def derive_seed(seed: int, index: int) -> int:
    """64-bit seed for sweep row ``index``."""
    state = np.random.SeedSequence(seed, spawn_key=(_ROW_STREAM, index)).generate_state(1, dtype=np.uint64)
    return int(state[0])


def wilson_interval(successes: int, trials: int, confidence: float) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ConfigurationError(f"trials must be >= 1, got {trials}")
    z = float(norm.ppf(0.5 + confidence / 2.0))
    p_hat = successes / trials
    denom = 1.0 + z**2 / trials
    center = (p_hat + z**2 / (2.0 * trials)) / denom
    half = z / denom * math.sqrt(p_hat * (1.0 - p_hat) / trials + z**2 / (4.0 * trials**2))
    low = max(0.0, min(center - half, p_hat))
    high = min(1.0, max(center + half, p_hat))
    return low, high


def wilson_standard_error(successes: int, trials: int) -> float:
    """Half-width of the Wilson interval at z = 1."""
    low, high = wilson_interval(successes, trials, float(2.0 * norm.cdf(1.0) - 1.0))
    return (high - low) / 2.0


@dataclass(frozen=True)
class _BlockTask:
    """Everything one worker needs to draw a trial block; built once per run."""

    model: IsingModel
    channel: NoiseChannel
    glauber: GlauberOptions
    seed: int
    block: int
    count: int


def _draw_block(task: _BlockTask) -> Tuple[np.ndarray, np.ndarray]:
    """Plus counts of X and Y for ``task.count`` trials of one block."""
    rng = block_rng(task.seed, task.block)
    kx = sample_plus_counts(task.model, rng, task.count, glauber=task.glauber)
    ky = bsc_apply_counts(kx, task.model.n, task.channel, rng)
    return kx, ky


def _resolve_workers(workers: Optional[int]) -> int:
    return max(1, workers if workers is not None else get_settings().WORKERS)


def draw_trials(
    config: ExperimentConfig,
    workers: Optional[int] = None,
    model: Optional[IsingModel] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Plus counts of X and Y for every trial, in trial-index order.

    Args:
        config: Experiment configuration
        workers: Process count (defaults to ISINGVOTE_WORKERS)
        model: Prior built from config; built here when omitted

    Returns:
        Tuple of int64 arrays (kx, ky) of length config.trials
    """
    settings = get_settings()
    block_size = settings.BLOCK_TRIALS
    model = model if model is not None else config.build_model()
    channel = config.channel()
    glauber = config.glauber_options()
    blocks = [
        _BlockTask(model, channel, glauber, config.seed, b, min(block_size, config.trials - b * block_size))
        for b in range(-(-config.trials // block_size))
    ]
    workers = _resolve_workers(workers)
    logger.info(
        f"Drawing {config.trials} trials on {config.graph} n={config.n} theta={config.theta} "
        f"p={config.p} in {len(blocks)} blocks with {workers} worker(s)"
    )

    def progress(results: Iterable) -> Iterable:
        if settings.PROGRESS:
            return tqdm(results, total=len(blocks), desc="blocks", leave=False)
        return results

    if workers == 1 or len(blocks) == 1:
        parts = list(progress(map(_draw_block, blocks)))
    else:
        # executor.map yields in submission order, keeping the reduction ordered
        with ProcessPoolExecutor(max_workers=workers) as executor:
            parts = list(progress(executor.map(_draw_block, blocks)))

    kx = np.concatenate([part[0] for part in parts])
    ky = np.concatenate([part[1] for part in parts])
    return kx, ky


def estimate_pe(config: ExperimentConfig, workers: Optional[int] = None) -> Estimate:
    """Monte Carlo estimate of the majority-vote detection error probability.

    Returns:
        Estimate: Error frequency with a Wilson score interval at config.confidence
    """
    model = config.build_model()
    kx, ky = draw_trials(config, workers, model=model)
    n = config.n
    errors = int(np.count_nonzero((2 * kx > n) != (2 * ky > n)))
    low, high = wilson_interval(errors, config.trials, config.confidence)
    info = sampler_info(model)
    return Estimate(
        point=errors / config.trials,
        ci_low=low,
        ci_high=high,
        trials=config.trials,
        seed=config.seed,
        method=EstimateMethod.MONTE_CARLO,
        approximate=not info.exact,
        successes=errors,
    )


def magnetization_stats(
    config: ExperimentConfig,
    b: float,
    bins: int = 41,
    use_exact: Optional[bool] = None,
    workers: Optional[int] = None,
) -> MagnetizationStats:
    """Variance, mass near zero and histogram of sqrt(n) * mean.

    Args:
        config: Experiment configuration
        b: Half-width B of the window |sqrt(n) mean| <= B
        bins: Number of histogram bins over [-sqrt(n), sqrt(n)]
        use_exact: Use the closed-form pmf instead of sampling; by default only
            for exchangeable priors when trials * n exceeds 10^8
        workers: Process count

    Raises:
        ConfigurationError: If b <= 0
    """
    if not b > 0:
        raise ConfigurationError(f"window half-width B must be positive, got {b}")
    model = config.build_model()
    n = config.n
    edges = np.linspace(-math.sqrt(n), math.sqrt(n), bins + 1)
    if use_exact is None:
        use_exact = model.is_exchangeable and config.trials * n > 10**8
    if use_exact:
        if not exact_pmf_available(model):
            raise ConfigurationError(f"no exact magnetization pmf for {config.graph} n={n}")
        pmf = exact_magnetization_pmf(model)
        scaled = pmf.scaled()
        hist, _ = np.histogram(scaled, bins=edges, weights=pmf.probs)
        return MagnetizationStats(
            var_scaled=pmf.expect(scaled**2),
            below_b_mass=pmf.expect((np.abs(scaled) <= b).astype(np.float64)),
            bound=b,
            histogram=hist,
            bin_edges=edges,
            trials=config.trials,
            method=EstimateMethod.EXACT,
        )

    kx, _ = draw_trials(config, workers, model=model)
    scaled = (2 * kx - n) / math.sqrt(n)
    hist, _ = np.histogram(scaled, bins=edges)
    return MagnetizationStats(
        var_scaled=float(np.var(scaled, ddof=1)) if scaled.size > 1 else 0.0,
        below_b_mass=float(np.mean(np.abs(scaled) <= b)),
        bound=b,
        histogram=hist,
        bin_edges=edges,
        trials=config.trials,
        method=EstimateMethod.MONTE_CARLO,
    )


def residual_diagnostic(config: ExperimentConfig, workers: Optional[int] = None) -> ResidualMoments:
    """Empirical mean and variance of sqrt(n) (mean(Y) - (1 - 2p) mean(X)).

    This is the conditional-convergence diagnostic: given the prior draw,
    the channel output concentrates around (1 - 2p) times the input.

    The per-member residual Z_i = Y_i - (1 - 2p) X_i is conditionally
    centered with variance 4p(1 - p), so the statistic should approach
    N(0, 4p(1 - p)).
    """
    kx, ky = draw_trials(config, workers)
    n = config.n
    sx = (2 * kx - n).astype(np.float64)
    sy = (2 * ky - n).astype(np.float64)
    stat = (sy - (1.0 - 2.0 * config.p) * sx) / math.sqrt(n)
    trials = stat.size
    var = float(np.var(stat, ddof=1)) if trials > 1 else 0.0
    return ResidualMoments(
        mean=float(np.mean(stat)),
        var=var,
        mean_std_error=math.sqrt(var / trials),
        var_std_error=var * math.sqrt(2.0 / max(trials - 1, 1)),
        trials=trials,
    )


def estimate_hoeffding_mc(config: ExperimentConfig) -> float:
    """Monte Carlo evaluation of the Hoeffding bound from prior draws."""
    return hoeffding_bound(
        config.build_model(),
        config.p,
        method=BoundMethod.MONTE_CARLO,
        trials=config.trials,
        rng=substream(config.seed, _BOUND_STREAM, 0),
    )


def exact_bound_or_none(config: ExperimentConfig) -> Optional[float]:
    """Exact Hoeffding bound when the exact pmf is available, else None."""
    model = config.build_model()
    if not exact_pmf_available(model):
        return None
    return hoeffding_bound(model, config.p, method=BoundMethod.EXACT)


def _axis_value(axis: SweepAxis, value: Any) -> Any:
    if axis is SweepAxis.N:
        return int(value)
    return float(value)


def sweep(
    base: ExperimentConfig,
    axis: SweepAxis,
    values: Sequence[Any],
    workers: Optional[int] = None,
    on_row: Optional[Callable[[SweepRow], None]] = None,
) -> List[SweepRow]:
    """Estimate P_e along one parameter axis.

    Row ``i`` runs with the seed derived from ``(base.seed, i)``, which the
    row records so it can be re-run on its own.

    Raises:
        ConfigurationError: Naming the first row whose derived config is invalid
    """
    rows: List[SweepRow] = []
    for i, value in enumerate(values):
        try:
            config = base.with_updates(**{axis.value: _axis_value(axis, value), "seed": derive_seed(base.seed, i)})
        except (ValidationError, ValueError) as e:
            raise ConfigurationError(f"sweep row {i} ({axis.value}={value}) is invalid: {e}")

        estimate = estimate_pe(config, workers)
        row = SweepRow(
            graph=config.graph,
            n=config.n,
            theta=config.theta,
            p=config.p,
            trials=config.trials,
            seed=config.seed,
            estimate=estimate,
            limit=limit_for(config.family, config.resolved_coupling, config.theta, config.p),
            bound=exact_bound_or_none(config),
            config=config,
        )
        logger.info(f"Sweep row {i}: {axis.value}={value} pe_hat={estimate.point:.6g}")
        rows.append(row)
        if on_row is not None:
            on_row(row)
    return rows


def regression_slope(ns: Sequence[float], pes: Sequence[float]) -> float:
    """Least-squares slope of -log P_e against n.

    Raises:
        ConfigurationError: If any estimate is zero or fewer than two points are given
    """
    ns = np.asarray(ns, dtype=np.float64)
    pes = np.asarray(pes, dtype=np.float64)
    if ns.size < 2 or ns.size != pes.size:
        raise ConfigurationError("regression needs at least two (n, P_e) pairs")
    if np.any(pes <= 0):
        raise ConfigurationError("regression of -log P_e needs strictly positive estimates")
    slope, _ = np.polyfit(ns, -np.log(pes), 1)
    return float(slope)

"""Exact oracles: conditional and average error probabilities, magnetization pmf."""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.special import logsumexp
from scipy.stats import binom

from src.models.detection import check_crossover, check_odd
from src.models.graph import GraphFamily
from src.models.ising import (
    IsingModel,
    as_spin_vector,
    chain_magnetization_log_weights,
    state_statistics,
    sum_log_weights,
)
from src.shared.exceptions import ConfigurationError
from src.shared.settings import get_settings

logger = logging.getLogger(__name__)

MAX_CLOSED_FORM_N = 10**6


@dataclass(frozen=True)
class MagnetizationPmf:
    """Distribution of S = 1^T X over (-n, -n+2, ..., n)."""

    sums: np.ndarray
    probs: np.ndarray
    method: str

    @property
    def n(self) -> int:
        return int(self.sums[-1])

    @property
    def plus_counts(self) -> np.ndarray:
        return (self.sums + self.n) // 2

    def scaled(self) -> np.ndarray:
        """Support of sqrt(n) * mean, i.e. S / sqrt(n)."""
        return self.sums / math.sqrt(self.n)

    def expect(self, values: np.ndarray) -> float:
        """Compensated expectation of per-sum values."""
        return math.fsum(self.probs * values)


def conditional_error_prob_counts(k: int, n: int, p: float) -> float:
    """P(majority of Y differs from majority of x | x has k entries equal to +1).

    The observed plus count is k - B_plus + B_minus with B_plus ~ Bin(k, p),
    B_minus ~ Bin(n - k, p); the error is a tail of that convolution, summed
    over B_plus with compensated accumulation.
    """
    check_odd(n)
    check_crossover(p)
    if not 0 <= k <= n:
        raise ConfigurationError(f"plus count must lie in [0, {n}], got {k}")
    lost = np.arange(k + 1)
    lost_pmf = binom.pmf(lost, k, p)
    half = (n - 1) // 2
    if 2 * k > n:
        # error iff k - a + c <= half, i.e. c <= half - k + a
        tail = binom.cdf(half - k + lost, n - k, p)
    else:
        # error iff k - a + c >= half + 1, i.e. c > half - k + a
        tail = binom.sf(half - k + lost, n - k, p)
    return math.fsum(lost_pmf * tail)


@lru_cache(maxsize=64)
def _conditional_error_table(n: int, p: float) -> np.ndarray:
    table = np.empty(n + 1)
    for k in range(n + 1):
        # spin-flip symmetry: P(err | k) = P(err | n - k)
        if k > n - k:
            table[k] = table[n - k]
        else:
            table[k] = conditional_error_prob_counts(k, n, p)
    table.setflags(write=False)
    return table


def conditional_error_table(n: int, p: float) -> np.ndarray:
    """Conditional error probability for every plus count k = 0..n."""
    check_odd(n)
    check_crossover(p)
    return _conditional_error_table(n, float(p))


def conditional_error_prob(x: Sequence[int], p: float) -> float:
    """Exact P(sign(1^T Y) != sign(1^T x) | x).

    Raises:
        ConfigurationError: If len(x) is even or p is outside (0, 1/2)
    """
    x = as_spin_vector(x)
    n = x.shape[0]
    return conditional_error_prob_counts(int(np.count_nonzero(x > 0)), n, p)


def _normalize(sums: np.ndarray, log_weights: np.ndarray, method: str) -> MagnetizationPmf:
    probs = np.exp(log_weights - logsumexp(log_weights))
    probs = probs / math.fsum(probs)
    return MagnetizationPmf(sums=np.asarray(sums, dtype=np.int64), probs=probs, method=method)


def _enumerated_pmf(model: IsingModel) -> MagnetizationPmf:
    energies, sums = state_statistics(model)
    shifted = np.exp(energies - energies.max())
    n = model.n
    order = np.argsort(sums, kind="stable")
    bounds = np.searchsorted(sums[order], np.arange(-n, n + 2, 2))
    weights = np.array([
        math.fsum(shifted[order[bounds[i]:bounds[i + 1]]]) for i in range(n + 1)
    ])
    with np.errstate(divide="ignore"):
        return _normalize(np.arange(-n, n + 1, 2), np.log(weights), "enumeration")


def exact_pmf_available(model: IsingModel) -> bool:
    """True when exact_magnetization_pmf can handle the model."""
    if model.is_exchangeable:
        return model.n <= MAX_CLOSED_FORM_N
    if model.family in (GraphFamily.CHAIN, GraphFamily.CHAIN_PBC):
        return True
    return model.n <= get_settings().MAX_ENUMERATION_N


def exact_magnetization_pmf(model: IsingModel) -> MagnetizationPmf:
    """Exact distribution of the spin sum under the prior.

    Closed-form weights for the empty and complete graphs, a forward
    recursion for chains, full enumeration for custom graphs.

    Raises:
        ConfigurationError: If the model is too large for its method
    """
    n = model.n
    if model.is_exchangeable:
        if n > MAX_CLOSED_FORM_N:
            raise ConfigurationError(f"n={n} exceeds the closed-form limit {MAX_CLOSED_FORM_N}")
        sums, log_w = sum_log_weights(model)
        return _normalize(sums, log_w, "closed-form")
    if model.family in (GraphFamily.CHAIN, GraphFamily.CHAIN_PBC):
        log_w = chain_magnetization_log_weights(n, model.theta, model.family is GraphFamily.CHAIN_PBC)
        return _normalize(np.arange(-n, n + 1, 2), log_w, "chain-recursion")
    return _enumerated_pmf(model)


def exact_error_prob(model: IsingModel, p: float) -> float:
    """Exact detection error probability of the majority detector.

    Averages the conditional error probability over the exact distribution
    of 1^T X; equal to the sum over all 2^n configurations.

    Raises:
        ConfigurationError: On even n, p outside (0, 1/2) or a model too large
    """
    check_odd(model.n)
    check_crossover(p)
    pmf = exact_magnetization_pmf(model)
    table = conditional_error_table(model.n, p)
    value = pmf.expect(table[pmf.plus_counts])
    logger.debug(f"Exact P_e for {model.family.value} n={model.n} theta={model.theta} p={p}: {value}")
    return value


def exact_pmf_mean_abs_scaled(model: IsingModel) -> float:
    """E|sqrt(n) * mean| under the exact pmf."""
    pmf = exact_magnetization_pmf(model)
    return pmf.expect(np.abs(pmf.scaled()))

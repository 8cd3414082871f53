"""Closed-form limits, bounds and the mean-field free energy of the majority detector."""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Tuple, Union

import numpy as np
from scipy import integrate, optimize
from scipy.special import erfc

from src.models.detection import check_crossover
from src.models.exact import MagnetizationPmf, exact_magnetization_pmf
from src.models.graph import GraphFamily
from src.models.ising import Coupling, IsingModel, curie_weiss_log_partition, log_cosh, sample_plus_counts
from src.shared.exceptions import ConfigurationError, ConvergenceError
from src.shared.settings import get_settings

logger = logging.getLogger(__name__)

CRITICAL_THETA = 0.5
QUAD_MAX_ABSERR = 1e-9


class LimitKind(Enum):
    """Limiting law of sqrt(n) * mean."""

    IID = "iid"
    CHAIN = "chain"
    COMPLETE_SUBCRITICAL = "complete-subcritical"
    GAUSSIAN_SIGMA = "gaussian-sigma"
    FROM_SAMPLES = "from-samples"


class BoundMethod(Enum):
    """How the Hoeffding expectation is evaluated."""

    EXACT = "exact"
    MONTE_CARLO = "monte-carlo"


@dataclass(frozen=True, eq=False)
class LimitSpec:
    """A limiting distribution Phi of sqrt(n) * mean.

    Gaussian kinds are N(0, sigma^2): sigma = 1 (IID), e^theta (CHAIN),
    1/sqrt(1 - 2 theta) (COMPLETE_SUBCRITICAL) or as given. FROM_SAMPLES
    carries draws from Phi, or a density to integrate against.
    """

    kind: LimitKind
    theta: Optional[float] = None
    sigma_value: Optional[float] = None
    samples: Optional[np.ndarray] = None
    density: Optional[Callable[[float], float]] = None

    def __post_init__(self) -> None:
        if self.kind in (LimitKind.CHAIN, LimitKind.COMPLETE_SUBCRITICAL):
            if self.theta is None or not self.theta > 0:
                raise ConfigurationError(f"{self.kind.value} limit needs theta > 0")
        if self.kind is LimitKind.COMPLETE_SUBCRITICAL and not self.theta < CRITICAL_THETA:
            raise ConfigurationError(f"subcritical complete-graph limit needs theta < 1/2, got {self.theta}")
        if self.kind is LimitKind.GAUSSIAN_SIGMA and (self.sigma_value is None or not self.sigma_value > 0):
            raise ConfigurationError(f"gaussian limit needs sigma > 0, got {self.sigma_value}")
        if self.kind is LimitKind.FROM_SAMPLES and self.density is None:
            if self.samples is None or np.asarray(self.samples).size == 0:
                raise ConfigurationError("sample-based limit needs a non-empty sample set or a density")

    def sigma(self) -> Optional[float]:
        """Standard deviation for the Gaussian kinds, None otherwise."""
        if self.kind is LimitKind.IID:
            return 1.0
        if self.kind is LimitKind.CHAIN:
            return math.exp(self.theta)
        if self.kind is LimitKind.COMPLETE_SUBCRITICAL:
            return 1.0 / math.sqrt(1.0 - 2.0 * self.theta)
        if self.kind is LimitKind.GAUSSIAN_SIGMA:
            return self.sigma_value
        return None


def q_tail(x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """Standard normal tail probability Q(x) = P(N(0,1) > x)."""
    result = 0.5 * erfc(np.asarray(x, dtype=np.float64) / math.sqrt(2.0))
    return float(result) if np.ndim(result) == 0 else result


def arccot(x: float) -> float:
    """Inverse cotangent with range (0, pi)."""
    return math.atan2(1.0, x)


def noise_gain(p: float) -> float:
    """(1 - 2p) / sqrt(4p(1 - p)), the signal-to-noise factor of the channel."""
    check_crossover(p)
    return (1.0 - 2.0 * p) / math.sqrt(4.0 * p * (1.0 - p))


def pe_limit_iid(p: float) -> float:
    """Limit of P_e on the empty graph: (2/pi) arcsin(sqrt(p))."""
    check_crossover(p)
    return 2.0 / math.pi * math.asin(math.sqrt(p))


def pe_limit_gaussian(p: float, sigma: float) -> float:
    """Limit of P_e when sqrt(n) * mean converges to N(0, sigma^2)."""
    if not sigma > 0:
        raise ConfigurationError(f"sigma must be positive, got {sigma}")
    return arccot(noise_gain(p) * sigma) / math.pi


def pe_limit_chain(p: float, theta: float) -> float:
    """Limit of P_e on the chain: limiting variance e^{2 theta}."""
    if not theta > 0:
        raise ConfigurationError(f"theta must be positive, got {theta}")
    return pe_limit_gaussian(p, math.exp(theta))


def pe_limit_complete_subcritical(p: float, theta: float) -> float:
    """Limit of P_e on the Curie-Weiss model below the critical point.

    Raises:
        ConfigurationError: If theta >= 1/2 (use error_exponent_lb there)
    """
    if not 0 < theta < CRITICAL_THETA:
        raise ConfigurationError(
            f"subcritical limit needs 0 < theta < 1/2, got {theta}; "
            "above the critical point P_e -> 0, see error_exponent_lb"
        )
    return pe_limit_gaussian(p, 1.0 / math.sqrt(1.0 - 2.0 * theta))


def c_p(p: float) -> float:
    """Hoeffding constant C_p = (1 - 2p)^2 / (8 (1 - p)^2), in (0, 1/8)."""
    check_crossover(p)
    return (1.0 - 2.0 * p) ** 2 / (8.0 * (1.0 - p) ** 2)


def limit_for(
    family: GraphFamily, coupling: Coupling, theta: Optional[float], p: float
) -> Optional[float]:
    """The closed-form limit of P_e matching a model family, when one is known."""
    if family is GraphFamily.EMPTY:
        return pe_limit_iid(p)
    if family in (GraphFamily.CHAIN, GraphFamily.CHAIN_PBC):
        return pe_limit_chain(p, theta) if theta else None
    if family is GraphFamily.COMPLETE and coupling is Coupling.CURIE_WEISS and theta:
        if theta < CRITICAL_THETA:
            return pe_limit_complete_subcritical(p, theta)
        if theta > CRITICAL_THETA:
            return 0.0
    return None


def limit_spec_for(model: IsingModel) -> Optional[LimitSpec]:
    """LimitSpec of sqrt(n) * mean for families with a Gaussian limit."""
    if model.family is GraphFamily.EMPTY:
        return LimitSpec(LimitKind.IID)
    if model.family in (GraphFamily.CHAIN, GraphFamily.CHAIN_PBC):
        return LimitSpec(LimitKind.CHAIN, theta=model.theta)
    if model.coupling is Coupling.CURIE_WEISS and model.theta < CRITICAL_THETA:
        return LimitSpec(LimitKind.COMPLETE_SUBCRITICAL, theta=model.theta)
    return None


def hoeffding_bound(
    model: IsingModel,
    p: float,
    method: BoundMethod = BoundMethod.EXACT,
    trials: int = 100_000,
    rng: Optional[np.random.Generator] = None,
) -> float:
    """Upper bound E[exp(-C_p (sqrt(n) mean)^2)] on the detection error probability.

    Args:
        model: Ising prior
        p: Crossover probability
        method: EXACT uses the exact magnetization pmf; MONTE_CARLO averages prior draws
        trials: Number of prior draws for MONTE_CARLO
        rng: Generator for MONTE_CARLO (seeded from 0 when omitted)

    Raises:
        ConfigurationError: If the exact pmf is unavailable for the model
    """
    cp = c_p(p)
    n = model.n
    if method is BoundMethod.EXACT:
        pmf = exact_magnetization_pmf(model)
        return pmf.expect(np.exp(-cp * pmf.sums.astype(np.float64) ** 2 / n))
    rng = rng or np.random.default_rng(0)
    k = sample_plus_counts(model, rng, trials)
    sums = (2 * k - n).astype(np.float64)
    return float(np.mean(np.exp(-cp * sums**2 / n)))


def curie_weiss_hoeffding_bound(n: int, theta: float, p: float) -> float:
    """Hoeffding bound on the Curie-Weiss model as Z_n(theta - C_p) / Z_n(theta).

    Raises:
        ConfigurationError: If theta <= C_p
    """
    cp = c_p(p)
    if not theta > cp:
        raise ConfigurationError(f"partition-ratio bound needs theta > C_p = {cp:.6g}, got {theta}")
    return math.exp(curie_weiss_log_partition(n, theta - cp) - curie_weiss_log_partition(n, theta))


def finite_n_exponent(n: int, theta: float, p: float) -> float:
    """-(1/n) log of the Curie-Weiss Hoeffding bound at finite n."""
    cp = c_p(p)
    if not theta > cp:
        raise ConfigurationError(f"finite-n exponent needs theta > C_p = {cp:.6g}, got {theta}")
    return (curie_weiss_log_partition(n, theta) - curie_weiss_log_partition(n, theta - cp)) / n


def _gaussian_q_functional(gain: float, sigma: float) -> float:
    settings = get_settings()

    def integrand(x: float) -> float:
        return q_tail(gain * x) * math.exp(-0.5 * (x / sigma) ** 2)

    # symmetric integrand: 2 * int_0^inf
    value, abserr = integrate.quad(
        integrand, 0.0, math.inf, epsabs=settings.QUAD_EPSABS, epsrel=settings.QUAD_EPSREL, limit=200
    )
    if abserr > QUAD_MAX_ABSERR:
        raise ConvergenceError("Gaussian Q-functional quadrature did not converge", residual=abserr)
    return 2.0 * value / (sigma * math.sqrt(2.0 * math.pi))


def _density_q_functional(gain: float, density: Callable[[float], float]) -> float:
    settings = get_settings()

    def integrand(x: float) -> float:
        # fold the kink of Q(gain |x|) at 0 onto the half line
        return q_tail(gain * x) * (density(x) + density(-x))

    value, abserr = integrate.quad(
        integrand, 0.0, math.inf, epsabs=settings.QUAD_EPSABS, epsrel=settings.QUAD_EPSREL, limit=200
    )
    if abserr > QUAD_MAX_ABSERR:
        raise ConvergenceError(
            "Q-functional quadrature against the limit density did not converge", residual=abserr
        )
    return value


def q_functional(
    source: Union[IsingModel, LimitSpec, MagnetizationPmf, np.ndarray],
    p: float,
) -> float:
    """E[Q(c |sqrt(n) mean|)] with c = (1 - 2p) / sqrt(4p(1 - p)).

    Args:
        source: A model (exact pmf), a pmf, a LimitSpec, or samples of sqrt(n) * mean
        p: Crossover probability

    Raises:
        ConfigurationError: On an empty sample set
        ConvergenceError: If quadrature against a limit density misses its tolerance
    """
    gain = noise_gain(p)
    if isinstance(source, IsingModel):
        source = exact_magnetization_pmf(source)
    if isinstance(source, MagnetizationPmf):
        return source.expect(q_tail(gain * np.abs(source.scaled())))
    if isinstance(source, LimitSpec):
        sigma = source.sigma()
        if sigma is not None:
            return _gaussian_q_functional(gain, sigma)
        if source.density is not None:
            return _density_q_functional(gain, source.density)
        source = np.asarray(source.samples, dtype=np.float64)
    samples = np.asarray(source, dtype=np.float64)
    if samples.size == 0:
        raise ConfigurationError("q_functional needs at least one sample")
    return float(np.mean(q_tail(gain * np.abs(samples))))


def f_value(theta: float, s: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """f(theta, s) = log cosh(2 sqrt(theta) s) - s^2."""
    if not theta > 0:
        raise ConfigurationError(f"theta must be positive, got {theta}")
    return log_cosh(2.0 * math.sqrt(theta) * np.asarray(s, dtype=np.float64)) - np.asarray(s) ** 2


def f_max(theta: float) -> Tuple[float, float]:
    """max_s f(theta, s) and its non-negative maximizer.

    Zero at s = 0 for theta <= 1/2. Above, the maximizer is s* = sqrt(theta) m
    with m the positive root of m = tanh(2 theta m).

    Raises:
        ConvergenceError: If the stationarity residual exceeds 1e-10
    """
    if not theta > 0:
        raise ConfigurationError(f"theta must be positive, got {theta}")
    if theta <= CRITICAL_THETA:
        return 0.0, 0.0

    def stationarity(m: float) -> float:
        return math.tanh(2.0 * theta * m) - m

    lo = 1e-12
    if stationarity(lo) <= 0:
        return 0.0, 0.0
    m = optimize.brentq(stationarity, lo, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    s_star = math.sqrt(theta) * m
    residual = abs(s_star - math.sqrt(theta) * math.tanh(2.0 * math.sqrt(theta) * s_star))
    if residual > 1e-10:
        logger.error(f"f_max root solve missed tolerance at theta={theta}")
        raise ConvergenceError("mean-field fixed point did not converge", residual=residual)
    return float(f_value(theta, s_star)), s_star


def error_exponent_lb(theta: float, p: float) -> float:
    """Lower bound max_s f(theta, s) - max_s f(theta - C_p, s) on the error exponent.

    Raises:
        ConfigurationError: If theta <= 1/2
    """
    if not theta > CRITICAL_THETA:
        raise ConfigurationError(f"error exponent bound needs theta > 1/2, got {theta}")
    cp = c_p(p)
    return f_max(theta)[0] - f_max(theta - cp)[0]

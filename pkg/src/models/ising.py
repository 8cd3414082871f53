"""Ising priors on graphs: energies, partition functions and samplers."""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate, optimize
from scipy.special import expit, gammaln, logsumexp

from src.models.graph import Graph, GraphFamily
from src.shared.exceptions import ConfigurationError, ConvergenceError
from src.shared.settings import get_settings

logger = logging.getLogger(__name__)

SpinVector = np.ndarray


class Coupling(Enum):
    """How the inverse temperature enters the energy."""

    EDGEWISE = "edgewise"
    CURIE_WEISS = "curie-weiss"


@dataclass(frozen=True)
class IsingModel:
    """Homogeneous Ising prior on a graph.

    Edgewise energy is ``theta * sum_{(i,j) in edges} x_i x_j``; Curie-Weiss
    energy is ``(theta / n) * (1^T x)^2`` and is only defined on complete graphs.
    """

    graph: Graph
    theta: float
    coupling: Coupling = Coupling.EDGEWISE

    def __post_init__(self) -> None:
        if not (self.theta > 0 and math.isfinite(self.theta)):
            raise ConfigurationError(f"theta must be a positive finite number, got {self.theta}")
        if self.coupling is Coupling.CURIE_WEISS and self.graph.family is not GraphFamily.COMPLETE:
            raise ConfigurationError(
                f"Curie-Weiss coupling requires the complete graph, got {self.graph.family.value}"
            )

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def family(self) -> GraphFamily:
        return self.graph.family

    @property
    def is_exchangeable(self) -> bool:
        """True when the prior depends on x only through 1^T x."""
        return self.family in (GraphFamily.EMPTY, GraphFamily.COMPLETE)


@dataclass(frozen=True)
class GlauberOptions:
    """Heat-bath dynamics settings for graphs without an exact sampler.

    Lengths are counted in sweeps of n single-site updates: ``burn_in_sweeps=100``
    runs each chain for 100 * n updates before its first draw, and consecutive
    draws from one chain are ``thinning_sweeps * n`` updates apart.
    """

    burn_in_sweeps: int
    thinning_sweeps: int
    chains: int

    @classmethod
    def from_settings(cls) -> "GlauberOptions":
        settings = get_settings()
        return cls(
            burn_in_sweeps=settings.GLAUBER_BURN_IN_SWEEPS,
            thinning_sweeps=settings.GLAUBER_THINNING_SWEEPS,
            chains=settings.GLAUBER_CHAINS,
        )


@dataclass(frozen=True)
class SamplerInfo:
    """Which sampler a model uses and whether its draws are exact."""

    method: str
    exact: bool


def as_spin_vector(values: Sequence[int], n: Optional[int] = None) -> SpinVector:
    """Validate and convert to an int8 vector over {-1, +1}.

    Raises:
        ConfigurationError: On entries other than +-1 or a length mismatch
    """
    x = np.asarray(values)
    if x.ndim != 1:
        raise ConfigurationError(f"spin vector must be one-dimensional, got shape {x.shape}")
    if not np.all((x == 1) | (x == -1)):
        raise ConfigurationError("spin vector entries must be -1 or +1")
    if n is not None and x.shape[0] != n:
        raise ConfigurationError(f"spin vector has length {x.shape[0]}, model has n={n}")
    return x.astype(np.int8)


def quadratic_form(graph: Graph, x: Sequence[int]) -> float:
    """Return x^T A x for the graph's adjacency matrix A."""
    x = as_spin_vector(x, graph.n)
    if graph.is_implicit:
        s = int(x.sum(dtype=np.int64))
        return float(s * s - graph.n)
    if not graph.edges:
        return 0.0
    idx = np.asarray(graph.edges, dtype=np.intp)
    return 2.0 * float(np.sum(x[idx[:, 0]].astype(np.int64) * x[idx[:, 1]]))


def energy_of_sum(model: IsingModel, s: Union[int, np.ndarray]) -> Union[float, np.ndarray]:
    """Energy of any configuration with spin sum ``s`` (exchangeable families only)."""
    s = np.asarray(s, dtype=np.float64)
    if model.family is GraphFamily.EMPTY:
        return np.zeros_like(s) if s.ndim else 0.0
    if model.family is not GraphFamily.COMPLETE:
        raise ConfigurationError(f"energy depends on more than the spin sum for {model.family.value}")
    if model.coupling is Coupling.CURIE_WEISS:
        return model.theta / model.n * s**2
    # sum_{i<j} x_i x_j = (S^2 - n) / 2
    return model.theta * (s**2 - model.n) / 2.0


def energy(model: IsingModel, x: Sequence[int]) -> float:
    """Energy (log unnormalized prior weight) of a configuration.

    Args:
        model: Ising model
        x: Spin vector of length model.n

    Returns:
        float: Edgewise ``theta * sum_edges x_i x_j``; Curie-Weiss ``(theta/n) (1^T x)^2``

    Raises:
        ConfigurationError: On length mismatch
    """
    x = as_spin_vector(x, model.n)
    if model.coupling is Coupling.CURIE_WEISS:
        return float(energy_of_sum(model, int(x.sum(dtype=np.int64))))
    return model.theta * quadratic_form(model.graph, x) / 2.0


def _check_enumerable(n: int) -> None:
    limit = get_settings().MAX_ENUMERATION_N
    if n > limit:
        raise ConfigurationError(
            f"n={n} exceeds the enumeration limit {limit}; use the chain or Curie-Weiss "
            "closed forms or Monte Carlo estimation"
        )


def state_statistics(model: IsingModel) -> Tuple[np.ndarray, np.ndarray]:
    """Energy and spin sum of every state, ordered by state index.

    State index ``u`` has spin ``x_i = +1`` when bit ``i`` of ``u`` is 0.

    Raises:
        ConfigurationError: If n exceeds the enumeration limit
    """
    n = model.n
    _check_enumerable(n)
    u = np.arange(2**n, dtype=np.uint32)

    ones = np.zeros(u.shape, dtype=np.int64)
    for i in range(n):
        ones += (u >> i) & 1
    sums = n - 2 * ones

    if model.coupling is Coupling.CURIE_WEISS:
        energies = model.theta / n * sums.astype(np.float64) ** 2
    else:
        agree = np.zeros(u.shape, dtype=np.int64)
        for i, j in model.graph.edges:
            # x_i x_j = 1 - 2 * (bit_i XOR bit_j)
            agree += 1 - 2 * (((u >> i) ^ (u >> j)) & 1).astype(np.int64)
        energies = model.theta * agree.astype(np.float64)
    return energies, sums


def enumerate_states(n: int) -> np.ndarray:
    """All 2^n spin vectors as rows, in state-index order."""
    _check_enumerable(n)
    u = np.arange(2**n, dtype=np.uint32)[:, None]
    bits = (u >> np.arange(n, dtype=np.uint32)) & 1
    return (1 - 2 * bits).astype(np.int8)


def log_partition_bruteforce(model: IsingModel, b: float = 0.0) -> float:
    """log sum_x exp(energy(x) + b 1^T x) by full enumeration.

    Raises:
        ConfigurationError: If n exceeds the enumeration limit
    """
    energies, sums = state_statistics(model)
    return float(logsumexp(energies + b * sums))


def chain_log_partition(n: int, theta: float, b: float = 0.0) -> float:
    """Closed-form log partition function of the periodic chain at field b.

    Z_n(theta, b) = e^{n theta} (lambda_+^n + lambda_-^n),
    lambda_{+-} = cosh b +- sqrt(sinh^2 b + e^{-4 theta}).

    Raises:
        ConfigurationError: If n < 3 or theta <= 0
    """
    if n < 3:
        raise ConfigurationError(f"periodic chain needs n >= 3, got {n}")
    if theta <= 0:
        raise ConfigurationError(f"theta must be positive, got {theta}")
    root = math.sqrt(math.sinh(b) ** 2 + math.exp(-4.0 * theta))
    lam_plus = math.cosh(b) + root
    lam_minus = math.cosh(b) - root  # positive, since cosh^2 b = 1 + sinh^2 b
    return n * theta + n * math.log(lam_plus) + math.log1p((lam_minus / lam_plus) ** n)


def log_cosh(x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """Overflow-free log(cosh(x))."""
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax)) - math.log(2.0)


def curie_weiss_log_partition(n: int, theta: float, b: float = 0.0) -> float:
    """log Z_n(theta, b) of the Curie-Weiss model by quadrature.

    Uses Z = (2^n sqrt(n) / sqrt(pi)) * int exp(n g(s)) ds with
    g(s) = log cosh(2 sqrt(theta) s + b) - s^2, integrated after
    subtracting n * max g so cosh^n never overflows.

    Raises:
        ConfigurationError: If n < 1 or theta <= 0
        ConvergenceError: If the quadrature error estimate exceeds tolerance
    """
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    if theta <= 0:
        raise ConfigurationError(f"theta must be positive, got {theta}")
    settings = get_settings()
    a = 2.0 * math.sqrt(theta)

    def g(s: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        return log_cosh(a * s + b) - s**2

    # g(s) <= a|s| + |b| - s^2, so beyond half_width the integrand is below e^{-60 n}
    half_width = a + abs(b) + 8.0
    grid = np.linspace(-half_width, half_width, 4001)
    values = g(grid)
    peaks = [
        i for i in range(1, grid.size - 1)
        if values[i] >= values[i - 1] and values[i] >= values[i + 1]
    ]
    g_max = -math.inf
    s_peaks = []
    step = grid[1] - grid[0]
    for i in peaks:
        res = optimize.minimize_scalar(
            lambda s: -g(s), bounds=(grid[i] - step, grid[i] + step), method="bounded",
            options={"xatol": 1e-12},
        )
        s_peaks.append(float(res.x))
        g_max = max(g_max, float(-res.fun))

    width = 1.0 / math.sqrt(n)
    points = sorted({
        s + k * width
        for s in s_peaks for k in (-6.0, -3.0, -1.0, 0.0, 1.0, 3.0, 6.0)
        if -half_width < s + k * width < half_width
    })

    def integrand(s: float) -> float:
        return math.exp(n * (g(s) - g_max))

    value, abserr = integrate.quad(
        integrand, -half_width, half_width, points=points, limit=400,
        epsabs=settings.QUAD_EPSABS, epsrel=settings.QUAD_EPSREL,
    )
    tolerance = max(settings.QUAD_EPSABS, settings.QUAD_EPSREL * value) * 1e3
    if not value > 0 or abserr > tolerance:
        logger.error(f"Curie-Weiss quadrature failed for n={n}, theta={theta}, b={b}")
        raise ConvergenceError("Curie-Weiss partition quadrature did not converge", residual=abserr)

    return (
        n * math.log(2.0) + 0.5 * math.log(n) - 0.5 * math.log(math.pi)
        + n * g_max + math.log(value)
    )


def sum_log_weights(model: IsingModel) -> Tuple[np.ndarray, np.ndarray]:
    """Unnormalized log-probabilities of S = 1^T x for exchangeable families.

    Returns:
        Tuple of sums ``(-n, -n+2, ..., n)`` and log C(n, (n+S)/2) + energy(S)
    """
    if not model.is_exchangeable:
        raise ConfigurationError(f"no closed-form sum weights for {model.family.value}")
    n = model.n
    k = np.arange(n + 1)
    sums = 2 * k - n
    log_binom = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    return sums, log_binom + energy_of_sum(model, sums)


def chain_magnetization_log_weights(n: int, theta: float, periodic: bool) -> np.ndarray:
    """Unnormalized log-probabilities of the plus count k = 0..n on a chain.

    Forward recursion over (last spin, plus count) with per-step
    renormalization; O(n^2) work, exact for any n.
    """
    if n < 3:
        raise ConfigurationError(f"chain needs n >= 3, got {n}")
    d = math.exp(-2.0 * theta)  # disagreement weight relative to agreement

    def run(first: int) -> Tuple[np.ndarray, np.ndarray, float]:
        plus = np.zeros(n + 1)
        minus = np.zeros(n + 1)
        if first > 0:
            plus[1] = 1.0
        else:
            minus[0] = 1.0
        log_scale = 0.0
        for _ in range(n - 1):
            new_plus = np.zeros(n + 1)
            new_plus[1:] = plus[:-1] + d * minus[:-1]
            minus = minus + d * plus
            plus = new_plus
            total = plus.sum() + minus.sum()
            plus /= total
            minus /= total
            log_scale += math.log(total)
        return plus, minus, log_scale

    edges = n if periodic else n - 1
    if not periodic:
        plus, minus, log_scale = run(+1)
        plus_b, minus_b, log_scale_b = run(-1)
        # The two runs are mirror images; both share a common scale
        weights = plus + minus + (plus_b + minus_b) * math.exp(log_scale_b - log_scale)
    else:
        plus, minus, log_scale = run(+1)
        plus_b, minus_b, log_scale_b = run(-1)
        wrap_plus = plus + d * minus
        wrap_minus = minus_b + d * plus_b
        weights = wrap_plus + wrap_minus * math.exp(log_scale_b - log_scale)
    with np.errstate(divide="ignore"):
        return np.log(weights) + log_scale + edges * theta


# ---------------------------------------------------------------------------
# Samplers
# ---------------------------------------------------------------------------


def _random_signs(rng: np.random.Generator, shape: Tuple[int, ...]) -> np.ndarray:
    return (2 * rng.integers(0, 2, size=shape, dtype=np.int8) - 1).astype(np.int8)


def _sample_empty(model: IsingModel, rng: np.random.Generator, size: int, **_: object) -> np.ndarray:
    return _random_signs(rng, (size, model.n))


def _free_chain(theta: float, n: int, rng: np.random.Generator, size: int) -> np.ndarray:
    flip = math.exp(-theta) / (math.exp(theta) + math.exp(-theta))
    steps = np.where(rng.random((size, n - 1)) < flip, -1, 1).astype(np.int8)
    first = _random_signs(rng, (size, 1))
    return np.cumprod(np.concatenate([first, steps], axis=1), axis=1, dtype=np.int8)


def _sample_chain(model: IsingModel, rng: np.random.Generator, size: int, **_: object) -> np.ndarray:
    return _free_chain(model.theta, model.n, rng, size)


def _sample_chain_pbc(model: IsingModel, rng: np.random.Generator, size: int, **_: object) -> np.ndarray:
    # Free-chain proposals accepted with exp(theta (x_n x_1 - 1)) on the wrap edge
    out = np.empty((size, model.n), dtype=np.int8)
    pending = np.arange(size)
    reject_weight = math.exp(-2.0 * model.theta)
    while pending.size:
        proposal = _free_chain(model.theta, model.n, rng, pending.size)
        agree = proposal[:, 0] == proposal[:, -1]
        accept = agree | (rng.random(pending.size) < reject_weight)
        out[pending[accept]] = proposal[accept]
        pending = pending[~accept]
    return out


def _exchangeable_plus_counts(model: IsingModel, rng: np.random.Generator, size: int) -> np.ndarray:
    if model.family is GraphFamily.EMPTY:
        return rng.binomial(model.n, 0.5, size=size)
    _, log_w = sum_log_weights(model)
    pmf = np.exp(log_w - logsumexp(log_w))
    pmf /= pmf.sum()
    return rng.choice(model.n + 1, size=size, p=pmf)


def _sample_exchangeable(model: IsingModel, rng: np.random.Generator, size: int, **_: object) -> np.ndarray:
    # Magnetization first, then uniform placement of the +1 entries
    k = _exchangeable_plus_counts(model, rng, size)
    ordered = np.where(np.arange(model.n)[None, :] < k[:, None], 1, -1).astype(np.int8)
    return rng.permuted(ordered, axis=1)


def _sample_glauber(
    model: IsingModel,
    rng: np.random.Generator,
    size: int,
    glauber: Optional[GlauberOptions] = None,
) -> np.ndarray:
    options = glauber or GlauberOptions.from_settings()
    n = model.n
    adjacency = model.graph.adjacency().astype(np.float64)
    chains = min(options.chains, size)
    per_chain = -(-size // chains)
    rows = np.arange(chains)
    x = _random_signs(rng, (chains, n))

    def run(updates: int) -> None:
        for _ in range(updates):
            site = rng.integers(0, n, size=chains)
            field = model.theta * np.einsum("cj,cj->c", adjacency[site], x)
            x[rows, site] = np.where(rng.random(chains) < expit(2.0 * field), 1, -1)

    run(options.burn_in_sweeps * n)
    draws = []
    for _ in range(per_chain):
        run(options.thinning_sweeps * n)
        draws.append(x.copy())
    return np.stack(draws, axis=0).reshape(-1, n)[:size]


SAMPLERS: Dict[GraphFamily, Callable[..., np.ndarray]] = {
    GraphFamily.EMPTY: _sample_empty,
    GraphFamily.CHAIN: _sample_chain,
    GraphFamily.CHAIN_PBC: _sample_chain_pbc,
    GraphFamily.COMPLETE: _sample_exchangeable,
    GraphFamily.CUSTOM: _sample_glauber,
}


def sampler_info(model: IsingModel) -> SamplerInfo:
    """Describe the sampler used for a model."""
    methods = {
        GraphFamily.EMPTY: "independent",
        GraphFamily.CHAIN: "markov-chain",
        GraphFamily.CHAIN_PBC: "chain-rejection",
        GraphFamily.COMPLETE: "magnetization-first",
        GraphFamily.CUSTOM: "glauber",
    }
    return SamplerInfo(method=methods[model.family], exact=model.family is not GraphFamily.CUSTOM)


def sample_batch(
    model: IsingModel,
    rng: np.random.Generator,
    size: int,
    glauber: Optional[GlauberOptions] = None,
) -> np.ndarray:
    """Draw ``size`` configurations as a (size, n) int8 array."""
    if size < 0:
        raise ConfigurationError(f"size must be non-negative, got {size}")
    if size == 0:
        return np.empty((0, model.n), dtype=np.int8)
    return SAMPLERS[model.family](model, rng, size, glauber=glauber)


def sample(model: IsingModel, rng: np.random.Generator, glauber: Optional[GlauberOptions] = None) -> SpinVector:
    """Draw one configuration from the prior.

    Exact for every family except CUSTOM, which runs Glauber dynamics.
    """
    return sample_batch(model, rng, 1, glauber=glauber)[0]


def sample_plus_counts(
    model: IsingModel,
    rng: np.random.Generator,
    size: int,
    glauber: Optional[GlauberOptions] = None,
) -> np.ndarray:
    """Number of +1 entries in each of ``size`` prior draws."""
    if model.is_exchangeable:
        return np.asarray(_exchangeable_plus_counts(model, rng, size), dtype=np.int64)
    x = sample_batch(model, rng, size, glauber=glauber)
    return np.count_nonzero(x > 0, axis=1).astype(np.int64)


def magnetization(x: Sequence[int]) -> Tuple[float, float]:
    """Return the sample average of the spins and its sqrt(n)-scaled version."""
    x = as_spin_vector(x)
    n = x.shape[0]
    mean = float(x.sum(dtype=np.int64)) / n
    return mean, math.sqrt(n) * mean

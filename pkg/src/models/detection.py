"""Binary symmetric channel, majority-vote detector and the detection error event."""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from src.models.ising import IsingModel, as_spin_vector, energy, log_partition_bruteforce
from src.shared.exceptions import ConfigurationError


def check_crossover(p: float) -> float:
    """Validate a crossover probability, requiring 0 < p < 1/2.

    Raises:
        ConfigurationError: If p is outside (0, 1/2)
    """
    if not (0.0 < p < 0.5):
        raise ConfigurationError(f"crossover probability must satisfy 0 < p < 1/2, got {p}")
    return float(p)


def check_odd(n: int) -> int:
    """Validate that the number of members is odd.

    Raises:
        ConfigurationError: If n is even or non-positive
    """
    if n < 1 or n % 2 == 0:
        raise ConfigurationError(f"n must be odd and positive so the majority is defined, got {n}")
    return n


@dataclass(frozen=True)
class NoiseChannel:
    """Binary symmetric channel with crossover probability p.

    ``epsilon = 0.5 * log((1 - p) / p)`` so that
    ``p = e^-eps / (e^eps + e^-eps)``.
    """

    p: float

    def __post_init__(self) -> None:
        check_crossover(self.p)

    @property
    def epsilon(self) -> float:
        return 0.5 * math.log((1.0 - self.p) / self.p)

    @classmethod
    def from_epsilon(cls, epsilon: float) -> "NoiseChannel":
        if not epsilon > 0:
            raise ConfigurationError(f"epsilon must be positive, got {epsilon}")
        # e^-eps / (e^eps + e^-eps) = 1 / (1 + e^{2 eps})
        return cls(1.0 / (1.0 + math.exp(2.0 * epsilon)))

    @property
    def flip_probability(self) -> float:
        """Crossover probability recomputed from epsilon."""
        eps = self.epsilon
        return math.exp(-eps) / (math.exp(eps) + math.exp(-eps))


def bsc_apply(x: Sequence[int], channel: NoiseChannel, rng: np.random.Generator) -> np.ndarray:
    """Flip each spin independently with probability ``channel.p``."""
    x = as_spin_vector(x)
    flips = rng.random(x.shape[0]) < channel.p
    return np.where(flips, -x, x).astype(np.int8)


def bsc_apply_counts(
    k: Union[int, np.ndarray], n: int, channel: NoiseChannel, rng: np.random.Generator
) -> np.ndarray:
    """Apply the channel to plus counts.

    Given k entries equal to +1 out of n, the observed plus count is
    ``k - B_plus + B_minus`` with B_plus ~ Bin(k, p) and B_minus ~ Bin(n - k, p).
    """
    k = np.asarray(k, dtype=np.int64)
    lost = rng.binomial(k, channel.p)
    gained = rng.binomial(n - k, channel.p)
    return k - lost + gained


def majority_sign(v: Sequence[int]) -> int:
    """Sign of the coordinate sum of a spin vector of odd length.

    Raises:
        ConfigurationError: If the length is even
    """
    v = as_spin_vector(v)
    check_odd(v.shape[0])
    return 1 if int(v.sum(dtype=np.int64)) > 0 else -1


def detect_error(x: Sequence[int], y: Sequence[int]) -> bool:
    """True iff the majority of ``y`` disagrees with the majority of ``x``.

    Raises:
        ConfigurationError: On length mismatch or even length
    """
    x = as_spin_vector(x)
    y = as_spin_vector(y)
    if x.shape != y.shape:
        raise ConfigurationError(f"length mismatch: x has {x.shape[0]}, y has {y.shape[0]}")
    return majority_sign(x) != majority_sign(y)


def log_joint_probability(
    model: IsingModel,
    channel: NoiseChannel,
    x: Sequence[int],
    y: Sequence[int],
    log_z: Optional[float] = None,
) -> float:
    """log p(x, y) of the prior followed by the channel.

    ``energy(x) - log Z + eps * y^T x - n log(2 cosh eps)``. ``log_z`` falls
    back to brute-force enumeration when not given.
    """
    x = as_spin_vector(x, model.n)
    y = as_spin_vector(y, model.n)
    if log_z is None:
        log_z = log_partition_bruteforce(model)
    eps = channel.epsilon
    overlap = float(np.dot(x.astype(np.int64), y))
    return energy(model, x) - log_z + eps * overlap - model.n * math.log(2.0 * math.cosh(eps))

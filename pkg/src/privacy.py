"""
Gaussian mechanism sizing, the single-bit randomizer, and shuffle
amplification accounting.

Each agent answers K pairwise queries; the local budget epsilon is split
evenly, so every answer is noised at epsilon / K. After shuffling, every
pair is answered by about n' = n / C(m, 2) anonymous agents and with K = 1
the curator's view satisfies (epsilon - ln n', delta)-DP.
"""

from dataclasses import dataclass
from enum import Enum
import logging
import math

import numpy as np
from scipy.stats import norm

from config import PRIVACY_CONFIG
from errors import InvalidArgumentError
from rankings import pair_count

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PrivacySpec:
    epsilon: float
    delta: float = PRIVACY_CONFIG["default_delta"]
    k_queries: int = 1
    sensitivity: float = PRIVACY_CONFIG["default_sensitivity"]

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidArgumentError(f"epsilon must be positive, got {self.epsilon}")
        if not 0 < self.delta < 1:
            raise InvalidArgumentError(f"delta must lie in (0, 1), got {self.delta}")
        if self.k_queries < 1:
            raise InvalidArgumentError(f"k_queries must be at least 1, got {self.k_queries}")
        if not self.sensitivity > 0:
            raise InvalidArgumentError(f"sensitivity must be positive, got {self.sensitivity}")

    @property
    def per_answer_epsilon(self):
        return self.epsilon / self.k_queries


class Amplification(Enum):
    """Whether the central bound holds, and if not, why"""

    APPLICABLE = "applicable"
    K_NOT_ONE = "k!=1"
    NO_AMPLIFICATION = "n'<=1"
    BUDGET_TOO_SMALL = "epsilon<=ln(n')"


@dataclass(frozen=True)
class PrivacyReport:
    sigma: float
    flip_probability: float
    epsilon_local: float
    epsilon_central: float = None
    n_prime: float = None
    status: Amplification = Amplification.K_NOT_ONE

    @property
    def applicable(self):
        return self.status is Amplification.APPLICABLE

    def as_dict(self):
        return {
            "sigma": self.sigma,
            "flip_probability": self.flip_probability,
            "epsilon_local": self.epsilon_local,
            "epsilon_central": self.epsilon_central,
            "n_prime": self.n_prime,
            "applicable": self.applicable,
            "reason": self.status.value,
        }


def gaussian_sigma(spec):
    """Noise scale for one answer: K * sensitivity * sqrt(2 ln(1.25 / delta)) / epsilon"""
    log_term = math.log(PRIVACY_CONFIG["gaussian_constant"] / spec.delta)
    return spec.k_queries * spec.sensitivity * math.sqrt(2 * log_term) / spec.epsilon


def flip_probability(sigma):
    """Probability that randomize_bit reports the opposite bit"""
    return float(norm.sf(PRIVACY_CONFIG["threshold"] / sigma))


def randomize_bit(bit, sigma, rng):
    """Add N(0, sigma^2) to the bit and threshold strictly above 0.5"""
    if not sigma > 0:
        raise InvalidArgumentError(f"sigma must be positive, got {sigma}")
    return 1 if bit + rng.normal(0.0, sigma) > PRIVACY_CONFIG["threshold"] else 0


def randomize_bits(bits, sigma, rng):
    """Vectorized randomize_bit over an array of bits, one normal draw per bit in order"""
    if not sigma > 0:
        raise InvalidArgumentError(f"sigma must be positive, got {sigma}")
    bits = np.asarray(bits, dtype=np.int64)
    noisy = bits + rng.normal(0.0, sigma, size=bits.shape)
    return (noisy > PRIVACY_CONFIG["threshold"]).astype(np.int64)


def _n_prime(n, m):
    if n < 1:
        raise InvalidArgumentError(f"n must be at least 1, got {n}")
    if m < 2:
        raise InvalidArgumentError(f"m must be at least 2, got {m}")
    return n / pair_count(m)


def amplification_report(spec, n, m):
    """Local and (when it holds) central guarantees of the shuffled protocol"""
    n_prime = _n_prime(n, m)
    sigma = gaussian_sigma(spec)
    base = dict(sigma=sigma, flip_probability=flip_probability(sigma), epsilon_local=spec.epsilon, n_prime=n_prime)

    if spec.k_queries != 1:
        status = Amplification.K_NOT_ONE
    elif n_prime <= 1:
        status = Amplification.NO_AMPLIFICATION
    elif spec.epsilon <= math.log(n_prime):
        status = Amplification.BUDGET_TOO_SMALL
    else:
        return PrivacyReport(**base, epsilon_central=spec.epsilon - math.log(n_prime), status=Amplification.APPLICABLE)

    logger.debug(f"Central bound not applicable: {status.value}")
    return PrivacyReport(**base, status=status)


def local_epsilon_for_central(target_central, delta, n, m, sensitivity=PRIVACY_CONFIG["default_sensitivity"]):
    """Single-query spec whose shuffled central guarantee is target_central"""
    if not target_central > 0:
        raise InvalidArgumentError(f"target epsilon must be positive, got {target_central}")
    if not 0 < delta < 1:
        raise InvalidArgumentError(f"delta must lie in (0, 1), got {delta}")
    n_prime = _n_prime(n, m)
    epsilon = target_central + math.log(n_prime) if n_prime > 1 else target_central
    logger.debug(f"Central epsilon {target_central} needs local epsilon {epsilon:.6f} (n'={n_prime:.3f})")
    return PrivacySpec(epsilon=epsilon, delta=delta, k_queries=1, sensitivity=sensitivity)

"""
Rankings, pairwise counts and Kendall tau metrics.

A Ranking stores a preference order: position 0 holds the most preferred
alternative. Alternatives are 0-based indices.
"""

from dataclasses import dataclass, field
from itertools import combinations
import logging

import numpy as np

from errors import InvalidArgumentError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Ranking:
    """A strict total order over m alternatives"""

    order: tuple
    position: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        order = tuple(int(a) for a in self.order)
        m = len(order)
        if m == 0:
            raise InvalidArgumentError("a ranking needs at least one alternative")
        if sorted(order) != list(range(m)):
            raise InvalidArgumentError(f"order {list(order)} is not a permutation of 0..{m - 1}")

        position = [0] * m
        for rank, alternative in enumerate(order):
            position[alternative] = rank

        object.__setattr__(self, "order", order)
        object.__setattr__(self, "position", tuple(position))

    @property
    def m(self):
        return len(self.order)

    @classmethod
    def identity(cls, m):
        return cls(tuple(range(m)))

    @classmethod
    def from_rank_vector(cls, ranks):
        """Build a ranking from 1-based rank indices, ranks[a] = rank of alternative a"""
        ranks = [int(x) for x in ranks]
        if sorted(ranks) != list(range(1, len(ranks) + 1)):
            raise InvalidArgumentError(f"rank vector {ranks} is not a permutation of 1..{len(ranks)}")
        order = [0] * len(ranks)
        for alternative, rank in enumerate(ranks):
            order[rank - 1] = alternative
        return cls(tuple(order))

    def rank_vector(self):
        """1-based rank of each alternative"""
        return tuple(p + 1 for p in self.position)

    def reverse(self):
        return Ranking(self.order[::-1])

    def __iter__(self):
        return iter(self.order)

    def __len__(self):
        return len(self.order)


@dataclass(frozen=True)
class PairwiseCounts:
    """m x m tally, counts[i][j] = number of answers asserting a_i over a_j"""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise InvalidArgumentError(f"counts must be a square matrix, got shape {counts.shape}")
        if np.any(np.diag(counts) != 0):
            raise InvalidArgumentError("counts[i][i] must be zero")
        if np.any(counts < 0):
            raise InvalidArgumentError("counts must be non-negative")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def m(self):
        return self.counts.shape[0]

    @property
    def total(self):
        return int(self.counts.sum())

    @classmethod
    def zeros(cls, m):
        return cls(np.zeros((m, m), dtype=np.int64))

    def __getitem__(self, index):
        return self.counts[index]


def _check_pair(m, i, j):
    if i == j:
        raise InvalidArgumentError(f"pair ({i}, {j}) compares an alternative with itself")
    if not (0 <= i < m and 0 <= j < m):
        raise InvalidArgumentError(f"pair ({i}, {j}) out of range for m={m}")


def _check_same_m(a, b):
    if a.m != b.m:
        raise InvalidArgumentError(f"rankings over different alternative counts ({a.m} vs {b.m})")


def pairwise_bit(r, i, j):
    """1 if alternative i precedes j in r, else 0"""
    _check_pair(r.m, i, j)
    return 1 if r.position[i] < r.position[j] else 0


def kendall_raw(a, b):
    """Number of alternative pairs ordered differently by a and b"""
    _check_same_m(a, b)
    discordant = 0
    for i, j in combinations(range(a.m), 2):
        if (a.position[i] < a.position[j]) != (b.position[i] < b.position[j]):
            discordant += 1
    return discordant


def pair_count(m):
    return m * (m - 1) // 2


def kendall_normalized(a, b):
    _check_same_m(a, b)
    if a.m < 2:
        return 0.0
    return kendall_raw(a, b) / pair_count(a.m)


def _check_profile(profile):
    if len(profile) == 0:
        raise InvalidArgumentError("profile is empty")
    m = profile[0].m
    for u, r in enumerate(profile):
        if r.m != m:
            raise InvalidArgumentError(f"ranking {u} has m={r.m}, expected {m}")
    return m


def average_kendall(r, profile):
    """Mean normalized Kendall distance from r to every ranking in the profile"""
    m = _check_profile(profile)
    if r.m != m:
        raise InvalidArgumentError(f"ranking has m={r.m}, profile has m={m}")
    return float(np.mean([kendall_normalized(r, p) for p in profile]))


def average_kendall_from_counts(r, counts, n):
    """
    Same value as average_kendall(r, profile) when counts = tally(profile).

    Each pair ordered i before j by r disagrees with exactly counts[j][i]
    agents, so the whole distance is read off the tally.
    """
    if n <= 0:
        raise InvalidArgumentError("agent count must be positive")
    if r.m < 2:
        return 0.0
    order = np.asarray(r.order)
    upper = np.triu_indices(r.m, k=1)
    disagreements = counts.counts[order[upper[1]], order[upper[0]]].sum()
    return float(disagreements) / (n * pair_count(r.m))


def tally(profile):
    """Full-information pairwise counts of a profile"""
    m = _check_profile(profile)
    positions = np.array([r.position for r in profile])
    # before[u, i, j] is True when agent u puts i ahead of j
    before = positions[:, :, None] < positions[:, None, :]
    counts = before.sum(axis=0)
    logger.debug(f"Tallied {len(profile)} rankings over {m} alternatives")
    return PairwiseCounts(counts)


def borda_scores(counts, subset=None):
    """Total pairwise wins of each alternative, restricted to subset if given"""
    if subset is None:
        return counts.counts.sum(axis=1).astype(float)
    members = sorted(subset)
    block = counts.counts[np.ix_(members, members)]
    return {a: float(s) for a, s in zip(members, block.sum(axis=1))}


def borda_ranking(counts):
    """Order alternatives by Borda score, ties to the lower index"""
    scores = borda_scores(counts)
    order = sorted(range(counts.m), key=lambda a: (-scores[a], a))
    return Ranking(tuple(order))

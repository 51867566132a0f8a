"""
Quicksort-style comparison baselines.

LDP-Kwiksort collects noisy answers exactly like the shuffled protocol and
sorts the tally with random pivots. LDP-Quicksort queries agents
interactively, only for the comparisons the current pivot needs, while a
ledger caps every agent at K answers.
"""

import logging
import math

import numpy as np

from errors import InvalidArgumentError
from privacy import gaussian_sigma, randomize_bits
from protocol import CollectionPipeline
from rankings import Ranking, pair_count

logger = logging.getLogger(__name__)


def _coin(rng):
    return bool(rng.random() < 0.5)


def random_pivot(items, rng):
    return items[int(rng.integers(len(items)))]


def kwiksort(counts, rng, choose_pivot=random_pivot):
    """Quicksort on the tally: a goes before pivot p iff counts[a][p] > counts[p][a]"""

    def sort(items):
        if len(items) <= 1:
            return list(items)
        pivot = choose_pivot(items, rng)
        before, after = [], []
        for a in items:
            if a == pivot:
                continue
            wins, losses = counts.counts[a, pivot], counts.counts[pivot, a]
            ahead = wins > losses if wins != losses else _coin(rng)
            (before if ahead else after).append(a)
        return sort(before) + [pivot] + sort(after)

    return Ranking(tuple(sort(list(range(counts.m)))))


def ldp_kwiksort(profile, spec, rng, k_queries=None):
    """Noisy collection (no shuffling needed by the curator) followed by Kwiksort"""
    k = spec.k_queries if spec is not None else k_queries
    counts = CollectionPipeline(spec, k, shuffle_answers=False).run(profile, rng)
    return kwiksort(counts, rng)


class BudgetLedger:
    """Remaining answers per agent"""

    def __init__(self, n, k):
        if k < 1:
            raise InvalidArgumentError(f"k must be at least 1, got {k}")
        self.k = k
        self.remaining = np.full(n, k, dtype=np.int64)

    def available(self):
        return np.flatnonzero(self.remaining > 0)

    def draw(self, limit, rng):
        """Pick up to limit distinct agents with budget left and charge each one answer"""
        pool = self.available()
        size = min(limit, len(pool))
        if size == 0:
            return np.empty(0, dtype=np.int64)
        agents = rng.choice(pool, size=size, replace=False)
        self.remaining[agents] -= 1
        return agents

    @property
    def spent(self):
        return int((self.k - self.remaining).sum())


class InteractiveQuicksort:
    """Quicksort that asks agents about (a, pivot) only when the comparison is needed"""

    def __init__(self, profile, spec, rng, k_queries=None):
        if len(profile) == 0:
            raise InvalidArgumentError("profile is empty")
        self.profile = profile
        self.m = profile[0].m
        self.rng = rng
        self.k = spec.k_queries if spec is not None else k_queries
        if self.k is None:
            raise InvalidArgumentError("k_queries is required without a privacy spec")
        self.sigma = gaussian_sigma(spec) if spec is not None else None
        self.ledger = BudgetLedger(len(profile), self.k)
        self.cap = math.ceil(len(profile) * self.k / pair_count(self.m))
        self.positions = np.array([r.position for r in profile])
        self.comparisons = 0

    def ask(self, a, pivot):
        """Majority of (noisy) answers to 'a over pivot?', coin when silent or tied"""
        agents = self.ledger.draw(self.cap, self.rng)
        self.comparisons += 1
        if len(agents) == 0:
            return _coin(self.rng)
        bits = (self.positions[agents, a] < self.positions[agents, pivot]).astype(np.int64)
        if self.sigma is not None:
            bits = randomize_bits(bits, self.sigma, self.rng)
        ones = int(bits.sum())
        zeros = len(bits) - ones
        if ones == zeros:
            return _coin(self.rng)
        return ones > zeros

    def sort(self, items):
        if len(items) <= 1:
            return list(items)
        pivot = random_pivot(items, self.rng)
        before, after = [], []
        for a in items:
            if a != pivot:
                (before if self.ask(a, pivot) else after).append(a)
        return self.sort(before) + [pivot] + self.sort(after)

    def run(self):
        ranking = Ranking(tuple(self.sort(list(range(self.m)))))
        logger.debug(f"Quicksort used {self.ledger.spent} answers over {self.comparisons} comparisons")
        return ranking


def ldp_quicksort(profile, spec, rng, k_queries=None):
    return InteractiveQuicksort(profile, spec, rng, k_queries).run()

"""
Simulation of the curator / agent / shuffler collection protocol.

The curator assigns every agent K distinct pairs, each agent answers with
Gaussian-noised thresholded bits, the shuffler groups answers per pair,
permutes each group and drops agent identities, and the curator tallies.
"""

from dataclasses import dataclass
from itertools import combinations
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from config import PROTOCOL_CONFIG
from errors import InvalidArgumentError
from privacy import gaussian_sigma, randomize_bits
from rankings import PairwiseCounts, pair_count

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class PairQuery:
    i: int
    j: int

    def __post_init__(self):
        if not 0 <= self.i < self.j:
            raise InvalidArgumentError(f"pair ({self.i}, {self.j}) is not canonical (need 0 <= i < j)")

    @property
    def pair(self):
        return (self.i, self.j)

    def check_within(self, m):
        if self.j >= m:
            raise InvalidArgumentError(f"pair ({self.i}, {self.j}) out of range for m={m}")


@dataclass(frozen=True)
class NoisyAnswer:
    """One reported bit, 1 meaning a_i over a_j for the canonical pair (i, j)"""

    pair: PairQuery
    bit: int
    agent_id: int = None

    def __post_init__(self):
        if self.bit not in (0, 1):
            raise InvalidArgumentError(f"answer bit must be 0 or 1, got {self.bit}")

    @classmethod
    def about(cls, a, b, bit, agent_id=None):
        """Answer to 'a over b?' stored on the canonical pair, complementing when a > b"""
        if a < b:
            return cls(PairQuery(a, b), int(bit), agent_id)
        return cls(PairQuery(b, a), 1 - int(bit), agent_id)


@dataclass(frozen=True)
class ShuffledBatch:
    """Per-pair anonymous bit sequences as released by the shuffler"""

    groups: dict

    def __post_init__(self):
        object.__setattr__(self, "groups", {pair: tuple(int(b) for b in bits) for pair, bits in self.groups.items()})

    def __len__(self):
        return sum(len(bits) for bits in self.groups.values())

    def pairs(self):
        return sorted(self.groups)

    def to_frame(self):
        rows = [(pair.i, pair.j, bit) for pair in self.pairs() for bit in self.groups[pair]]
        return pd.DataFrame(rows, columns=PROTOCOL_CONFIG["dump_columns"])


def all_pairs(m):
    return [PairQuery(i, j) for i, j in combinations(range(m), 2)]


def assign_queries(n, m, k, rng):
    """Each agent gets k distinct pairs drawn uniformly without replacement"""
    total = pair_count(m)
    if not 1 <= k <= total:
        raise InvalidArgumentError(f"k must lie in [1, {total}] for m={m}, got {k}")
    if n < 1:
        raise InvalidArgumentError(f"n must be at least 1, got {n}")

    pairs = all_pairs(m)
    # the first k columns of a random permutation per agent
    picks = np.argsort(rng.random((n, total)), axis=1)[:, :k]
    assignments = [tuple(pairs[p] for p in row) for row in picks]
    logger.debug(f"Assigned {k} queries to each of {n} agents over {total} pairs")
    return assignments


def collect(profile, assignments, spec, rng):
    """
    Agent-side collection: true pairwise bit, plus N(0, sigma^2), thresholded.

    spec=None collects truthful answers (no noise).
    """
    if len(assignments) != len(profile):
        raise InvalidArgumentError(f"{len(assignments)} assignments for {len(profile)} agents")
    m = profile[0].m if profile else 0

    agents, firsts, seconds = [], [], []
    for u, queries in enumerate(assignments):
        for query in queries:
            query.check_within(m)
            agents.append(u)
            firsts.append(query.i)
            seconds.append(query.j)
    if not agents:
        return []

    positions = np.array([r.position for r in profile])
    agents = np.asarray(agents)
    firsts = np.asarray(firsts)
    seconds = np.asarray(seconds)
    bits = (positions[agents, firsts] < positions[agents, seconds]).astype(np.int64)
    if spec is not None:
        bits = randomize_bits(bits, gaussian_sigma(spec), rng)

    answers = [
        NoisyAnswer(PairQuery(int(i), int(j)), int(b), int(u))
        for u, i, j, b in zip(agents, firsts, seconds, bits)
    ]
    logger.debug(f"Collected {len(answers)} answers from {len(profile)} agents")
    return answers


def group_answers(answers):
    """Group bits per pair in arrival order, dropping agent identities"""
    groups = {}
    for answer in answers:
        groups.setdefault(answer.pair, []).append(answer.bit)
    return ShuffledBatch(groups)


def shuffle(answers, rng):
    """Group per pair and apply an independent uniform permutation to each group"""
    grouped = group_answers(answers)
    groups = {}
    for pair in grouped.pairs():
        bits = np.asarray(grouped.groups[pair])
        groups[pair] = bits[rng.permutation(len(bits))]
    return ShuffledBatch(groups)


def tally_batch(batch, m):
    """Curator tally: 1-bits count for i over j, 0-bits for j over i"""
    counts = np.zeros((m, m), dtype=np.int64)
    for pair, bits in batch.groups.items():
        pair.check_within(m)
        ones = sum(bits)
        counts[pair.i, pair.j] += ones
        counts[pair.j, pair.i] += len(bits) - ones
    return PairwiseCounts(counts)


def tally_answers(answers, m):
    return tally_batch(group_answers(answers), m)


def save_batch(batch, path):
    """Write a shuffled batch as `pair_i,pair_j,bit` rows"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    batch.to_frame().to_csv(path, index=False)
    logger.info(f"Saved {len(batch)} shuffled answers to {path}")


class CollectionPipeline:
    """Assignment, collection, optional shuffling and tallying for one profile"""

    def __init__(self, spec, k_queries, shuffle_answers=True):
        if spec is not None and spec.k_queries != k_queries:
            raise InvalidArgumentError(f"spec splits its budget over {spec.k_queries} queries, pipeline asks {k_queries}")
        self.spec = spec
        self.k_queries = k_queries
        self.shuffle_answers = shuffle_answers
        self.last_batch = None

    def run(self, profile, rng, shuffle_rng=None):
        """Return the curator's PairwiseCounts for the profile"""
        m = profile[0].m
        assignments = assign_queries(len(profile), m, self.k_queries, rng)
        answers = collect(profile, assignments, self.spec, rng)

        if self.shuffle_answers:
            batch = shuffle(answers, shuffle_rng if shuffle_rng is not None else rng)
        else:
            batch = group_answers(answers)
        self.last_batch = batch

        counts = tally_batch(batch, m)
        if counts.total != len(profile) * self.k_queries:
            raise RuntimeError(f"tally holds {counts.total} answers, expected {len(profile) * self.k_queries}")
        logger.debug(f"Pipeline tallied {counts.total} answers (shuffle={self.shuffle_answers})")
        return counts

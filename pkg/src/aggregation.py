"""
Hierarchical rank aggregation over pairwise counts, and the exhaustive
Kemeny oracle.

Within a set of alternatives, the pairwise comparison matrix (PCM) is
thresholded into a 0 / 0.5 / 1 relation (PPR); an alternative's level
score is its row sum of wins. Alternatives are split into levels by
decreasing level score and every level is ranked recursively. When a set
cannot be split that way, a tie-break score promotes its maximizers:
net wins (RA) or Borda wins (HRA). Ascending index is the last resort.
"""

from dataclasses import dataclass
from itertools import permutations
import logging

import numpy as np

from config import AGGREGATION_CONFIG
from errors import InvalidArgumentError, UnsupportedSizeError
from rankings import Ranking, average_kendall, borda_scores, pair_count, tally

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class _SubsetMatrix:
    alternatives: tuple
    values: np.ndarray

    @property
    def m(self):
        return len(self.alternatives)

    def _index(self, alternative):
        try:
            return self.alternatives.index(alternative)
        except ValueError:
            raise InvalidArgumentError(f"alternative {alternative} not in {self.alternatives}")

    def __getitem__(self, key):
        i, j = key
        if i == j:
            raise InvalidArgumentError("entries are defined only for distinct alternatives")
        return float(self.values[self._index(i), self._index(j)])


class PreferenceMatrix(_SubsetMatrix):
    """PCM: M[i, j] = share of answers on {i, j} preferring i"""


class RelationMatrix(_SubsetMatrix):
    """PPR: D[i, j] in {0, 0.5, 1}"""


@dataclass(frozen=True)
class LevelAssignment:
    """Ordered partition, earlier groups are more preferred levels"""

    groups: tuple

    def __post_init__(self):
        groups = tuple(tuple(g) for g in self.groups)
        if any(len(g) == 0 for g in groups):
            raise InvalidArgumentError("levels must be non-empty")
        object.__setattr__(self, "groups", groups)

    def __len__(self):
        return len(self.groups)


def _members(counts, subset):
    if subset is None:
        return tuple(range(counts.m))
    members = tuple(sorted(set(subset)))
    if any(not 0 <= a < counts.m for a in members):
        raise InvalidArgumentError(f"subset {members} out of range for m={counts.m}")
    return members


def pcm_from_counts(counts, subset=None):
    members = _members(counts, subset)
    if len(members) < 2:
        raise InvalidArgumentError("a comparison matrix needs at least two alternatives")
    block = counts.counts[np.ix_(members, members)].astype(float)
    both = block + block.T
    with np.errstate(invalid="ignore", divide="ignore"):
        values = np.where(both > 0, block / both, 0.5)
    np.fill_diagonal(values, 0.5)
    values.setflags(write=False)
    return PreferenceMatrix(members, values)


def ppr_from_pcm(pcm):
    values = np.where(pcm.values > 0.5, 1.0, np.where(pcm.values < 0.5, 0.0, 0.5))
    np.fill_diagonal(values, 0.0)
    values.setflags(write=False)
    return RelationMatrix(pcm.alternatives, values)


def level_scores(relation):
    """Row sums of the relation (half-wins included)"""
    return dict(zip(relation.alternatives, relation.values.sum(axis=1).tolist()))


def level_assignment(relation):
    scores = level_scores(relation)
    distinct = sorted(set(scores.values()), reverse=True)
    groups = [tuple(a for a in relation.alternatives if scores[a] == s) for s in distinct]
    return LevelAssignment(tuple(groups))


def net_win_scores(counts, subset=None):
    """s(j) = sum over opponents i in subset of counts[j][i] - counts[i][j]"""
    members = _members(counts, subset)
    block = counts.counts[np.ix_(members, members)]
    net = (block - block.T).sum(axis=1)
    return {a: int(s) for a, s in zip(members, net)}


def _borda_tiebreak(counts, subset):
    return borda_scores(counts, subset)


def _hierarchical(counts, members, tiebreak):
    if len(members) == 1:
        return list(members)

    levels = level_assignment(ppr_from_pcm(pcm_from_counts(counts, members)))
    if len(levels) > 1:
        ranked = []
        for level in levels.groups:
            ranked.extend(_hierarchical(counts, level, tiebreak))
        return ranked

    scores = tiebreak(counts, members)
    best = max(scores.values())
    top = tuple(a for a in members if scores[a] == best)
    if len(top) == len(members):
        logger.debug(f"Index fallback on {members}")
        return list(members)

    rest = tuple(a for a in members if scores[a] != best)
    logger.debug(f"Tie-break promotes {top} over {rest}")
    return _hierarchical(counts, top, tiebreak) + _hierarchical(counts, rest, tiebreak)


def ra_aggregate(counts):
    """Hierarchical aggregation with the net-win tie-break"""
    order = _hierarchical(counts, tuple(range(counts.m)), net_win_scores)
    return Ranking(tuple(order))


def hra_aggregate(counts):
    """Hierarchical aggregation with the Borda tie-break"""
    order = _hierarchical(counts, tuple(range(counts.m)), _borda_tiebreak)
    return Ranking(tuple(order))


def kemeny_from_counts(counts):
    """
    Ranking minimizing total pairwise disagreement with counts.

    Orders are enumerated lexicographically and the first minimizer wins.
    """
    m = counts.m
    if m > AGGREGATION_CONFIG["kemeny_max_m"]:
        raise UnsupportedSizeError(f"exhaustive Kemeny search supports m <= {AGGREGATION_CONFIG['kemeny_max_m']}, got {m}")
    if m == 1:
        return Ranking((0,)), 0

    orders = np.array(list(permutations(range(m))), dtype=np.int64)
    cost = np.zeros(len(orders), dtype=np.int64)
    for p in range(m):
        for q in range(p + 1, m):
            cost += counts.counts[orders[:, q], orders[:, p]]
    best = int(np.argmin(cost))
    return Ranking(tuple(orders[best])), int(cost[best])


def kemeny_optimal(profile):
    """Kemeny optimal ranking of the profile and its average Kendall distance"""
    if len(profile) == 0:
        raise InvalidArgumentError("profile is empty")
    ranking, disagreements = kemeny_from_counts(tally(profile))
    logger.debug(f"Kemeny optimum {ranking.order} with {disagreements} of {len(profile) * pair_count(ranking.m)} disagreements")
    return ranking, average_kendall(ranking, profile)

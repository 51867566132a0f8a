import pytest
import numpy as np
import os
import sys
from hypothesis import assume, given
import hypothesis.strategies as st

# Add src directory to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from aggregation import ra_aggregate
from baselines import BudgetLedger, InteractiveQuicksort, kwiksort, ldp_kwiksort, ldp_quicksort
from errors import InvalidArgumentError
from privacy import PrivacySpec
from rankings import PairwiseCounts, Ranking, pair_count, tally
from strategies import count_matrices, rankings


def R(*order):
    return Ranking(tuple(order))


def cyclic_counts():
    return tally([R(0, 1, 2)] * 10 + [R(1, 2, 0)] * 20 + [R(2, 0, 1)] * 20)


def fixed_pivot(first):
    def choose(items, rng):
        return first if first in items else items[0]
    return choose


def has_transitive_majority(counts):
    m = counts.m
    wins = [sum(1 for j in range(m) if j != i and counts[i, j] > counts[j, i]) for i in range(m)]
    return sorted(wins) == list(range(m))


class TestKwiksort:
    """Test cases for tally-based Kwiksort"""

    def test_cyclic_depends_on_pivot(self):
        rng = np.random.default_rng(0)
        assert kwiksort(cyclic_counts(), rng, fixed_pivot(1)) == R(0, 1, 2)
        assert kwiksort(cyclic_counts(), rng, fixed_pivot(2)) == R(1, 2, 0)

    def test_two_alternatives(self):
        counts = PairwiseCounts([[0, 3], [1, 0]])
        for seed in range(5):
            assert kwiksort(counts, np.random.default_rng(seed)) == R(0, 1)

    @given(count_matrices(), st.integers(0, 2**32 - 1))
    def test_output_is_a_ranking(self, counts, seed):
        result = kwiksort(counts, np.random.default_rng(seed))
        assert sorted(result.order) == list(range(counts.m))

    def test_noiseless_unanimous(self):
        profile = [R(3, 0, 2, 1)] * 7
        result = ldp_kwiksort(profile, None, np.random.default_rng(1), k_queries=pair_count(4))
        assert result == R(3, 0, 2, 1)


class TestBudgetLedger:
    """Test cases for per-agent answer budgets"""

    def test_never_overspends(self):
        ledger = BudgetLedger(5, 2)
        rng = np.random.default_rng(3)
        drawn = []
        for _ in range(8):
            agents = ledger.draw(3, rng)
            assert len(set(agents.tolist())) == len(agents)
            drawn.extend(agents.tolist())
            assert np.all(ledger.remaining >= 0)
        assert ledger.spent == len(drawn) == 10
        assert len(ledger.draw(3, rng)) == 0
        assert len(ledger.available()) == 0

    def test_invalid_budget(self):
        with pytest.raises(InvalidArgumentError):
            BudgetLedger(3, 0)


class TestInteractiveQuicksort:
    """Test cases for the interactive LDP-Quicksort"""

    def test_single_agent_single_query(self):
        sorter = InteractiveQuicksort([R(2, 3, 0, 1)], PrivacySpec(epsilon=1.0), np.random.default_rng(4))
        result = sorter.run()
        assert sorted(result.order) == [0, 1, 2, 3]
        assert sorter.cap == 1
        assert sorter.ledger.spent <= 1

    def test_budget_respected(self):
        profile = [Ranking.identity(6)] * 30
        sorter = InteractiveQuicksort(profile, PrivacySpec(epsilon=1.0, k_queries=2), np.random.default_rng(5))
        sorter.run()
        assert sorter.ledger.spent <= 30 * 2
        assert np.all(sorter.ledger.remaining >= 0)

    def test_noiseless_unanimous(self):
        profile = [R(1, 3, 0, 2)] * 9
        result = ldp_quicksort(profile, None, np.random.default_rng(6), k_queries=pair_count(4))
        assert result == R(1, 3, 0, 2)

    def test_requires_query_count(self):
        with pytest.raises(InvalidArgumentError):
            InteractiveQuicksort([R(0, 1)], None, np.random.default_rng(0))

    def test_empty_profile(self):
        with pytest.raises(InvalidArgumentError):
            InteractiveQuicksort([], PrivacySpec(epsilon=1.0), np.random.default_rng(0))


class TestFullInformation:

    @given(st.integers(2, 6).flatmap(lambda m: st.lists(rankings(m), min_size=1, max_size=15)),
           st.integers(0, 2**32 - 1))
    def test_matches_ra_on_transitive_profiles(self, profile, seed):
        assume(len(profile) % 2 == 1)
        counts = tally(profile)
        assume(has_transitive_majority(counts))
        k = pair_count(profile[0].m)
        expected = ra_aggregate(counts)
        assert ldp_kwiksort(profile, None, np.random.default_rng(seed), k_queries=k) == expected
        assert ldp_quicksort(profile, None, np.random.default_rng(seed), k_queries=k) == expected


if __name__ == "__main__":
    pytest.main([__file__, "-v"])

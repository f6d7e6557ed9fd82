from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from core.errors import ParameterError
from core.fpos import OrderStatSpec, moments
from core.joint import (
    RankSet,
    conditional_lower_pmf,
    conditional_next_pmf,
    delta_vectors,
    dm_pmf,
    exact_joint_pmf,
    factorization_check,
    joint_pmf,
    sample_joint,
    summation_matrix,
    support_lattice,
)
from core.oracle import enumerate_joint_pmf, enumerate_pmf


def small_rank_sets(max_population, max_ranks):
    """Все наборы рангов размера <= max_ranks при N <= max_population"""
    for N in range(1, max_population + 1):
        for n in range(1, N + 1):
            for r in range(1, min(max_ranks, n) + 1):
                for ranks in combinations(range(1, n + 1), r):
                    yield RankSet(ranks, n, N)


class TestRankSet:
    @pytest.mark.parametrize("ranks, n, N", [((), 2, 3), ((2, 1), 2, 3), ((1, 3), 2, 3), ((1, 2), 3, 2)])
    def test_invalid(self, ranks, n, N):
        with pytest.raises(ParameterError):
            RankSet(ranks, n, N)

    def test_with_population(self):
        ranks = RankSet((1, 3), 4, 10).with_population(20)
        assert ranks.N == 20 and ranks.r == 2


class TestDeltas:
    def test_delta_vectors(self):
        deltas = delta_vectors((3, 7), RankSet((2, 4), 5, 10))
        assert deltas.dx.tolist() == [3, 4, 4]
        assert deltas.dk.tolist() == [2, 2, 2]
        assert deltas.dx.sum() == 11 and deltas.dk.sum() == 6
        assert deltas.is_supported

    def test_non_increasing_rejected(self):
        with pytest.raises(ParameterError):
            delta_vectors((4, 4), RankSet((1, 2), 2, 5))

    def test_length_mismatch(self):
        with pytest.raises(ParameterError):
            joint_pmf(RankSet((1, 2), 2, 5), (1, 2, 3))

    def test_summation_matrix(self):
        assert summation_matrix(2).matrix.tolist() == [[1, 0, 0], [1, 1, 0]]
        with pytest.raises(ParameterError):
            summation_matrix(0)


class TestJointPmf:
    def test_known_value(self):
        ranks = RankSet((1, 2), 2, 3)
        assert joint_pmf(ranks, (1, 3)) == pytest.approx(1 / 3)
        assert exact_joint_pmf(ranks, (1, 3)) == Fraction(1, 3)

    def test_ties_and_outside_support(self):
        ranks = RankSet((1, 2), 2, 5)
        assert joint_pmf(ranks, (2, 2)) == 0.0
        assert joint_pmf(ranks, (3, 2)) == 0.0
        assert joint_pmf(ranks, (1, 6)) == 0.0
        assert exact_joint_pmf(ranks, (2, 2)) == 0

    def test_single_rank_reduces_to_univariate(self):
        ranks = RankSet((3,), 5, 12)
        for x in range(3, 11):
            assert exact_joint_pmf(ranks, (x,)) == enumerate_pmf(OrderStatSpec(3, 5, 12))[x]

    @pytest.mark.parametrize("ranks, n, N", [((1, 2), 2, 5), ((2, 4), 5, 9), ((1, 3, 4), 4, 8), ((2, 3, 5), 6, 10)])
    def test_matches_oracle(self, ranks, n, N):
        rank_set = RankSet(ranks, n, N)
        table = enumerate_joint_pmf(rank_set)
        lattice = list(support_lattice(rank_set))
        assert sorted(lattice) == sorted(table)
        for point in lattice:
            assert exact_joint_pmf(rank_set, point) == table[point]
            assert joint_pmf(rank_set, point) == pytest.approx(float(table[point]), rel=1e-10)
            assert dm_pmf(rank_set, point) == pytest.approx(float(table[point]), rel=1e-10)

    def test_oracle_on_all_small_rank_sets(self):
        for rank_set in small_rank_sets(max_population=10, max_ranks=3):
            table = enumerate_joint_pmf(rank_set)
            for point in support_lattice(rank_set):
                assert exact_joint_pmf(rank_set, point) == table.pop(point)
            assert not table

    def test_dirichlet_multinomial_on_all_small_rank_sets(self):
        for rank_set in small_rank_sets(max_population=12, max_ranks=3):
            for point in support_lattice(rank_set):
                assert abs(dm_pmf(rank_set, point) - joint_pmf(rank_set, point)) <= 1e-12

    def test_normalization_large(self):
        rank_set = RankSet((3, 8, 12), 15, 40)
        total = sum(joint_pmf(rank_set, p) for p in support_lattice(rank_set))
        assert total == pytest.approx(1.0, abs=1e-10)


class TestConditional:
    def test_next_known_value(self):
        assert conditional_next_pmf(1, 1, 2, 2, 3, 3) == pytest.approx(0.5)

    def test_next_matches_oracle(self):
        n, N = 5, 9
        joint = enumerate_joint_pmf(RankSet((2, 4), n, N))
        marginal = enumerate_pmf(OrderStatSpec(2, n, N))
        for (x2, x4), p in joint.items():
            assert conditional_next_pmf(2, x2, 4, n, N, x4) == pytest.approx(float(p / marginal[x2]), rel=1e-10)

    def test_next_sums_to_one(self):
        total = sum(conditional_next_pmf(3, 10, 7, 12, 50, x) for x in range(1, 51))
        assert total == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("args", [(2, 3, 2, 5, 10, 4), (1, 9, 2, 5, 10, 10), (1, 1, 6, 5, 10, 7)])
    def test_next_invalid(self, args):
        with pytest.raises(ParameterError):
            conditional_next_pmf(*args)

    def test_lower_known_value(self):
        assert conditional_lower_pmf(RankSet((1, 2), 2, 3), (1, 3)) == pytest.approx(0.5)

    def test_lower_does_not_depend_on_population(self):
        ranks = RankSet((2, 3, 5), 6, 12)
        base = conditional_lower_pmf(ranks, (3, 5, 9))
        for N in (13, 20, 100, 10_000):
            assert conditional_lower_pmf(ranks.with_population(N), (3, 5, 9)) == base

    @pytest.mark.parametrize("ranks, n", [((1, 2), 3), ((2, 3, 5), 6), ((1, 4, 6), 8)])
    def test_lower_identical_over_lattice(self, ranks, n):
        small = RankSet(ranks, n, 20)
        large = small.with_population(200)
        points = list(support_lattice(small))
        assert len(points) > 10
        for point in points:
            assert conditional_lower_pmf(small, point) == conditional_lower_pmf(large, point)

    def test_lower_requires_two_ranks(self):
        with pytest.raises(ParameterError):
            conditional_lower_pmf(RankSet((2,), 3, 5), (2,))

    def test_factorization_known_value(self):
        lower, last = factorization_check(RankSet((1, 2), 2, 3), (1, 3))
        assert lower == pytest.approx(0.5)
        assert last == pytest.approx(2 / 3)

    @pytest.mark.parametrize("ranks, n, N", [((1, 3, 4), 5, 11), ((2, 5), 6, 20), ((1, 2, 6), 7, 15)])
    def test_factorization_reproduces_joint(self, ranks, n, N):
        rank_set = RankSet(ranks, n, N)
        for point in support_lattice(rank_set):
            lower, last = factorization_check(rank_set, point)
            assert abs(lower * last - joint_pmf(rank_set, point)) <= 1e-12
            assert lower == pytest.approx(conditional_lower_pmf(rank_set, point), rel=1e-10)

    def test_factorization_outside_support(self):
        assert factorization_check(RankSet((1, 2), 2, 5), (1, 1)) == (0.0, 0.0)


class TestSampleJoint:
    def test_shape_and_support(self, rng):
        ranks = RankSet((2, 5, 7), 8, 30)
        draws = sample_joint(ranks, rng, 20_000)
        assert draws.shape == (20_000, 3)
        assert np.all(np.diff(draws, axis=1) >= np.diff(ranks.ranks))
        assert draws[:, 0].min() >= 2 and draws[:, 2].max() <= 29

    def test_marginal_means(self, rng):
        ranks = RankSet((2, 5, 7), 8, 30)
        sims = 200_000
        draws = sample_joint(ranks, rng, sims)
        for column, k in enumerate(ranks.ranks):
            expected = moments(OrderStatSpec(k, 8, 30))
            tolerance = 5 * np.sqrt(expected.variance / sims)
            assert abs(draws[:, column].mean() - expected.mean) < tolerance

    def test_matches_oracle_frequencies(self, rng):
        ranks = RankSet((1, 3), 3, 6)
        sims = 200_000
        draws = sample_joint(ranks, rng, sims)
        points, counts = np.unique(draws, axis=0, return_counts=True)
        table = enumerate_joint_pmf(RankSet((1, 3), 3, 6))
        assert {tuple(p) for p in points.tolist()} == set(table)
        for point, count in zip(points.tolist(), counts):
            assert count / sims == pytest.approx(float(table[tuple(point)]), abs=0.01)

    def test_census(self, rng):
        draws = sample_joint(RankSet((1, 4), 4, 4), rng, 10)
        assert draws.tolist() == [[1, 4]] * 10

    def test_empty(self, rng):
        assert sample_joint(RankSet((1, 2), 2, 3), rng, 0).shape == (0, 2)

import numpy as np
import pytest
from scipy import stats

from core.errors import ParameterError
from core.fpos import OrderStatSpec, moments, pmf, pmf_table
from core.sampler import (
    Population,
    SimulationRequest,
    generalized_distribution,
    generalized_expectation,
    generalized_pmf,
    naive_sample_order_stats,
    parse_ranks,
    sample_order_stats,
    sample_order_stats_sharded,
)

TIED = Population(np.array([7.0, 5.0, 5.0]))


class TestPopulation:
    def test_sorted_and_read_only(self):
        assert TIED.values.tolist() == [5.0, 5.0, 7.0]
        with pytest.raises(ValueError):
            TIED.values[0] = 1.0

    @pytest.mark.parametrize("values", [[], [1.0, float("nan")], [float("inf")]])
    def test_invalid(self, values):
        with pytest.raises(ParameterError):
            Population(np.asarray(values))

    def test_omega_inverse(self):
        assert TIED.omega_inverse(5.0) == (1, 2)
        assert TIED.omega_inverse(7.0) == (3, 3)
        assert TIED.omega_inverse(6.0) == (0, -1)

    def test_from_file(self, tmp_path):
        path = tmp_path / "population.txt"
        path.write_text("3\n1.5\n\n2\n", encoding="utf-8")
        assert Population.from_file(path).values.tolist() == [1.5, 2.0, 3.0]

    def test_from_file_bad_line(self, tmp_path):
        path = tmp_path / "population.txt"
        path.write_text("1\nabc\n", encoding="utf-8")
        with pytest.raises(ParameterError) as info:
            Population.from_file(path)
        assert info.value.details["line"] == 2


class TestSimulationRequest:
    @pytest.mark.parametrize("size, ranks, sims", [
        (0, (1,), 10), (4, (1,), 10), (2, (), 10), (2, (1, 1), 10), (2, (3,), 10), (2, (1,), -1),
    ])
    def test_invalid(self, size, ranks, sims):
        with pytest.raises(ParameterError):
            SimulationRequest(TIED, size, ranks, sims)

    def test_caller_order(self):
        req = SimulationRequest(Population.identity(10), 5, (5, 1, 3), 1)
        assert req.rank_set.ranks == (1, 3, 5)
        assert req.caller_order.tolist() == [2, 0, 1]

    def test_parse_ranks(self):
        assert parse_ranks("1,5,3") == (1, 5, 3)
        assert parse_ranks([2, 4]) == (2, 4)
        with pytest.raises(ParameterError):
            parse_ranks("1,x")


class TestSampleOrderStats:
    def test_minimum_of_tied_population(self, rng):
        draws = sample_order_stats(SimulationRequest(TIED, 2, (1,), 1000), rng)
        assert np.all(draws == 5.0)

    def test_maximum_of_tied_population(self, rng):
        sims = 100_000
        draws = sample_order_stats(SimulationRequest(TIED, 2, (2,), sims), rng)
        assert np.mean(draws == 7.0) == pytest.approx(2 / 3, abs=0.01)

    def test_caller_order_preserved(self, rng):
        draws = sample_order_stats(SimulationRequest(Population.identity(30), 10, (8, 2), 1000), rng)
        assert draws.shape == (1000, 2)
        assert np.all(draws[:, 0] > draws[:, 1])

    def test_identity_population_matches_pmf(self, rng):
        spec = OrderStatSpec(3, 6, 15)
        sims = 100_000
        draws = sample_order_stats(SimulationRequest(Population.identity(15), 6, (3,), sims), rng)
        xs, masses = pmf_table(spec)
        observed = np.bincount(draws[:, 0].astype(int) - spec.lower, minlength=xs.size)
        assert stats.chisquare(observed, masses * sims).pvalue > 0.001

    def test_census(self, rng):
        population = Population(np.array([4.0, 1.0, 3.0]))
        req = SimulationRequest(population, 3, (1, 2, 3), 5)
        for method in (sample_order_stats, naive_sample_order_stats):
            assert method(req, rng).tolist() == [[1.0, 3.0, 4.0]] * 5

    def test_zero_sims(self, rng):
        req = SimulationRequest(Population.identity(10), 4, (1, 2), 0)
        assert sample_order_stats(req, rng).shape == (0, 2)
        assert naive_sample_order_stats(req, rng).shape == (0, 2)


class TestNaiveSampler:
    def test_matches_pmf(self, rng):
        spec = OrderStatSpec(2, 4, 12)
        sims = 100_000
        draws = naive_sample_order_stats(SimulationRequest(Population.identity(12), 4, (2,), sims), rng)
        xs, masses = pmf_table(spec)
        observed = np.bincount(draws[:, 0].astype(int) - spec.lower, minlength=xs.size)
        assert stats.chisquare(observed, masses * sims).pvalue > 0.001

    def test_two_samplers_agree(self):
        req = SimulationRequest(Population.identity(40), 20, (15, 3), 100_000)
        fast = sample_order_stats(req, np.random.default_rng(1))
        naive = naive_sample_order_stats(req, np.random.default_rng(2))
        for column in range(2):
            values = np.union1d(fast[:, column], naive[:, column])
            table = np.array([
                [np.sum(fast[:, column] == v) for v in values],
                [np.sum(naive[:, column] == v) for v in values],
            ])
            table = table[:, table.min(axis=0) >= 5]
            assert stats.chi2_contingency(table).pvalue > 0.001


class TestSharded:
    def test_independent_of_thread_count(self):
        req = SimulationRequest(Population.identity(50), 10, (2, 9), 25_000)
        single = sample_order_stats_sharded(req, seed=11, shard_size=4_000, threads=1)
        multi = sample_order_stats_sharded(req, seed=11, shard_size=4_000, threads=4)
        np.testing.assert_array_equal(single, multi)
        assert single.shape == (25_000, 2)

    def test_mean(self):
        req = SimulationRequest(Population.identity(50), 10, (4,), 50_000)
        draws = sample_order_stats_sharded(req, seed=3, shard_size=10_000, threads=2)
        expected = moments(OrderStatSpec(4, 10, 50))
        assert abs(draws.mean() - expected.mean) < 5 * np.sqrt(expected.variance / 50_000)

    def test_empty(self):
        req = SimulationRequest(Population.identity(5), 2, (1,), 0)
        assert sample_order_stats_sharded(req, seed=1).shape == (0, 1)


class TestGeneralized:
    def test_tied_population(self):
        assert generalized_pmf(TIED, 2, 2, 7.0) == pytest.approx(2 / 3)
        assert generalized_pmf(TIED, 1, 2, 5.0) == pytest.approx(1.0)
        assert generalized_pmf(TIED, 1, 2, 6.0) == 0.0

    def test_distribution(self):
        table = generalized_distribution(TIED, 2, 2)
        assert list(table) == [5.0, 7.0]
        assert table[5.0] == pytest.approx(1 / 3)
        assert sum(table.values()) == pytest.approx(1.0)

    def test_distinct_values_reduce_to_pmf(self):
        population = Population(np.array([0.5, 2.0, 3.5, 10.0, 11.0]))
        spec = OrderStatSpec(2, 3, 5)
        for rank, value in enumerate(population.values, 1):
            assert generalized_pmf(population, 2, 3, value) == pytest.approx(pmf(spec, rank))

    def test_expectation(self):
        assert generalized_expectation(TIED, 2, 2, lambda z: z) == pytest.approx(19 / 3)
        assert generalized_expectation(TIED, 1, 2, lambda z: 4.0) == pytest.approx(4.0)
        assert generalized_expectation(Population.identity(9), 3, 4, lambda z: z) == pytest.approx(6.0)

from fractions import Fraction

import pytest

from core.errors import ImpossibleObservationError, ParameterError
from core.fpos import OrderStatSpec
from core.oracle import enumerate_pmf
from core.tank import (
    asymptotic_variance_from_max,
    consistency_study,
    estimate_from_kth,
    estimate_from_max,
    estimate_from_sample,
    estimator_variance,
)


class TestEstimators:
    def test_from_max(self):
        result = estimate_from_max(4, 60)
        assert result.estimate == pytest.approx(74)
        assert result.rounded == 74
        assert result.standard_error is None

    @pytest.mark.parametrize("N", [1, 7, 30])
    def test_census_recovers_population(self, N):
        assert estimate_from_max(N, N).estimate == pytest.approx(N)

    def test_from_kth(self):
        result = estimate_from_kth(2, 2, 5)
        assert result.estimate == 6.5
        assert result.rounded == 7
        assert result.to_dict() == {"estimate": 6.5, "k": 2, "n": 2}

    def test_standard_error_at_population(self):
        result = estimate_from_kth(2, 2, 4, N=5)
        assert result.standard_error == pytest.approx(1.5)
        assert result.to_dict()["variance_at"] == 5.0

    def test_plug_in_standard_error(self):
        result = estimate_from_kth(2, 2, 5, plug_in=True)
        assert result.variance_at == 6.5
        assert result.standard_error == pytest.approx((7.5 * 4.5 / 4 * 0.5) ** 0.5)

    def test_impossible_observations(self):
        with pytest.raises(ImpossibleObservationError):
            estimate_from_kth(5, 3, 2)
        with pytest.raises(ImpossibleObservationError):
            estimate_from_kth(5, 3, 9, N=10)

    def test_invalid_rank(self):
        with pytest.raises(ParameterError):
            estimate_from_kth(3, 4, 10)

    def test_from_sample(self):
        assert estimate_from_sample([3, 12, 7]).estimate == pytest.approx(15)
        with pytest.raises(ParameterError):
            estimate_from_sample([3, 3])
        with pytest.raises(ParameterError):
            estimate_from_sample([])
        with pytest.raises(ImpossibleObservationError):
            estimate_from_sample([0, 4])


class TestUnbiasedness:
    @pytest.mark.parametrize("k, n, N", [(2, 2, 5), (1, 2, 5), (2, 4, 9), (3, 5, 12), (4, 4, 4)])
    def test_mean_and_variance_over_all_subsets(self, k, n, N):
        table = enumerate_pmf(OrderStatSpec(k, n, N))
        estimates = {x: Fraction(n + 1, k) * x - 1 for x in table}
        mean = sum(p * estimates[x] for x, p in table.items())
        variance = sum(p * (estimates[x] - mean) ** 2 for x, p in table.items())
        assert mean == N
        assert float(variance) == pytest.approx(estimator_variance(N, n, k))

    @pytest.mark.parametrize("N, n, k, expected", [(5, 2, 2, 2.25), (5, 2, 1, 9.0), (6, 6, 6, 0.0)])
    def test_variance_values(self, N, n, k, expected):
        assert estimator_variance(N, n, k) == pytest.approx(expected)

    def test_asymptotic_variance(self):
        assert asymptotic_variance_from_max(0.5) == 2.0
        assert asymptotic_variance_from_max(1.0) == 0.0
        with pytest.raises(ParameterError):
            asymptotic_variance_from_max(0.0)

    def test_variance_from_max_approaches_limit(self):
        N, lam = 100_000, 0.25
        n = int(lam * N)
        assert estimator_variance(N, n, n) == pytest.approx(asymptotic_variance_from_max(lam), rel=0.01)


class TestConsistencyStudy:
    def test_empty(self):
        assert consistency_study(0.5, 0.5, [100, 1000], sims=0) == []

    def test_negative_sims(self):
        with pytest.raises(ParameterError):
            consistency_study(0.5, 0.5, [100], sims=-1)

    def test_unbiased_and_concentrating(self):
        rows = consistency_study(0.5, 0.5, [100, 1000, 10_000], sims=10_000, seed=2024)
        assert [row.N for row in rows] == [100, 1000, 10_000]
        for row in rows:
            assert abs(row.mean_ratio - 1) < 4 * row.standard_error
        sds = [row.sd_ratio for row in rows]
        assert sds[0] > sds[1] > sds[2]

    def test_independent_of_thread_count(self):
        single = consistency_study(0.3, 0.7, [50, 500], sims=2000, seed=5, threads=1)
        multi = consistency_study(0.3, 0.7, [50, 500], sims=2000, seed=5, threads=2)
        assert single == multi

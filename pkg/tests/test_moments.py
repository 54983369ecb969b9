import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from distanova.core import gower_center, gower_center_weighted, group_projector
from distanova.distances import pairwise_matrix
from distanova.errors import DegenerateDistributionError, SampleSizeError
from distanova.moments import (
    MIN_APPROX_N,
    ExactMoments,
    MonteCarloConfig,
    enumerate_B,
    enumerated_moments,
    mean_variance,
    monte_carlo_skewness,
    perm_moments,
    skewness,
    trace_quantities,
)

from datasets import MIXED6_LABELS, MIXED6_Y, UNEVEN7_LABELS, UNEVEN7_Y

# Brute-force moments over all N! relabellings, computed with itertools and mpmath.
ENUMERATED = [
    # (data, labels, mu, variance, skewness)
    (np.array([0.0, 1.0, 2.0, 3.0]), [0, 0, 1, 1], 1.6666666666666667, 2.8888888888888889, 0.52800497921818778),
    (MIXED6_Y, MIXED6_LABELS, 3.7606666666666673, 2.7049306666666678, 0.51713008565950101),
    (UNEVEN7_Y, UNEVEN7_LABELS, 8.1123809523809541, 38.282688435374166, 0.44424528799172039),
]


def parts(y, labels):
    return group_projector(labels), gower_center(pairwise_matrix(y, "euclidean"))


class TestTraceQuantities:
    def test_zero_projector(self, line4_parts):
        gower, _, _ = line4_parts
        q = trace_quantities(np.zeros((4, 4)), gower)
        assert (q.a1, q.a2, q.a3) == (0.0, 0.0, 0.0)

    def test_two_singletons(self):
        q = trace_quantities(group_projector([0, 1]), gower_center(np.array([[0.0, 2.0], [2.0, 0.0]])))
        assert (q.a1, q.a2, q.a3) == pytest.approx((1.0, 1.0, 0.5))
        assert q.b1 == pytest.approx(2.0)

    def test_orderings(self, rng):
        h, g = parts(rng.normal(size=(9, 2)), rng.integers(0, 3, size=9))
        q = trace_quantities(h, g)
        assert q.a2 >= q.a3 >= 0
        assert q.b2 >= q.b3 >= 0


class TestMeanVariance:
    @pytest.mark.parametrize("y, labels, mu, var, gamma", ENUMERATED)
    def test_against_brute_force(self, y, labels, mu, var, gamma):
        h, g = parts(y, labels)
        m, v = mean_variance(trace_quantities(h, g), len(labels))
        assert m == pytest.approx(mu, rel=1e-12)
        assert v == pytest.approx(var, rel=1e-12)

    def test_single_group(self, line4_parts):
        gower, _, _ = line4_parts
        mu, var = mean_variance(trace_quantities(np.zeros((4, 4)), gower), 4)
        assert (mu, var) == (0.0, 0.0)

    def test_sample_size_guards(self, line4_parts):
        gower, h, _ = line4_parts
        with pytest.raises(SampleSizeError):
            mean_variance(trace_quantities(h, gower), 4, min_n=MIN_APPROX_N)
        with pytest.raises(SampleSizeError):
            mean_variance(trace_quantities(h[:3, :3], gower[:3, :3]), 3)


class TestSkewness:
    @pytest.mark.parametrize("y, labels, mu, var, gamma", ENUMERATED)
    def test_enumerated_and_closed_form(self, y, labels, mu, var, gamma):
        h, g = parts(y, labels)
        enum = enumerated_moments(h, g)
        assert (enum.mu, enum.sigma2, enum.gamma) == pytest.approx((mu, var, gamma), rel=1e-12)
        assert skewness(h, g, "closed_form") == pytest.approx(gamma, rel=1e-10)

    def test_monte_carlo_within_three_standard_errors(self, line4_parts):
        gower, h, _ = line4_parts
        mc = monte_carlo_skewness(h, gower, MonteCarloConfig(n_perm=1_000_000, seed=11))
        assert abs(mc.gamma - ENUMERATED[0][4]) <= 3 * mc.std_error

    def test_monte_carlo_reproducible(self, line4_parts):
        gower, h, _ = line4_parts
        a = monte_carlo_skewness(h, gower, MonteCarloConfig(n_perm=5000, seed=3))
        b = monte_carlo_skewness(h, gower, MonteCarloConfig(n_perm=5000, seed=3))
        assert a.gamma == b.gamma

    def test_equidistant_points_are_degenerate(self):
        delta = 1.0 - np.eye(5)
        with pytest.raises(DegenerateDistributionError):
            perm_moments(group_projector([0, 0, 1, 1, 1]), gower_center(delta))

    def test_euclidean_vectors_are_right_skewed(self, rng):
        for _ in range(5):
            y = rng.normal(size=(30, 3))
            h, g = parts(y, np.repeat([0, 1], 15))
            assert skewness(h, g) > 0

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000), st.floats(0.1, 50.0))
    def test_scale_and_relabel_invariance(self, seed, c):
        rng = np.random.default_rng(seed)
        y = rng.normal(size=(8, 2))
        labels = np.array([0, 0, 0, 1, 1, 2, 2, 2])
        base = perm_moments(*parts(y, labels))
        scaled = perm_moments(group_projector(labels), gower_center(c * pairwise_matrix(y, "euclidean")))
        assert scaled.mu == pytest.approx(c * c * base.mu, rel=1e-10)
        assert scaled.sigma == pytest.approx(c * c * base.sigma, rel=1e-10)
        assert scaled.gamma == pytest.approx(base.gamma, rel=1e-8, abs=1e-10)
        perm = rng.permutation(8)
        moved = perm_moments(*parts(y[perm], labels[perm]))
        assert moved.gamma == pytest.approx(base.gamma, rel=1e-8, abs=1e-10)


class TestExactMoments:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000), st.integers(4, 7))
    def test_third_moment_matches_enumeration(self, seed, n):
        rng = np.random.default_rng(seed)
        labels = rng.permutation(np.concatenate([[0, 1], rng.integers(0, 3, size=n - 2)]))
        h, g = parts(rng.normal(size=(n, 2)), labels)
        values = enumerate_B(h, g)
        third = np.mean((values - values.mean()) ** 3)
        scale = np.mean((values - values.mean()) ** 2) ** 1.5
        assert ExactMoments(h).central(g, 3) == pytest.approx(third, abs=1e-9 * scale)

    def test_weighted_patterns_match_full(self, rng):
        patterns = rng.normal(size=(6, 2))
        weights = np.array([2, 1, 3, 1, 2, 1])
        rows = np.repeat(np.arange(6), weights)
        labels = rng.permutation(np.repeat([0, 1], [5, 5]))
        h = group_projector(labels)
        g_full = gower_center(pairwise_matrix(patterns[rows], "euclidean"))
        g_unique = gower_center_weighted(pairwise_matrix(patterns, "euclidean"), weights)
        exact = ExactMoments(h)
        assert exact.central_weighted(g_unique, weights, 3) == pytest.approx(exact.central(g_full, 3), rel=1e-10)


class TestEnumeration:
    def test_two_samples(self):
        values = enumerate_B(group_projector([0, 1]), gower_center(np.array([[0.0, 1.0], [1.0, 0.0]])))
        assert values.size == 2
        assert values[0] == pytest.approx(values[1])

    def test_three_samples_three_distinct(self):
        y = np.array([0.0, 1.0, 3.0])
        values = enumerate_B(group_projector([0, 1, 1]), gower_center(pairwise_matrix(y, "euclidean")))
        assert values.size == 6
        assert np.unique(np.round(values, 12)).size == 3

    def test_refuses_large_n(self):
        with pytest.raises(SampleSizeError):
            enumerate_B(np.zeros((10, 10)), np.zeros((10, 10)))

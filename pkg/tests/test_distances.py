import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from distanova.classical import pillai_from_dbf, pillai_trace
from distanova.core import dbf
from distanova.distances import (
    FUNCTIONAL_MEASURES,
    GENETIC_MEASURES,
    VECTOR_MEASURES,
    CurveSet,
    _hamman_from_matches,
    canonical_measure,
    functional_distance,
    genetic_distance,
    genetic_matrices,
    hamman_distances,
    mahalanobis_metric,
    pairwise_matrix,
    second_derivative,
    vector_distance,
)
from distanova.errors import DimensionMismatchError, SingularMetricError

MATCHING = ("ibs", "simple_matching", "sokal_sneath", "rogers_tanimoto1")

genotype_rows = arrays(np.int8, st.integers(1, 12), elements=st.integers(0, 2))


class TestVectorDistances:
    @pytest.mark.parametrize("measure", VECTOR_MEASURES)
    def test_identity(self, measure):
        a = np.array([1.5, -2.0, 0.0])
        assert vector_distance(a, a, measure) == 0.0

    def test_hand_values(self):
        a, b = [0.0, 0.0], [3.0, 4.0]
        assert vector_distance(a, b, "euclidean") == 5.0
        assert vector_distance(a, b, "manhattan") == 7.0
        assert vector_distance(a, b, "maximum") == 4.0

    def test_bray_curtis(self):
        assert vector_distance([1.0, 0.0], [0.0, 1.0], "bray_curtis") == 1.0
        assert vector_distance([0.0, 0.0], [0.0, 0.0], "bray_curtis") == 0.0

    def test_canberra_zero_terms(self):
        assert vector_distance([0.0, 1.0], [0.0, 3.0], "canberra") == pytest.approx(0.5)

    def test_absolute_values_for_abundance_measures(self):
        assert vector_distance([-1.0, 2.0], [1.0, 2.0], "bray_curtis") == 0.0

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            vector_distance([1.0], [1.0, 2.0], "euclidean")

    @pytest.mark.parametrize("measure", VECTOR_MEASURES)
    def test_matrix_matches_kernel(self, rng, measure):
        y = rng.normal(size=(7, 3))
        y[2] = 0.0
        y[3] = 0.0
        d = pairwise_matrix(y, measure)
        for i in range(7):
            for j in range(7):
                assert d[i, j] == pytest.approx(vector_distance(y[i], y[j], measure), abs=1e-12)

    def test_scalar_line(self):
        d = pairwise_matrix(np.array([0.0, 1.0, 2.0, 3.0]), "euclidean")
        assert d[np.triu_indices(4, 1)].tolist() == [1.0, 2.0, 3.0, 1.0, 2.0, 1.0]

    def test_single_sample(self):
        np.testing.assert_array_equal(pairwise_matrix(np.array([[1.0, 2.0]]), "euclidean"), [[0.0]])


class TestGeneticDistances:
    def test_opposite_homozygotes(self):
        for m in MATCHING:
            assert genetic_distance([0, 0], [2, 2], m) == 1.0

    def test_hand_values(self):
        a, b = [1, 2], [1, 0]
        assert genetic_distance(a, b, "ibs") == pytest.approx(0.5)
        assert genetic_distance(a, b, "simple_matching") == pytest.approx(0.5)
        assert genetic_distance(a, b, "sokal_sneath") == pytest.approx(1 / 3)
        assert genetic_distance(a, b, "rogers_tanimoto1") == pytest.approx(2 / 3)

    def test_invalid_genotype(self):
        with pytest.raises(ValueError):
            genetic_distance([0, 3], [0, 1], "ibs")

    def test_aliases(self):
        assert canonical_measure("rti") == "rogers_tanimoto1"
        assert canonical_measure("SS") == "sokal_sneath"
        with pytest.raises(ValueError):
            canonical_measure("cosine")

    @settings(max_examples=100, deadline=None)
    @given(st.data())
    def test_range_symmetry_identity(self, data):
        a = data.draw(genotype_rows)
        b = data.draw(arrays(np.int8, a.size, elements=st.integers(0, 2)))
        for m in MATCHING:
            d = genetic_distance(a, b, m)
            assert 0.0 <= d <= 1.0
            assert d == genetic_distance(b, a, m)
            assert genetic_distance(a, a, m) == 0.0
        all_opposite = bool(np.all(np.abs(a.astype(int) - b.astype(int)) == 2))
        assert (genetic_distance(a, b, "ibs") == 1.0) == all_opposite

    def test_matrices_match_kernels(self, rng):
        w = rng.integers(0, 3, size=(9, 5)).astype(np.int8)
        mats = genetic_matrices(w, GENETIC_MEASURES)
        for m in MATCHING:
            for i in range(9):
                for j in range(9):
                    assert mats[m][i, j] == pytest.approx(genetic_distance(w[i], w[j], m), abs=1e-15)
        np.testing.assert_allclose(mats["hamman1"], hamman_distances(w))


class TestHamman:
    def test_identical_subjects(self):
        np.testing.assert_array_equal(hamman_distances(np.ones((4, 3), dtype=np.int8)), np.zeros((4, 4)))

    def test_two_subjects(self, rng):
        w = rng.integers(0, 3, size=(2, 6))
        assert hamman_distances(w)[0, 1] == 0.0

    def test_normalisation_example(self):
        # Pair similarities (1, 0, -1) for pairs (1,2), (1,3), (2,3) with P = 2.
        matches = np.array([[2.0, 2.0, 1.0], [2.0, 2.0, 0.0], [1.0, 0.0, 2.0]])
        d = _hamman_from_matches(matches, 2)
        assert [d[0, 1], d[0, 2], d[1, 2]] == pytest.approx([0.0, 0.5, 1.0])

    def test_range_and_closest_pair(self, rng):
        d = hamman_distances(rng.integers(0, 3, size=(10, 5)))
        iu = np.triu_indices(10, 1)
        assert d[iu].min() == 0.0
        assert d.max() <= 1.0

    def test_weighted_patterns_match_expanded_cohort(self, rng):
        patterns = np.array([[0, 1, 2], [2, 2, 0], [1, 1, 1], [0, 0, 2]], dtype=np.int8)
        weights = np.array([1, 3, 1, 2])
        full = hamman_distances(np.repeat(patterns, weights, axis=0))
        packed = genetic_matrices(patterns, ["hamman1"], weights)["hamman1"]
        rows = np.repeat(np.arange(4), weights)
        np.testing.assert_allclose(packed[np.ix_(rows, rows)], full, atol=1e-15)


class TestFunctionalDistances:
    grid = np.linspace(0.0, 1.0, 11)

    @pytest.mark.parametrize("measure", FUNCTIONAL_MEASURES)
    def test_identity(self, measure):
        c = np.sin(3 * self.grid)
        assert functional_distance(c, c, self.grid, measure) == 0.0

    def test_constant_curves(self):
        zero, one = np.zeros(11), np.ones(11)
        assert functional_distance(zero, one, self.grid, "l2") == pytest.approx(1.0)
        assert functional_distance(zero, one, self.grid, "curvature") == pytest.approx(0.0)

    def test_visual_shape_invariance(self):
        c = np.sin(3 * self.grid) + self.grid**2
        assert functional_distance(c, 2.5 * c - 4.0, self.grid, "visual_l2") == pytest.approx(0.0, abs=1e-12)

    def test_visual_symmetric(self, rng):
        a, b = rng.normal(size=(2, 11))
        assert functional_distance(a, b, self.grid, "visual_l2") == pytest.approx(
            functional_distance(b, a, self.grid, "visual_l2"), rel=1e-14
        )

    def test_second_derivative_of_quadratic(self):
        t = np.array([0.0, 0.3, 0.5, 1.0, 1.6, 2.0])
        np.testing.assert_allclose(second_derivative(3 * t**2 - t, t), 6.0, rtol=1e-12)

    def test_curvature_of_quadratic(self):
        t = np.linspace(0, 2, 21)
        # int_0^2 (6)^2 dt = 72 against a straight line.
        assert functional_distance(3 * t**2, t, t, "curvature") == pytest.approx(72.0)

    def test_l2_converges_quadratically(self):
        def l2(m):
            t = np.linspace(0, 1, m)
            return functional_distance(np.exp(t), np.zeros(m), t, "l2")

        exact = np.sqrt((np.e**2 - 1) / 2)
        err_coarse, err_fine = abs(l2(21) - exact), abs(l2(41) - exact)
        assert err_fine < err_coarse / 3.5

    def test_grid_checks(self):
        with pytest.raises(DimensionMismatchError):
            CurveSet(np.array([0.0, 1.0, 2.0]), np.zeros((2, 3)))
        with pytest.raises(DimensionMismatchError):
            CurveSet(np.array([0.0, 2.0, 1.0, 3.0]), np.zeros((2, 4)))

    def test_curve_matrix(self, rng):
        t = np.linspace(0, 1, 15)
        curves = CurveSet(t, rng.normal(size=(5, 15)))
        for m in FUNCTIONAL_MEASURES:
            d = pairwise_matrix(curves, m)
            np.testing.assert_allclose(d, d.T, atol=1e-14)
            assert d[1, 3] == pytest.approx(functional_distance(curves.values[1], curves.values[3], t, m))


class TestMahalanobis:
    def test_scalar_total_metric(self, rng):
        y = rng.normal(size=8)
        d = mahalanobis_metric(y, np.repeat([0, 1], 4), "total")
        scale = np.sqrt(np.sum((y - y.mean()) ** 2))
        np.testing.assert_allclose(d, np.abs(y[:, None] - y[None, :]) / scale, atol=1e-14)

    def test_identical_rows(self, rng):
        y = rng.normal(size=(10, 3))
        y[4] = y[7]
        assert mahalanobis_metric(y, np.repeat([0, 1], 5), "within")[4, 7] == pytest.approx(0.0, abs=1e-12)

    def test_singular(self, rng):
        with pytest.raises(SingularMetricError):
            mahalanobis_metric(rng.normal(size=(3, 5)), [0, 0, 1], "total")

    def test_pillai_relation(self, rng):
        for _ in range(20):
            p = int(rng.integers(1, 5))
            y = rng.normal(size=(16, p))
            labels = np.repeat([0, 1], 8)
            f = dbf(mahalanobis_metric(y, labels, "total"), labels)
            assert abs(pillai_from_dbf(f, p) - pillai_trace(y, labels)) <= 1e-8

import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from distanova.errors import SampleSizeError
from distanova.pearson3 import DbfNull, dbf_cdf
from distanova.simulate import (
    BEZIER_GRID_POINTS,
    BEZIER_SPAN,
    SimConfig,
    balanced_labels,
    bezier_curve,
    bezier_time_to_parameter,
    compare_classical,
    compare_permutation,
    derive_seed,
    gen_bezier_curves,
    gen_mvn_wishart,
    gen_snp_resample,
    gen_univariate_normal,
    ks_experiment,
    ks_grid,
    ks_statistic,
    synthetic_genotype_pool,
    wishart_identity,
    write_comparison_csv,
    write_ks_csv,
)


class TestSeeds:
    def test_derive_seed_is_stable(self):
        assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
        assert derive_seed(1, 2, 3) != derive_seed(1, 2, 4)

    def test_generators_reproducible(self):
        config = SimConfig(scenario="mvn_wishart", n=12, p=3)
        np.testing.assert_array_equal(gen_mvn_wishart(config, 5), gen_mvn_wishart(config, 5))
        assert not np.array_equal(gen_mvn_wishart(config, 5), gen_mvn_wishart(config, 6))

    def test_balanced_labels(self):
        np.testing.assert_array_equal(np.bincount(balanced_labels(11, 3)), [4, 4, 3])


class TestGenerators:
    def test_univariate_shape(self):
        assert gen_univariate_normal(SimConfig(n=30), 1).shape == (30,)

    def test_wishart_positive_definite(self, rng):
        for p in (1, 2, 5, 8):
            assert np.all(np.linalg.eigvalsh(wishart_identity(p, rng)) > 0)

    def test_snp_resample(self):
        pool = synthetic_genotype_pool(n_subjects=40, n_snps=100)
        assert set(np.unique(pool)) <= {0, 1, 2}
        block = gen_snp_resample(pool, 20, 7, 3)
        assert block.shape == (20, 7)
        with pytest.raises(SampleSizeError):
            gen_snp_resample(pool, 41, 7, 3)
        with pytest.raises(SampleSizeError):
            gen_snp_resample(pool, 20, 101, 3)

    def test_bezier_curves(self):
        curves = gen_bezier_curves(SimConfig(scenario="bezier_curves", n=5), 9)
        assert curves.values.shape == (5, BEZIER_GRID_POINTS)
        assert curves.grid[0] == 0.0 and curves.grid[-1] == BEZIER_SPAN


class TestBezier:
    def test_endpoints(self):
        heights = (1.0, -4.0, 3.0)
        assert bezier_curve(0.0, 20.0, heights) == pytest.approx(1.0)
        assert bezier_curve(BEZIER_SPAN, 20.0, heights) == pytest.approx(3.0)

    def test_midpoint(self):
        c, heights = 16.0, (2.0, 6.0, -2.0)
        t_mid = 0.5 * c + 0.25 * BEZIER_SPAN
        assert bezier_time_to_parameter(t_mid, c) == pytest.approx(0.5)
        assert bezier_curve(t_mid, c, heights) == pytest.approx(0.25 * 2 + 0.5 * 6 - 0.25 * 2)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(8.0, 40.0), st.floats(0.0, 1.0))
    def test_parameter_inversion(self, c, s):
        t = 2 * s * (1 - s) * c + s * s * BEZIER_SPAN
        assert bezier_time_to_parameter(t, c) == pytest.approx(s, abs=1e-9)


class TestKs:
    def test_examples(self):
        assert ks_statistic([0.0, 0.5, 1.0], [0.0, 0.5, 1.0]) == 0.0
        assert ks_statistic([0.1, 0.4, 1.0], [0.0, 0.7, 1.0]) == pytest.approx(0.3)

    def test_grid_mismatch(self):
        with pytest.raises(ValueError):
            ks_statistic([0.1], [0.1, 0.2])


class TestExperiments:
    def test_classical_scalar(self):
        result = compare_classical(SimConfig(n=100, g=4, runs=20, seed=1))
        assert result.p_approx.shape == (20,)
        assert result.mean_abs_diff < 0.01

    def test_classical_multivariate(self):
        result = compare_classical(SimConfig(scenario="mvn_wishart", n=40, p=3, runs=10, seed=2))
        assert result.mean_abs_diff < 0.02

    def test_permutation_exact(self):
        result = compare_permutation(SimConfig(scenario="vector_normal", n=8, p=2, runs=5, seed=3))
        assert result.mean_abs_diff < 0.05

    def test_scenario_measure_mismatch(self):
        with pytest.raises(ValueError):
            compare_permutation(SimConfig(scenario="snp_resample", n=8, p=3, runs=2, measure="euclidean"))

    def test_null_pvalues_near_uniform(self):
        result = compare_classical(SimConfig(n=100, g=4, runs=200, seed=5))
        assert stats.kstest(result.p_approx, "uniform").statistic < 0.1

    def test_ks_grid_bounds(self):
        null = DbfNull(1.0, 1.0, 2.0, 5.0)
        grid = ks_grid(null, points=50)
        assert grid[0] == pytest.approx(null.alpha)
        assert dbf_cdf(grid[-1], null) == pytest.approx(0.9999, abs=1e-9)

    def test_ks_experiment_small(self):
        result = ks_experiment(SimConfig(n=30, g=3, runs=3, n_perm=10_000, seed=1))
        assert set(result.ks_values) == {1_000, 10_000}
        assert 0.0 <= result.ks_approx <= 1.0

    def test_writers(self, tmp_path):
        result = compare_classical(SimConfig(n=20, runs=3, seed=4))
        path = write_comparison_csv(result, tmp_path / "cmp.csv")
        rows = list(csv.reader(path.open()))
        assert rows[0] == ["run_id", "p_approx", "p_reference", "abs_diff"]
        assert len(rows) == 5 and rows[-1][0] == "summary"
        fig = ks_experiment(SimConfig(n=20, runs=2, n_perm=1000))
        rows = list(csv.reader(write_ks_csv(fig, tmp_path / "ks.csv").open()))
        assert len(rows) == 1 + 2 + 1

import math

import numpy as np
import pytest

from distanova.dbf import POINT_MASS, WITHIN_ZERO, dbf_permutation_test, dbf_test
from distanova.distances import pairwise_matrix
from distanova.errors import DegenerateDistributionError, DegenerateWithinError, InvalidAssignmentError
from distanova.moments import MonteCarloConfig
from distanova.permutation import PermutationPlan


@pytest.fixture
def two_groups(rng):
    y = rng.normal(size=(40, 2))
    y[:20] += 0.8
    return pairwise_matrix(y, "euclidean"), np.repeat(["case", "control"], 20)


class TestDbfTest:
    def test_regular_result(self, two_groups):
        delta, labels = two_groups
        res = dbf_test(delta, labels)
        assert res.flag is None
        assert 0 < res.pvalue < 0.05
        assert res.statistic == pytest.approx(res.decomposition.between / res.decomposition.within)
        assert res.null.total == pytest.approx(res.decomposition.total)

    def test_close_to_permutation(self, two_groups):
        delta, labels = two_groups
        approx = dbf_test(delta, labels).pvalue
        perm = dbf_permutation_test(delta, labels, PermutationPlan(n_pi=20_000, seed=1)).pvalue
        assert approx == pytest.approx(perm, abs=0.01)

    def test_backends_agree(self, two_groups):
        delta, labels = two_groups
        closed = dbf_test(delta, labels).pvalue
        mc = dbf_test(delta, labels, backend="monte_carlo", mc_config=MonteCarloConfig(n_perm=50_000)).pvalue
        assert mc == pytest.approx(closed, rel=0.1)

    def test_within_zero(self):
        y = np.array([0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0])
        res = dbf_test(pairwise_matrix(y, "euclidean"), [0, 0, 0, 1, 1, 1, 1])
        assert res.flag == WITHIN_ZERO
        assert (res.statistic, res.pvalue) == (math.inf, 0.0)
        with pytest.raises(DegenerateWithinError):
            dbf_test(pairwise_matrix(y, "euclidean"), [0, 0, 0, 1, 1, 1, 1], strict=True)

    def test_point_mass(self):
        delta = np.zeros((8, 8))
        res = dbf_test(delta, [0] * 4 + [1] * 4)
        assert res.flag == POINT_MASS
        assert math.isnan(res.pvalue)
        with pytest.raises(DegenerateDistributionError):
            dbf_test(delta, [0] * 4 + [1] * 4, strict=True)

    def test_single_group(self, two_groups):
        delta, _ = two_groups
        with pytest.raises(InvalidAssignmentError):
            dbf_test(delta, [0] * 40)

    def test_label_count(self, two_groups):
        delta, _ = two_groups
        with pytest.raises(InvalidAssignmentError):
            dbf_test(delta, [0, 1] * 10)

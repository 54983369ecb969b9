"""Incomplete gamma and beta against high-precision reference values."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from distanova.special import betainc, gammainc_lower, gammainc_upper, log_gamma_density

# (a, x, P(a, x), Q(a, x)) from mpmath at 40 digits.
GAMMA_CASES = [
    (0.5, 0.1, 0.34527915398142298, 0.65472084601857702),
    (3.0, 2.5, 0.45618688411667048, 0.54381311588332952),
    (44.4, 40.0, 0.26336006255365419, 0.73663993744634581),
    (400.0, 420.0, 0.84144211059999314, 0.15855788940000686),
    (200000.0, 201000.0, 0.98722872829062778, 0.012771271709372219),
    (0.44, 0.001, 0.054016838142840818, 0.94598316185715918),
    (10.0, 30.0, 0.99999287824913718, 7.1217508628155771e-6),
    (0.01, 3.0, 0.99986702864342984, 0.00013297135657015548),
]

# (a, b, x, I_x(a, b)) from mpmath.
BETA_CASES = [
    (0.5, 1.0, 0.3, 0.5477225575051661),
    (2.5, 7.0, 0.2, 0.36749651990402307),
    (50.0, 60.0, 0.45, 0.46423529143060363),
    (1.0, 1.0, 0.3, 0.3),
    (0.5, 0.5, 0.999, 0.9798649583666225),
    (30.0, 2.0, 0.99, 0.96161048540476449),
]


class TestIncompleteGamma:
    @pytest.mark.parametrize("a, x, p, q", GAMMA_CASES)
    def test_reference_values(self, a, x, p, q):
        assert gammainc_lower(a, x) == pytest.approx(p, rel=1e-12)
        assert gammainc_upper(a, x) == pytest.approx(q, rel=1e-12)

    def test_vectorized_matches_scalar(self):
        a = np.array([c[0] for c in GAMMA_CASES])
        x = np.array([c[1] for c in GAMMA_CASES])
        vec = gammainc_upper(a, x)
        scalar = [gammainc_upper(ai, xi) for ai, xi in zip(a, x)]
        np.testing.assert_allclose(vec, scalar, rtol=1e-12)

    def test_boundaries(self):
        assert gammainc_lower(2.0, 0.0) == 0.0
        assert gammainc_upper(2.0, 0.0) == 1.0
        assert gammainc_lower(2.0, np.inf) == 1.0

    def test_rejects_nonpositive_shape(self):
        with pytest.raises(ValueError):
            gammainc_lower(0.0, 1.0)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0.05, 5e3), st.floats(1e-6, 1e4))
    def test_lower_plus_upper_is_one(self, a, x):
        assert gammainc_lower(a, x) + gammainc_upper(a, x) == pytest.approx(1.0, abs=1e-13)

    def test_unit_shape_is_exponential(self):
        x = np.linspace(0.01, 20, 50)
        np.testing.assert_allclose(gammainc_upper(1.0, x), np.exp(-x), rtol=1e-13)

    def test_log_density_at_origin(self):
        assert log_gamma_density(1.0, 0.0) == 0.0
        assert log_gamma_density(0.5, 0.0) == np.inf
        assert log_gamma_density(2.0, -1.0) == -np.inf


class TestIncompleteBeta:
    @pytest.mark.parametrize("a, b, x, ref", BETA_CASES)
    def test_reference_values(self, a, b, x, ref):
        assert float(betainc(a, b, x)) == pytest.approx(ref, rel=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0.1, 200), st.floats(0.1, 200), st.floats(0.0, 1.0))
    def test_reflection(self, a, b, x):
        # Round-trip x so that x and 1 - x are exact complements in floating point.
        x = 1.0 - (1.0 - x)
        assert float(betainc(a, b, x)) + float(betainc(b, a, 1.0 - x)) == pytest.approx(1.0, abs=1e-12)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from arms.specfn import (
    beta_cdf_one_param,
    bivariate_normal_cdf,
    sigmoid,
    std_normal_cdf,
    std_normal_inv_cdf,
    std_normal_pdf,
)


def _quad_bvn(h, k, rho):
    # Plackett's identity: dPhi2/drho = phi2(h, k; r); integrate from r = 0.
    def dens(r):
        s = 1.0 - r * r
        return math.exp(-(h * h - 2 * r * h * k + k * k) / (2 * s)) / (2 * math.pi * math.sqrt(s))

    val, _ = integrate.quad(dens, 0.0, rho, epsabs=1e-14, epsrel=1e-13, limit=200)
    return std_normal_cdf(h) * std_normal_cdf(k) + val


class TestUnivariate:
    def test_cdf_known_values(self):
        assert std_normal_cdf(0.0) == 0.5
        np.testing.assert_allclose(std_normal_cdf(1.0), 0.8413447460685429, rtol=1e-15)
        np.testing.assert_allclose(std_normal_cdf(-8.0), 6.22096057427178e-16, rtol=1e-12)

    def test_pdf_integrates(self):
        val, _ = integrate.quad(std_normal_pdf, -np.inf, np.inf)
        assert abs(val - 1.0) < 1e-12

    def test_inv_cdf_known(self):
        assert std_normal_inv_cdf(0.5) == 0.0
        np.testing.assert_allclose(std_normal_inv_cdf(0.975), 1.959963984540054, rtol=1e-14)

    @given(st.floats(min_value=1e-300, max_value=1 - 1e-12))
    def test_inv_cdf_round_trip(self, p):
        x = std_normal_inv_cdf(p)
        assert abs(std_normal_cdf(x) - p) <= 1e-12 * max(p, 1e-300) + 1e-15

    @given(st.integers(min_value=1, max_value=1023))
    def test_inv_cdf_antisymmetric(self, k):
        p = k / 1024
        assert abs(std_normal_inv_cdf(p) + std_normal_inv_cdf(1 - p)) <= 1e-12

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, float("nan")])
    def test_inv_cdf_domain(self, p):
        with pytest.raises(ValueError):
            std_normal_inv_cdf(p)

    def test_inv_cdf_vectorised(self):
        p = np.array([0.01, 0.3, 0.99])
        np.testing.assert_allclose(std_normal_inv_cdf(p), stats.norm.ppf(p), rtol=1e-13)

    def test_sigmoid(self):
        np.testing.assert_allclose(sigmoid(np.array([-800.0, 0.0, 800.0])), [0.0, 0.5, 1.0])

    def test_beta_cdf(self):
        assert beta_cdf_one_param(0.3, 4) == pytest.approx(1 - 0.7 ** 3)
        assert beta_cdf_one_param(0.3, 4, flipped=True) == pytest.approx(0.3 ** 3)


class TestBivariate:
    def test_zero_zero_values(self):
        for rho in (-0.9, -1 / 3, 0.0, 0.5, 0.99):
            expected = 0.25 + math.asin(rho) / (2 * math.pi)
            assert abs(bivariate_normal_cdf(0.0, 0.0, rho) - expected) < 1e-13

    def test_independent_factorises(self):
        assert abs(bivariate_normal_cdf(0.7, -1.2, 0.0) - std_normal_cdf(0.7) * std_normal_cdf(-1.2)) < 1e-15

    @settings(max_examples=150, deadline=None)
    @given(
        st.floats(min_value=-6, max_value=6),
        st.floats(min_value=-6, max_value=6),
        st.floats(min_value=-0.999, max_value=0.999),
    )
    def test_matches_quadrature(self, h, k, rho):
        assert abs(bivariate_normal_cdf(h, k, rho) - _quad_bvn(h, k, rho)) < 1e-10

    def test_matches_scipy(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            h, k = rng.uniform(-3, 3, 2)
            rho = rng.uniform(-0.98, 0.98)
            ref = stats.multivariate_normal([0, 0], [[1, rho], [rho, 1]]).cdf([h, k])
            assert abs(bivariate_normal_cdf(h, k, rho) - ref) < 1e-7

    @settings(max_examples=60, deadline=None)
    @given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-0.99, 0.99))
    def test_symmetric_in_arguments(self, h, k, rho):
        assert abs(bivariate_normal_cdf(h, k, rho) - bivariate_normal_cdf(k, h, rho)) < 1e-14

    def test_infinite_limits(self):
        assert bivariate_normal_cdf(np.inf, 0.3, 0.4) == pytest.approx(std_normal_cdf(0.3), abs=1e-15)
        assert bivariate_normal_cdf(-np.inf, 0.3, 0.4) == 0.0

    def test_rejects_degenerate_rho(self):
        with pytest.raises(ValueError):
            bivariate_normal_cdf(0.0, 0.0, 1.0)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arms.copulas import CopulaKind, CopulaSpec
from arms.estimators import EstimatorConfig, FunctionOracle
from arms.oracle import (
    empirical_correlation,
    estimator_variance,
    exact_estimator_expectation,
    exact_estimator_moments,
    exact_gradient,
    expectation,
    sampling_law,
)
from arms.specfn import sigmoid

toy = FunctionOracle(lambda b: ((b - 0.499) ** 2).sum(-1), m=1, vectorized=True)


def logit(p):
    return math.log(p / (1 - p))


class TestExactGradient:
    def test_identity_function(self):
        f = FunctionOracle(lambda b: b[..., 0] * 1.0, m=1, vectorized=True)
        assert exact_gradient(np.array([logit(0.3)]), f)[0] == pytest.approx(0.21, abs=1e-15)

    def test_toy_at_half(self):
        assert exact_gradient(np.zeros(1), toy)[0] == pytest.approx(0.0005, abs=1e-15)

    def test_constant(self):
        f = FunctionOracle(lambda b: np.full(b.shape[:-1], 2.0), m=3, vectorized=True)
        np.testing.assert_allclose(exact_gradient(np.array([0.2, -1, 3]), f), 0.0, atol=1e-15)

    @given(st.floats(-5, 5), st.floats(-3, 3), st.floats(-3, 3))
    def test_univariate_closed_form(self, phi, f0, f1):
        p = float(sigmoid(phi))
        got = exact_gradient(np.array([phi]), FunctionOracle.from_table(np.array([f0, f1])))[0]
        assert abs(got - (f1 - f0) * p * (1 - p)) < 1e-14

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 4), st.integers(0, 2 ** 31))
    def test_finite_differences(self, m, seed):
        rng = np.random.default_rng(seed)
        logits = rng.uniform(-2, 2, m)
        f = FunctionOracle.from_table(rng.normal(size=2 ** m))
        grad = exact_gradient(logits, f)
        h = 1e-5
        for d in range(m):
            e = np.zeros(m)
            e[d] = h
            fd = (expectation(logits + e, f) - expectation(logits - e, f)) / (2 * h)
            assert abs(fd - grad[d]) <= 1e-6 * max(1.0, abs(grad[d]))

    def test_rejects_large_m(self):
        with pytest.raises(ValueError):
            exact_gradient(np.zeros(21), toy)


class TestVarianceReport:
    def test_standard_error_consistency(self, rng):
        rep = estimator_variance(EstimatorConfig("loorf", 4), np.array([0.3, -0.2]), FunctionOracle.from_table(np.arange(4.0)), 500, rng)
        np.testing.assert_allclose(rep.std_error_of_mean, np.sqrt(rep.per_dim_variance / 500))
        assert rep.average_variance == pytest.approx(rep.per_dim_variance.mean())

    def test_saturated_logits_zero_variance(self, rng):
        rep = estimator_variance(EstimatorConfig("loorf", 4), np.array([800.0]), toy, 100, rng)
        assert rep.per_dim_variance[0] == 0.0

    def test_needs_two_replicates(self, rng):
        with pytest.raises(ValueError):
            estimator_variance(EstimatorConfig("loorf", 2), np.zeros(1), toy, 1, rng)

    @pytest.mark.parametrize("name", ["loorf", "arms-d"])
    def test_toy_means_unbiased(self, name, rng):
        phi = np.array([logit(0.3)])
        rep = estimator_variance(EstimatorConfig(name, 4), phi, toy, 100_000, rng)
        assert abs(rep.mean[0] - exact_gradient(phi, toy)[0]) < 4 * rep.std_error_of_mean[0]

    def test_pod_variance_matches_closed_form(self, rng):
        p = 0.3
        phi = np.array([logit(p)])
        grad = exact_gradient(phi, toy)[0]
        law = grad ** 2 * (1 / (2 * p * (1 - p)) - 1)
        _, exact_var = exact_estimator_moments(EstimatorConfig("pod", 2), phi, toy)
        assert exact_var[0] == pytest.approx(law, rel=1e-12)
        rep = estimator_variance(EstimatorConfig("pod", 2), phi, toy, 200_000, rng)
        # standard error of a sample variance: sqrt((mu4 - var^2) / R)
        b = np.array([0, 1])
        vals = []
        for b1 in b:
            for b2 in b:
                w = (p if b1 else 1 - p) * (p if b2 else 1 - p)
                g = 0.5 * (toy(np.array([[b1]]))[0] - toy(np.array([[b2]]))[0]) * (b1 - b2)
                vals.append((w, g))
        mu4 = sum(w * (g - grad) ** 4 for w, g in vals)
        se = math.sqrt((mu4 - law ** 2) / 200_000)
        assert abs(rep.per_dim_variance[0] - law) < 4 * se


class TestEmpiricalCorrelation:
    def test_independent_zero(self, rng):
        rho, se = empirical_correlation(CopulaSpec(CopulaKind.INDEPENDENT, 4), 0.4, 50_000, rng, return_se=True)
        assert abs(rho) < 4 * se

    def test_antithetic_pair(self, rng):
        rho, se = empirical_correlation(CopulaSpec(CopulaKind.ANTITHETIC_PAIR, 2), 0.3, 50_000, rng, return_se=True)
        assert abs(rho + 3 / 7) < 4 * se + 1e-12

    def test_minimum_draws(self, rng):
        with pytest.raises(ValueError):
            empirical_correlation(CopulaSpec(CopulaKind.DIRICHLET, 3), 0.3, 100, rng)


class TestEnumeration:
    def test_rejects_gaussian_and_arm(self):
        for name in ("arms-n", "arm", "exact"):
            with pytest.raises(ValueError):
                sampling_law(EstimatorConfig(name, 4), np.array([0.3]))

    def test_weights_sum_to_one(self):
        for name in ("loorf", "disarm", "arms-d", "arms-pair"):
            n = 2 if name == "arms-pair" else 4
            _, w, _ = sampling_law(EstimatorConfig(name, n), np.array([0.3, 0.8]))
            assert w.sum() == pytest.approx(1.0, abs=1e-13)

    def test_spec_examples(self):
        rng = np.random.default_rng(9)
        f = FunctionOracle.from_table(rng.normal(size=2))
        phi = np.array([0.7])
        np.testing.assert_allclose(exact_estimator_expectation(EstimatorConfig("loorf", 2), phi, f), exact_gradient(phi, f), atol=1e-12)
        f2 = FunctionOracle.from_table(rng.normal(size=4))
        phi2 = np.array([-0.4, 1.1])
        np.testing.assert_allclose(exact_estimator_expectation(EstimatorConfig("arms-d", 3), phi2, f2), exact_gradient(phi2, f2), atol=1e-10)

    def test_outcome_budget(self):
        with pytest.raises(ValueError):
            sampling_law(EstimatorConfig("loorf", 8), np.full(3, 0.5))

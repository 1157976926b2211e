"""
Unit tests for training/src/models/density.py module.
"""

import math

import numpy as np
import pytest
from src.exceptions import DimensionError, InsufficientDataError, ParameterError
from src.models.density import (
    GaussianParams,
    GGParams,
    fit_gaussian,
    fit_gg_fixed_point,
    gaussian_log_density,
    gg_log_density,
    gg_sample,
    regularize_scatter,
)


class TestGGParams:
    """Tests for GGParams validation."""

    def test_symmetrizes_sigma(self):
        """Test sigma is stored symmetric."""
        params = GGParams(mu=np.zeros(2), sigma=np.array([[2.0, 0.4], [0.2, 1.0]]), beta=0.9)
        assert np.array_equal(params.sigma, params.sigma.T)

    def test_rejects_non_positive_beta(self):
        """Test beta must be positive."""
        with pytest.raises(ParameterError):
            GGParams(mu=np.zeros(2), sigma=np.eye(2), beta=0.0)

    def test_rejects_indefinite_sigma(self):
        """Test a non positive definite scatter matrix is rejected."""
        with pytest.raises(ParameterError):
            GGParams(mu=np.zeros(2), sigma=np.array([[1.0, 2.0], [2.0, 1.0]]), beta=0.9)

    def test_rejects_shape_mismatch(self):
        """Test sigma must be p x p."""
        with pytest.raises(DimensionError):
            GGParams(mu=np.zeros(3), sigma=np.eye(2), beta=0.9)


class TestGGLogDensity:
    """Tests for gg_log_density."""

    def test_standard_normal_at_origin(self):
        """Test p=1, beta=1 at the mean gives log(1/sqrt(2 pi))."""
        params = GGParams(mu=np.zeros(1), sigma=np.eye(1), beta=1.0)
        assert gg_log_density(np.zeros(1), params) == pytest.approx(-0.5 * math.log(2 * math.pi), abs=1e-12)

    @pytest.mark.parametrize("p", [1, 2, 8, 64])
    def test_beta_one_matches_gaussian(self, p, rng, random_spd):
        """Test the beta=1 GG density equals the Gaussian density."""
        mu = rng.standard_normal(p)
        sigma = random_spd(p)
        x = mu + rng.standard_normal((1000, p))
        gg = gg_log_density(x, GGParams(mu=mu, sigma=sigma, beta=1.0))
        gauss = gaussian_log_density(x, GaussianParams(mean=mu, cov=sigma))
        assert np.max(np.abs(gg - gauss)) < 1e-12 * max(1.0, np.max(np.abs(gauss)))

    def test_integrates_to_one_in_2d(self):
        """Test quadrature of the p=2, beta=0.9 density over a wide grid."""
        params = GGParams(mu=np.zeros(2), sigma=np.array([[1.0, 0.3], [0.3, 0.5]]), beta=0.9)
        axis = np.linspace(-10.0, 10.0, 801)
        step = axis[1] - axis[0]
        xx, yy = np.meshgrid(axis, axis)
        points = np.column_stack([xx.ravel(), yy.ravel()])
        total = np.exp(gg_log_density(points, params)).sum() * step * step
        assert total == pytest.approx(1.0, abs=0.01)

    def test_scatter_scaling(self, rng, random_spd):
        """Test scaling sigma by c shifts the log-density by the closed-form amount."""
        p, beta, c = 3, 0.9, 2.5
        mu = np.zeros(p)
        sigma = random_spd(p)
        x = rng.standard_normal(p)
        base = GGParams(mu=mu, sigma=sigma, beta=beta)
        scaled = GGParams(mu=mu, sigma=c * sigma, beta=beta)
        q = float(x @ np.linalg.solve(sigma, x))
        expected = -(p / 2.0) * math.log(c) + 0.5 * (q**beta - (q / c) ** beta)
        assert gg_log_density(x, scaled) - gg_log_density(x, base) == pytest.approx(expected, abs=1e-10)

    def test_single_vector_returns_scalar(self):
        """Test a single vector gives a float and rows give an array."""
        params = GGParams(mu=np.zeros(2), sigma=np.eye(2), beta=0.9)
        assert isinstance(gg_log_density(np.ones(2), params), float)
        assert gg_log_density(np.ones((5, 2)), params).shape == (5,)

    def test_dimension_mismatch(self):
        """Test a vector of the wrong length raises DimensionError."""
        params = GGParams(mu=np.zeros(2), sigma=np.eye(2), beta=0.9)
        with pytest.raises(DimensionError):
            gg_log_density(np.zeros(3), params)


class TestGaussianLogDensity:
    """Tests for gaussian_log_density."""

    def test_standard_normal(self):
        """Test p=1 standard normal at 0."""
        params = GaussianParams(mean=np.zeros(1), cov=np.eye(1))
        assert gaussian_log_density(np.zeros(1), params) == pytest.approx(-0.91894, abs=1e-5)

    def test_ridge(self):
        """Test N(0, I + 3 I) in 2-D at the origin."""
        params = GaussianParams(mean=np.zeros(2), cov=np.eye(2))
        assert gaussian_log_density(np.zeros(2), params, ridge=3.0) == pytest.approx(-math.log(8 * math.pi), abs=1e-4)

    def test_mode_at_mean(self, rng, random_spd):
        """Test the density at the mean exceeds the density anywhere else."""
        params = GaussianParams(mean=rng.standard_normal(3), cov=random_spd(3))
        others = params.mean + rng.standard_normal((200, 3))
        assert gaussian_log_density(params.mean, params) > np.max(gaussian_log_density(others, params))

    def test_singular_cov_without_ridge(self):
        """Test a singular covariance fails unless a ridge is added."""
        params = GaussianParams(mean=np.zeros(2), cov=np.zeros((2, 2)))
        with pytest.raises(ParameterError):
            gaussian_log_density(np.zeros(2), params)
        assert np.isfinite(gaussian_log_density(np.zeros(2), params, ridge=1.0))


class TestFitGG:
    """Tests for fit_gg_fixed_point and fit_gaussian."""

    def test_beta_one_is_sample_covariance(self, rng):
        """Test the beta=1 fit equals the regularized ML covariance."""
        samples = rng.standard_normal((2000, 4))
        fitted = fit_gg_fixed_point(samples, beta=1.0)
        expected = regularize_scatter(fit_gaussian(samples).cov)
        assert np.linalg.norm(fitted.sigma - expected) / np.linalg.norm(expected) < 1e-8
        assert np.allclose(fitted.mu, samples.mean(axis=0))

    @pytest.mark.slow
    def test_recovers_known_parameters(self, random_spd):
        """Test recovery of (mu, sigma) from 10^4 GG draws over 10 seeds."""
        p, beta = 4, 0.9
        truth = GGParams(mu=np.array([5.0, -3.0, 2.0, 4.0]), sigma=random_spd(p, scale=2.0), beta=beta)
        for seed in range(10):
            samples = gg_sample(truth, 10_000, rng_seed=seed)
            fitted = fit_gg_fixed_point(samples, beta)
            assert np.linalg.norm(fitted.sigma - truth.sigma) / np.linalg.norm(truth.sigma) < 0.1
            assert np.linalg.norm(fitted.mu - truth.mu) / np.linalg.norm(truth.mu) < 0.05

    def test_fit_improves_likelihood(self, rng, random_spd):
        """Test the fitted scatter is at least as likely as the sample covariance."""
        p, beta = 3, 0.9
        truth = GGParams(mu=np.zeros(p), sigma=random_spd(p), beta=beta)
        samples = gg_sample(truth, 3000, rng_seed=rng)
        fitted = fit_gg_fixed_point(samples, beta)
        initial = GGParams(mu=fitted.mu, sigma=regularize_scatter(fit_gaussian(samples).cov), beta=beta)
        assert gg_log_density(samples, fitted).sum() >= gg_log_density(samples, initial).sum() - 1e-6

    def test_too_few_samples(self):
        """Test fewer than p + 1 samples raise InsufficientDataError."""
        with pytest.raises(InsufficientDataError):
            fit_gg_fixed_point(np.zeros((3, 4)), beta=0.9)

    def test_identical_samples(self):
        """Test zero-variance samples hit the degenerate-scatter error."""
        with pytest.raises(ParameterError, match="degenerate"):
            fit_gg_fixed_point(np.array([[2.0], [2.0]]), beta=0.9)


class TestGGSample:
    """Tests for gg_sample."""

    def test_zero_count(self):
        """Test count=0 returns an empty matrix."""
        params = GGParams(mu=np.zeros(3), sigma=np.eye(3), beta=0.9)
        assert gg_sample(params, 0, rng_seed=0).shape == (0, 3)

    def test_gaussian_covariance(self):
        """Test beta=1, sigma=I draws have identity covariance."""
        params = GGParams(mu=np.zeros(2), sigma=np.eye(2), beta=1.0)
        draws = gg_sample(params, 100_000, rng_seed=1)
        cov = np.cov(draws, rowvar=False)
        assert np.linalg.norm(cov - np.eye(2)) / np.linalg.norm(np.eye(2)) < 0.05

    def test_deterministic(self):
        """Test the same seed gives identical draws."""
        params = GGParams(mu=np.zeros(3), sigma=np.eye(3), beta=0.9)
        assert np.array_equal(gg_sample(params, 50, rng_seed=9), gg_sample(params, 50, rng_seed=9))

# tests/test_privacy.py

import numpy as np
import pytest

from reviewpriv.engine.privacy import NoiseMechanism, laplace_noise, laplace_scale_for_variance, noisy_release
from reviewpriv.engine.weights import MeanWeightVector

THETA = MeanWeightVector((0.1, 0.4, 0.4, 0.9), sorted=True)

def test_zero_scale_and_none_return_truth():
    """Test that no noise returns the truth unchanged."""
    np.testing.assert_array_equal(noisy_release(THETA, NoiseMechanism("laplace", 0.0), 1), THETA.as_array())
    np.testing.assert_array_equal(noisy_release(THETA, NoiseMechanism("none", 3.0), 1), THETA.as_array())

def test_variance_two_means_unit_scale():
    """Laplace variance 2b² = 2 gives b = 1."""
    assert laplace_scale_for_variance(2.0) == pytest.approx(1.0)
    assert NoiseMechanism("laplace", 1.0).variance == pytest.approx(2.0)
    assert NoiseMechanism("gaussian", 3.0).variance == pytest.approx(9.0)

def test_identical_seeds_are_bit_identical():
    """Test that a seed fixes the noise exactly."""
    mech = NoiseMechanism("laplace", 1.0)
    np.testing.assert_array_equal(noisy_release(THETA, mech, 11), noisy_release(THETA, mech, 11))
    assert not np.array_equal(noisy_release(THETA, mech, 11), noisy_release(THETA, mech, 12))

def test_laplace_moments():
    """10^6 draws: mean within 5 standard errors of 0, variance within 1% of 2b²."""
    draws = laplace_noise(np.random.default_rng(7), 1.0, 1_000_000)
    assert abs(draws.mean()) < 5 * np.sqrt(2.0 / draws.size)
    assert 1.98 <= draws.var() <= 2.02

def test_gaussian_moments():
    """Test the Gaussian mechanism's empirical mean and standard deviation."""
    mech = NoiseMechanism("gaussian", 0.5)
    r = noisy_release(np.zeros(1_000_000), mech, 3)
    assert abs(r.mean()) < 5 * 0.5 / np.sqrt(r.size)
    assert r.var() == pytest.approx(0.25, rel=0.01)

def test_laplace_noise_is_finite():
    """Test that Laplace draws never produce inf or NaN."""
    assert np.all(np.isfinite(laplace_noise(np.random.default_rng(0), 2.0, 100_000)))

def test_invalid_mechanisms():
    """Test that unknown kinds and negative scales are refused."""
    with pytest.raises(ValueError):
        NoiseMechanism("laplace", -1.0)
    with pytest.raises(ValueError):
        NoiseMechanism("exponential", 1.0)
    with pytest.raises(ValueError):
        laplace_scale_for_variance(-2.0)

def test_noisy_release_rejects_bad_truth():
    """Test that the truth must be a finite vector."""
    with pytest.raises(ValueError):
        noisy_release(MeanWeightVector((0.5, 0.1)), NoiseMechanism(), 0)
    with pytest.raises(ValueError):
        noisy_release(np.array([0.0, np.inf]), NoiseMechanism(), 0)

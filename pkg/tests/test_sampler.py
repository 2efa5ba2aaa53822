import numpy as np
import pytest
from scipy import integrate, stats

from asymspec.harness.experiments import paper_config
from asymspec.model import ModelError, NoiseDistribution, VarianceProfile
from asymspec.sampler import assemble_pair, sample_noise, stream, truncate, truncated_gaussian_variance


def test_gaussian_variance():
    T = VarianceProfile.ones(1000, 1000)
    X = sample_noise(T, NoiseDistribution.gaussian(), stream(1))
    assert abs((X * X).mean() * 1000 - 1.0) < 0.01


def test_student_t_standardization():
    nu, n = 2.2, 1000
    T = VarianceProfile.ones(200, n)
    X = sample_noise(T, NoiseDistribution.student_t(nu), stream(2))
    raw = stream(2).standard_t(nu, size=(200, n))
    assert np.allclose(X * np.sqrt(n) * np.sqrt(nu / (nu - 2)), raw)
    # quantiles of the standardized law; the sample variance itself is useless
    # here because the fourth moment is infinite
    q = np.quantile(np.abs(X * np.sqrt(n)), [0.5, 0.9])
    ref = stats.t.ppf([0.75, 0.95], nu) / np.sqrt(nu / (nu - 2))
    assert np.allclose(q, ref, rtol=0.02)


def test_student_t_variance_light_tail():
    T = VarianceProfile.ones(1000, 1000)
    X = sample_noise(T, NoiseDistribution.student_t(6.0), stream(2))
    assert abs((X * X).mean() * 1000 - 1.0) < 0.02


def test_rademacher_values():
    T = VarianceProfile.ones(10, 25)
    X = sample_noise(T, NoiseDistribution.rademacher(), stream(3))
    assert np.allclose(np.abs(X), 1 / 5)


def test_profile_fidelity():
    T = VarianceProfile.row_blocks(400, 500, (1.0, 2.5))
    X = sample_noise(T, NoiseDistribution.gaussian(), stream(4))
    for rows, t in ((slice(0, 200), 1.0), (slice(200, 400), 2.5)):
        block = X[rows] ** 2 * 500
        se = block.std() / np.sqrt(block.size)
        assert abs(block.mean() - t) < 3 * se


def test_zero_profile_rejected():
    with pytest.raises(ModelError):
        VarianceProfile(np.zeros((2, 2)))


def test_pair_without_structure_is_noise():
    cfg = paper_config(20, 100, d=(), sigmas=(), trials=1, seed=5)
    pair = assemble_pair(cfg, 0, keep_components=True)
    assert np.array_equal(pair.H1, pair.X1)
    assert np.array_equal(pair.H2, pair.X2)


def test_pair_determinism_and_independence():
    cfg = paper_config(20, 100, d=(1.5,), sigmas=(3.0,), trials=1, seed=5)
    a = assemble_pair(cfg, 3)
    b = assemble_pair(cfg, 3)
    c = assemble_pair(cfg, 4)
    assert np.array_equal(a.H1, b.H1) and np.array_equal(a.H2, b.H2)
    assert not np.array_equal(a.H1, c.H1)
    assert not np.array_equal(a.H1, a.H2)


def test_pair_difference_ignores_signal():
    cfg = paper_config(20, 100, d=(1.5,), sigmas=(3.0,), trials=1, seed=5)
    pair = assemble_pair(cfg, 0, keep_components=True)
    assert np.allclose(pair.H1 - pair.H2, pair.Sigma @ (pair.X1 - pair.X2))
    assert np.allclose(pair.H1, pair.S + pair.Sigma @ pair.X1)


def test_truncate_small_entries_unchanged():
    n = 100
    X = np.array([[0.1, -0.1], [0.2, -0.2]])
    assert np.allclose(truncate(X, 3.0, n), X)


def test_truncate_zeroes_huge_entry():
    n = 100
    X = np.zeros((3, 3))
    X[1, 1] = 50.0
    Y = truncate(X, 3.0, n)
    assert np.allclose(Y, 0.0)
    assert np.abs(Y).max() <= 2 * 3.0 / np.sqrt(n)


def test_truncated_gaussian_second_moment():
    q = integrate.quad(lambda z: z * z * np.exp(-z * z / 2) / np.sqrt(2 * np.pi), -3, 3)[0]
    assert np.isclose(truncated_gaussian_variance(3.0), q, atol=1e-10)
    assert np.isclose(truncated_gaussian_variance(3.0), 0.9707, atol=1e-4)
    n = 1000
    X = stream(8).standard_normal((1000, 1000)) / np.sqrt(n)
    Y = truncate(X, 3.0, n, gaussian=True)
    assert abs((Y * Y).mean() * n - 0.9707) < 0.005


def test_truncate_idempotent():
    X = stream(9).standard_t(2.5, size=(200, 300)) / np.sqrt(300)
    Y = truncate(X, 5.0, 300)
    Z = truncate(Y, 5.0, 300)
    assert np.abs(Z - Y).max() < 1e-12

import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asymspec.linalg import op_norm, svd_values
from asymspec.model import (
    ExperimentConfig,
    ModelError,
    NoiseDistribution,
    SigmaSpec,
    SignalSpec,
    VarianceProfile,
    sigma_matrix,
    signal_matrix,
    standard_basis_sigma,
    standard_basis_signal,
)


def test_sigma_identity_and_diagonal():
    assert np.array_equal(sigma_matrix(SigmaSpec.identity(5), 5), np.eye(5))
    spec = standard_basis_sigma(6, (3.0, 2.0))
    S = sigma_matrix(spec, 6)
    assert np.allclose(S, np.diag([4, 3, 1, 1, 1, 1]))
    assert np.isclose(spec.sigma_max(), 4.0)


def test_sigma_off_diagonal_rank_one():
    e1, e2 = np.eye(4)[:, [0]], np.eye(4)[:, [1]]
    spec = SigmaSpec(np.array([2.0]), e1, e2)
    S = sigma_matrix(spec, 4)
    assert np.allclose(S, np.eye(4) + 2 * np.outer(e1, e2))
    assert np.isclose(spec.sigma_max(), op_norm(S), rtol=1e-10)


def test_sigma_dimension_mismatch():
    with pytest.raises(ModelError):
        sigma_matrix(SigmaSpec.identity(3), 4)


def test_sigma_inverse_bound():
    # strengths are nonnegative, so shrink through Theta = -Xi
    Xi = np.eye(3)[:, [0]]
    Th = -np.eye(3)[:, [0]]
    with pytest.raises(ModelError):
        SigmaSpec(np.array([0.95]), Xi, Th)  # ||Sigma^-1|| = 20 > 10
    ok = SigmaSpec(np.array([0.85]), Xi, Th)
    assert ok.inverse_norm() <= ok.K
    assert np.isclose(np.linalg.norm(np.linalg.inv(sigma_matrix(ok, 3)), 2), ok.inverse_norm())


def test_sigma_growth_warning():
    spec = standard_basis_sigma(10, (9.0,))
    with pytest.warns(UserWarning):
        spec.check_growth(2000)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        standard_basis_sigma(10, (3.0,)).check_growth(2000)


def test_signal_matrix_examples():
    assert not np.any(signal_matrix(SignalSpec.empty(5, 7)))
    spec = standard_basis_signal(10, 12, (1.5, 1.2, 0.5))
    S = signal_matrix(spec)
    nz = sorted(zip(*np.nonzero(S)))
    assert nz == [(2, 3), (3, 4), (4, 5)]  # (3,4),(4,5),(5,6) counted from 1
    assert np.allclose(svd_values(S)[:3], [1.5, 1.2, 0.5], atol=1e-10)


def test_standard_basis_too_small():
    with pytest.raises(ModelError):
        standard_basis_signal(7, 20, (1.0, 0.5))


def test_signal_validation():
    with pytest.raises(ModelError):
        SignalSpec(np.array([1.0, 2.0]), np.eye(4)[:, :2], np.eye(5)[:, :2])  # not descending
    with pytest.raises(ModelError):
        SignalSpec(np.array([101.0]), np.eye(4)[:, :1], np.eye(5)[:, :1])
    U = np.eye(4)[:, :2].copy()
    U[0, 1] = 1e-3
    with pytest.raises(ModelError):
        SignalSpec(np.array([2.0, 1.0]), U, np.eye(5)[:, :2])


def test_gram_schmidt_repair():
    U = np.eye(4)[:, :2].copy()
    U[1, 0] = 5e-8  # Gram deviation ~ 5e-8, inside the repair band
    spec = SignalSpec(np.array([2.0, 1.0]), U, np.eye(5)[:, :2])
    assert np.abs(spec.U.T @ spec.U - np.eye(2)).max() < 1e-12
    assert np.allclose(spec.U, U, atol=1e-7)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_signal_svd_roundtrip(seed, k):
    rng = np.random.default_rng(seed)
    p, n = 9, 11
    U, _ = np.linalg.qr(rng.standard_normal((p, k)))
    V, _ = np.linalg.qr(rng.standard_normal((n, k)))
    d = np.sort(rng.uniform(0.5, 5.0, k))[::-1]
    if k > 1 and np.min(np.abs(np.diff(d))) < 1e-3:
        return
    spec = SignalSpec(d, U, V)
    Uh, s, Vh = np.linalg.svd(signal_matrix(spec))
    assert np.allclose(s[:k], d, atol=1e-10)
    # principal angles between spanned subspaces
    cos = np.linalg.svd(Uh[:, :k].T @ U, compute_uv=False)
    assert np.all(np.arccos(np.clip(cos, -1, 1)) < 1e-6)


def test_profile_validation():
    with pytest.raises(ModelError):
        VarianceProfile(np.zeros((3, 4)))
    T = VarianceProfile.row_blocks(800, 2000, (1.0, 1.5))
    assert T.t_lo == 1.0 and T.t_hi == 1.5
    assert np.isclose(T.op_norm(), np.sqrt(400 * 3.25) * np.sqrt(2000))


def test_distribution_validation():
    with pytest.raises(ModelError):
        NoiseDistribution.student_t(2.0)
    with pytest.raises(ModelError):
        NoiseDistribution("cauchy")


def test_config_json_roundtrip(tmp_path):
    doc = {"p": 20, "n": 100, "signal": {"d": [1.5, 1.2], "basis": "standard"},
           "sigma": {"sigmas": [3, 2], "basis": "standard"}, "profile": {"blocks": [1, 1.5]},
           "dist": {"student_t": 2.2}, "trials": 3, "seed": 7}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc))
    cfg = ExperimentConfig.from_json(path)
    assert cfg.p == 20 and cfg.trials == 3 and cfg.seed == 7
    assert cfg.distribution.nu == 2.2
    assert cfg.profile.t_hi == 1.5
    assert np.allclose(cfg.signal.d, [1.5, 1.2])


def test_config_dimension_mismatch():
    with pytest.raises(ModelError):
        ExperimentConfig(5, 8, SignalSpec.empty(5, 8), SigmaSpec.identity(5), VarianceProfile.ones(5, 9))
    with pytest.raises(ModelError):
        ExperimentConfig(5, 8, SignalSpec.empty(5, 8), SigmaSpec.identity(5), VarianceProfile.ones(5, 8), trials=0)

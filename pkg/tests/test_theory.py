import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from asymspec.model import SigmaSpec, VarianceProfile, standard_basis_signal
from asymspec.spectrum import eigs_asym
from asymspec.theory import (
    KernelSingularError,
    TheoryError,
    det_sum_expansion,
    dyson_solve,
    fluct_variance,
    null_edge,
    pseudospectrum_member,
    qf_covariance,
    secular_value,
    threshold,
    trace_moment_limit,
    trace_moment_pairing_limit,
    trace_variance_limit,
    trace_variance_pairing_limit,
)


def test_threshold_examples():
    assert threshold(VarianceProfile.ones(800, 2000)) == pytest.approx(0.79527, abs=1e-5)
    blocks = VarianceProfile.row_blocks(800, 2000, (1.0, 1.5))
    assert threshold(blocks) == pytest.approx(0.89790, abs=1e-5)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 10.0))
def test_threshold_homogeneity(t):
    T = VarianceProfile.row_blocks(40, 100, (1.0, 1.5))
    tT = VarianceProfile(t * T.T)
    assert threshold(tT) == pytest.approx(math.sqrt(t) * threshold(T), rel=1e-10)


def test_null_edge():
    assert null_edge(VarianceProfile.ones(800, 2000), 800, 2000) == pytest.approx(1.63246, abs=1e-5)
    T4 = VarianceProfile(4.0 * np.ones((800, 2000)))
    assert null_edge(T4, 800, 2000) == pytest.approx(3.26491, abs=1e-5)
    with pytest.raises(TheoryError):
        null_edge(VarianceProfile.row_blocks(8, 20, (1.0, 1.5)), 8, 20)


def test_null_edge_monte_carlo_close_to_closed_form():
    T = VarianceProfile.ones(200, 500)
    mc = null_edge(T, 200, 500, method="monte_carlo", trials=5)
    assert abs(mc - null_edge(T, 200, 500)) < 0.05


def _scalar_dyson(eta, z):
    f = lambda u: 1.0 / u - (eta + u + z * z / (eta + u))
    return brentq(f, 1e-300, 1.0 / eta)


@pytest.mark.parametrize("z,eta", [(2.0, 1e-2), (0.5, 1e-2), (1.5, 1e-3), (0.3, 1e-4)])
def test_dyson_flat_square_matches_scalar_equation(z, eta):
    T = VarianceProfile.ones(30, 30)
    sol = dyson_solve(T, 30, z, eta)
    assert sol.converged and sol.residual <= 1e-12
    u = _scalar_dyson(eta, z)
    for vec in (sol.u1, sol.u2, sol.v1, sol.v2):
        assert np.allclose(vec, u, rtol=1e-9)


def test_dyson_large_eta():
    sol = dyson_solve(VarianceProfile.ones(10, 25), None, 1.0, 1e6)
    for vec in (sol.u1, sol.u2, sol.v1, sol.v2):
        assert np.allclose(vec * 1e6, 1.0, rtol=1e-5)


def test_dyson_general_profile_positive_and_balanced():
    T = VarianceProfile.row_blocks(40, 100, (1.0, 1.5))
    for z in (0.5, 1.2):
        sol = dyson_solve(T, None, z, 1e-3)
        assert sol.converged and sol.is_positive()
        assert sol.balance_gap() <= 1e-9 * (sol.u1.sum() + sol.u2.sum())


def test_dyson_rejects_bad_input():
    T = VarianceProfile.ones(3, 4)
    with pytest.raises(TheoryError):
        dyson_solve(T, None, 1.0, 0.0)
    with pytest.raises(TheoryError):
        dyson_solve(T, None, 0.0, 1e-2)


def test_dyson_warns_when_capped():
    with pytest.warns(RuntimeWarning):
        sol = dyson_solve(VarianceProfile.ones(10, 10), None, 0.5, 1e-4, max_iter=3)
    assert not sol.converged


def test_pseudospectrum_membership():
    T = VarianceProfile.ones(80, 200)
    thr = threshold(T)
    assert not pseudospectrum_member(T, None, 3 * thr, tau=1.0)
    assert pseudospectrum_member(T, None, 0.5 * thr, tau=1.0)
    assert pseudospectrum_member(T, None, 3 * thr, tau=math.inf)
    with pytest.raises(TheoryError):
        pseudospectrum_member(T, None, 1.0, tau=0.0)


def test_qf_closed_form_flat():
    p, n, z = 4, 6, 2.0
    T = VarianceProfile.ones(p, n)
    rng = np.random.default_rng(0)
    xi, xj = rng.standard_normal(p), rng.standard_normal(p)
    yi, yj = rng.standard_normal(p), rng.standard_normal(p)
    a = 1.0 / (n * z * z)
    sw, sw2 = (xi * xj).sum(), (yi * yj).sum()
    expect = sw * sw2 / ((1 - a * p) * z**4)
    assert qf_covariance(T, None, z, "A", (xi, yi, xj, yj)) == pytest.approx(expect, rel=1e-12)
    bi, bj, ci, cj = (rng.standard_normal(n) for _ in range(4))
    expect_b = (bi * bj).sum() * (ci * cj).sum() * p / (1 - a * p) / (n * z**4)
    assert qf_covariance(T, None, z, "B", (bi, ci, bj, cj)) == pytest.approx(expect_b, rel=1e-12)


@pytest.mark.parametrize("kind", ["A", "B", "C", "D"])
def test_qf_fast_path_matches_dense(kind):
    p, n = 6, 9
    T = VarianceProfile(np.outer(np.linspace(1, 2, p), np.linspace(0.5, 1.5, n)))
    rng = np.random.default_rng(1)
    lx, ly = {"A": (p, p), "B": (n, n), "C": (p, n), "D": (p, n)}[kind]
    vecs = (rng.standard_normal(lx), rng.standard_normal(ly), rng.standard_normal(lx), rng.standard_normal(ly))
    fast = qf_covariance(T, None, 3.0, kind, vecs, fast=True)
    dense = qf_covariance(T, None, 3.0, kind, vecs, fast=False)
    assert fast == pytest.approx(dense, rel=1e-10)


def test_qf_symmetric_and_disjoint():
    T = VarianceProfile.row_blocks(6, 9, (1.0, 1.5))
    rng = np.random.default_rng(2)
    x, y = rng.standard_normal(6), rng.standard_normal(6)
    x2, y2 = rng.standard_normal(6), rng.standard_normal(6)
    assert qf_covariance(T, None, 2.0, "A", (x, y, x2, y2)) == pytest.approx(
        qf_covariance(T, None, 2.0, "A", (x2, y2, x, y)), rel=1e-12)
    e = np.eye(6)
    # x_i x_j = 0 pointwise: no shared support, no covariance
    assert qf_covariance(T, None, 2.0, "A", (e[0], y, e[1], y2)) == 0.0


def test_qf_inside_bulk_rejected():
    T = VarianceProfile.ones(6, 9)
    with pytest.raises(KernelSingularError):
        qf_covariance(T, None, 0.5, "A", (np.ones(6),) * 4)
    with pytest.raises(TheoryError):
        qf_covariance(T, None, 2.0, "A", (np.ones(5),) * 4)


def _unit(k, i):
    e = np.zeros(k)
    e[i] = 1.0
    return e


def test_fluct_variance_flat_values():
    p, n = 800, 2000
    T = VarianceProfile.ones(p, n)
    fs = fluct_variance(T, None, SigmaSpec.identity(p), _unit(p, 2), _unit(n, 3), 1.5)
    assert np.allclose(fs.terms, (0.4826, 0.1716, 0.1930), atol=5e-4)
    assert fs.var_g == pytest.approx(0.8472, abs=5e-4)
    assert fs.var_linear == pytest.approx(2.0 / n, rel=1e-12)
    assert n * fs.var_total == pytest.approx(2.847, abs=1e-3)
    assert fs.var_total_normalized == pytest.approx(fs.var_total / 4)
    assert fs.z_abs_used == 2.25


def test_fluct_variance_terms_are_order_one():
    c = 0.4
    vals = []
    for n in (500, 2000):
        p = int(c * n)
        T = VarianceProfile.ones(p, n)
        fs = fluct_variance(T, None, SigmaSpec.identity(p), _unit(p, 0), _unit(n, 0), 1.5)
        vals.append(np.array(fs.terms))
    slope = np.log(vals[1] / vals[0]) / np.log(4.0)
    assert np.all(np.abs(slope) < 0.05)


def test_fluct_variance_orthogonal_sigma_spike():
    p, n = 40, 100
    T = VarianceProfile.ones(p, n)
    base = fluct_variance(T, None, SigmaSpec.identity(p), _unit(p, 2), _unit(n, 3), 1.5)
    # spike along e_0 leaves Sigma^T e_2 untouched
    spiked = SigmaSpec(np.array([3.0]), _unit(p, 0)[:, None], _unit(p, 0)[:, None])
    other = fluct_variance(T, None, spiked, _unit(p, 2), _unit(n, 3), 1.5)
    assert other.var_total == pytest.approx(base.var_total, rel=1e-12)


def test_fluct_variance_errors():
    T = VarianceProfile.ones(40, 100)
    with pytest.raises(TheoryError):
        fluct_variance(T, None, SigmaSpec.identity(40), _unit(40, 0), _unit(100, 0), 0.5)
    with pytest.raises(TheoryError):
        fluct_variance(T, None, SigmaSpec.identity(40), _unit(40, 0), _unit(100, 0), 1.5, other_d=(1.52,))


def test_det_expansion_random_pairs():
    rng = np.random.default_rng(3)
    for _ in range(200):
        k = int(rng.integers(1, 6))
        A, B = rng.standard_normal((k, k)), rng.standard_normal((k, k))
        assert det_sum_expansion(A, B) == pytest.approx(np.linalg.det(A + B), abs=1e-9, rel=1e-9)


def test_det_expansion_examples():
    A = np.random.default_rng(4).standard_normal((4, 4))
    assert det_sum_expansion(A, np.zeros((4, 4))) == pytest.approx(np.linalg.det(A))
    assert det_sum_expansion(np.eye(2), np.eye(2)) == pytest.approx(4.0)
    with pytest.raises(TheoryError):
        det_sum_expansion(np.eye(11), np.eye(11))
    with pytest.raises(TheoryError):
        det_sum_expansion(np.eye(2), np.eye(3))


def test_secular_value_zero_noise():
    p, n = 8, 11
    signal = standard_basis_signal(p, n, (1.5,))
    X = np.zeros((p + n, p + n))
    assert abs(secular_value(X, signal, 1.5)) < 1e-12
    assert abs(secular_value(X, signal, 1.1)) > 0.1


def test_secular_value_zero_at_eigenvalues():
    p, n = 9, 14
    rng = np.random.default_rng(5)
    signal = standard_basis_signal(p, n, (2.0,))
    A, B = rng.standard_normal((p, n)) / np.sqrt(n), rng.standard_normal((p, n)) / np.sqrt(n)
    X = np.block([[np.zeros((p, p)), A], [B.T, np.zeros((n, n))]])
    S = 2.0 * np.outer(signal.U[:, 0], signal.V[:, 0])
    lam = eigs_asym(A + S, B + S).lambdas[0]
    assert abs(secular_value(X, signal, lam)) < 1e-8


def test_trace_limits_literal_and_pairing():
    p, n = 400, 1000
    assert trace_moment_limit(p, n, 4) == pytest.approx(0.32)
    assert trace_moment_limit(p, n, 8) == pytest.approx(0.128)
    for k in range(1, 13):
        if k % 4:
            assert trace_moment_limit(p, n, k) == 0.0
            assert trace_moment_pairing_limit(p, n, k) == 0.0
    assert trace_moment_pairing_limit(p, n, 4) == pytest.approx(0.8)
    assert trace_variance_limit(p, n, 2) == pytest.approx(0.4)
    assert trace_variance_pairing_limit(p, n, 2) == pytest.approx(1.6)
    assert trace_variance_limit(p, n, 3) == 0.0
    with pytest.raises(TheoryError):
        trace_moment_limit(p, n, 0)


def test_trace_pairing_small_monte_carlo():
    p, n = 40, 100
    rng = np.random.default_rng(6)
    vals = []
    for _ in range(400):
        X1 = rng.standard_normal((p, n)) / np.sqrt(n)
        X2 = rng.standard_normal((p, n)) / np.sqrt(n)
        P = X1 @ X2.T
        vals.append(2 * np.trace(P @ P))
    vals = np.array(vals)
    se = vals.std() / np.sqrt(vals.size)
    assert abs(vals.mean() - trace_moment_pairing_limit(p, n, 4)) < 4 * se + 0.02

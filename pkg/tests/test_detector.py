import json
import math

import numpy as np
import pytest

from asymspec.detector import compare_baseline, detect, lambda_max_s, resolve_N
from asymspec.harness.experiments import paper_config
from asymspec.sampler import assemble_pair
from asymspec.spectrum import SpectrumResult, eigs_asym
from asymspec.theory import null_edge


def _spec(vals, p=1400, n=1400):
    return SpectrumResult(np.asarray(vals, dtype=complex), p, n)


def test_lambda_max_s_hand_example():
    spec = _spec([2.0, 0.5 + 0.5j, 0.5 - 0.5j])
    assert math.isclose(lambda_max_s(spec, 2800), math.sqrt(0.5), rel_tol=1e-12)


def test_lambda_max_s_empty_window_and_boundary():
    assert lambda_max_s(_spec([2.0, 1.0]), 2800) == 0.0
    assert lambda_max_s(_spec([1j]), 2800) == 1.0


def test_detect_boundary_is_closed():
    N = 2800
    base = 0.7 + 0.7j
    lms = abs(base)
    edge = lms + N ** -0.5
    rep = detect(_spec([edge, base, np.conj(base)]), N)
    assert rep.count == 1
    assert rep.flagged[0].estimate == pytest.approx(edge)
    rep = detect(_spec([edge - 1e-9, base, np.conj(base)]), N)
    assert rep.count == 0


def test_detect_merges_conjugate_pair():
    N = 2800
    spec = _spec([1.5 + 0.01j, 1.5 - 0.01j, 0.6 + 0.6j, 0.6 - 0.6j])
    rep = detect(spec, N)
    assert len(rep.flagged) == 1
    assert rep.flagged[0].multiplicity == 2
    assert rep.flagged[0].estimate == pytest.approx(1.5)


def test_detect_fallback():
    rep = detect(_spec([3.0, 1.0, 0.9, 0.8], 4, 4), 8)
    assert rep.fallback
    assert rep.flagged[0].estimate == 3.0


def test_report_json():
    rep = detect(_spec([2.0, 0.5 + 0.5j, 0.5 - 0.5j]), 2800)
    doc = json.loads(rep.to_json())
    assert set(doc) == {"lambda_max_s", "shift", "N", "flagged", "fallback"}
    assert set(doc["flagged"][0]) == {"re", "im", "estimate", "multiplicity"}


def test_monotonicity():
    spec = _spec([1.2, 0.6 + 0.6j, 0.6 - 0.6j])
    assert detect(spec, 2800).count == 1
    assert detect(_spec([1.7, 0.6 + 0.6j, 0.6 - 0.6j]), 2800).count == 1


def test_scale_equivariance_of_lambdas():
    rng = np.random.default_rng(4)
    A, B = rng.standard_normal((5, 9)), rng.standard_normal((5, 9))
    g = 2.5
    assert np.allclose(eigs_asym(g * A, g * B).lambdas, g * eigs_asym(A, B).lambdas, atol=1e-9)


def test_resolve_N():
    assert resolve_N(800, 2000) == 2800
    assert resolve_N(800, 2000, "n") == 2000
    assert resolve_N(800, 2000, "p") == 800
    with pytest.raises(ValueError):
        resolve_N(1, 2, "pn")


def test_null_small_monte_carlo():
    cfg = paper_config(200, 500, d=(), sigmas=(), trials=20, seed=3)
    zero = 0
    for t in range(cfg.trials):
        pair = assemble_pair(cfg, t)
        zero += detect(eigs_asym(pair.H1, pair.H2)).count == 0
    assert zero >= 18


def test_compare_baseline_spiked_null():
    cfg = paper_config(200, 500, d=(), sigmas=(3.0, 2.0), trials=1, seed=2)
    pair = assemble_pair(cfg, 0)
    cmp = compare_baseline(pair.H1, eigs_asym(pair.H1, pair.H2), null_edge(cfg.profile, 200, 500))
    assert cmp.sv_count >= 1


def test_compare_baseline_identity_null():
    cfg = paper_config(200, 500, d=(), sigmas=(), trials=1, seed=2)
    pair = assemble_pair(cfg, 0)
    cmp = compare_baseline(pair.H1, eigs_asym(pair.H1, pair.H2), null_edge(cfg.profile, 200, 500))
    assert cmp.sv_count == 0 and cmp.ev_count == 0

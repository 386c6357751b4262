"""Closed-form constants of the a-priori estimates and the margin-report
plumbing."""

import numpy as np
import pytest

from pxflow.config import RunConfig
from pxflow.constants import (
    MarginReport,
    compute_constants,
    rho1_closed_form,
    smoothed_random_fields,
)


def default_model(**kw):
    cfg = RunConfig(**kw)
    dom = cfg.build_domain()
    p = cfg.build_exponent(dom)
    fam = cfg.build_diffusion(dom)
    return dom, p, fam, cfg.energy_params(dom)


def test_margin_report_semantics():
    rep = MarginReport.from_values("demo", bound=2.0, empirical=1.5,
                                   tolerance=1e-6)
    assert rep.margin == pytest.approx(0.5)
    assert rep.passed
    bad = MarginReport.from_values("demo", bound=1.0, empirical=2.0)
    assert not bad.passed
    # tolerance is relative to the magnitude of the values compared
    close = MarginReport.from_values("demo", bound=1e6, empirical=1e6 + 0.1,
                                     tolerance=1e-6)
    assert close.passed
    assert close.to_dict()["pass"] is True


def test_rho1_hand_example():
    # alpha1 = 1, gamma = 2, L_B = 0, m0 = 1, eta = 0.5 -> 3 * sqrt(1) = 3
    assert rho1_closed_form(1.0, 2.0, 0.0, 1.0, 0.5) == pytest.approx(3.0)


def test_smoothed_fields_dirichlet_and_bounded():
    dom, p, fam, params = default_model(n_cells=64)
    rng = np.random.default_rng(0)
    for f in smoothed_random_fields(rng, dom, 10, 2.5):
        assert f.values[0] == 0.0 and f.values[-1] == 0.0
        assert np.max(np.abs(f.values)) <= 2.5


def test_constants_deterministic_recompute():
    dom, p, fam, params = default_model(n_cells=64)
    a = compute_constants(params, dom, p, fam, seed=3)
    b = compute_constants(params, dom, p, fam, seed=3)
    assert a == b  # bit-stable


def test_constants_structure_default_config():
    dom, p, fam, params = default_model(n_cells=64)
    c = compute_constants(params, dom, p, fam, seed=0)
    assert c.gamma_small > 0.0
    assert c.r0 == max(c.k1, c.c_emb)
    assert c.r0 >= c.c_emb
    assert c.rho1 == pytest.approx(
        rho1_closed_form(c.alpha1_embed, c.gamma_big, c.L_B, c.m0, c.eta),
        rel=1e-12)
    # p = 3 constant: theta = 1.5, its conjugate 3, q = 3/2, c_emb = 2
    assert c.theta == pytest.approx(1.5)
    assert c.theta_conj == pytest.approx(3.0)
    assert c.q == pytest.approx(1.5)
    assert c.c_emb == 2.0
    assert c.c2_T == pytest.approx(np.exp(1.0))
    assert c.c3 == pytest.approx(2.0 * (c.c1_T + c.c2_T))


def test_constants_unforced_kappa_zero():
    # kappa = 0, g = 0: ||B(0)|| = 0, so the c2 term of delta drops out
    dom, p, fam, params = default_model(n_cells=64, kappa=0.0)
    c = compute_constants(params, dom, p, fam, seed=0)
    assert c.B0_norm == 0.0
    assert c.L_B == 0.0
    assert c.k2 == 0.0  # L_B r0 + ||B(0)||
    eps, th = c.epsilon_star, c.theta
    # delta reduces to its first term, which vanishes when c1 = L_B c_emb^2 = 0
    assert c.delta == pytest.approx(0.0, abs=1e-300)


def test_k_chain_consistency():
    dom, p, fam, params = default_model(n_cells=64)
    c = compute_constants(params, dom, p, fam, seed=0)
    assert c.gamma_tilde == pytest.approx(
        2.0 * c.gamma_small / c.c_emb**c.p_minus, rel=1e-12)
    k1 = ((c.delta / c.gamma_tilde) ** (1.0 / c.p_minus)
          + (c.gamma_tilde * (c.p_minus - 2.0) / 2.0)
          ** (-1.0 / (c.p_minus - 2.0)))
    assert c.k1 == pytest.approx(k1, rel=1e-12)
    assert c.k2 == pytest.approx(c.L_B * c.r0 + c.B0_norm, rel=1e-12)
    assert c.k3 == pytest.approx(0.5 * c.r0**2 + c.k2 * c.r0, rel=1e-12)
    assert c.k4 == pytest.approx(c.k3 + 0.5 * c.k2**2, rel=1e-12)
    base = 2.0**c.p_plus * c.p_plus * c.k4 / min(c.m0, 1.0)
    assert c.r_V == pytest.approx(
        max(base ** (1 / c.p_plus), base ** (1 / c.p_minus), 1.0), rel=1e-12)


def test_poincare_constant_close_to_continuum():
    # on a fine grid the discrete constant approaches 1/pi
    dom, p, fam, params = default_model(n_cells=256)
    c = compute_constants(params, dom, p, fam, seed=0)
    assert c.alpha_poincare == pytest.approx(1.0 / np.pi, rel=1e-2)


def test_constants_json_roundtrip():
    import json

    dom, p, fam, params = default_model(n_cells=64)
    c = compute_constants(params, dom, p, fam, seed=0)
    blob = json.loads(c.to_json())
    assert blob["r0"] == c.r0
    assert blob["rho1"] == c.rho1

"""Inequality checks: Tartar, Gronwall envelope, absorbing sets, space-time
integral bounds, monotonicity/coercivity, and the trajectory-space bounds."""

import numpy as np
import pytest

from pxflow.checks import (
    check_gronwall_contraction,
    check_integral_bounds,
    check_monotone_coercive,
    check_shift_holder,
    check_sup_bounds,
    check_tartar,
    estimate_L1_lipschitz,
    tartar_margin,
)
from pxflow.config import RunConfig
from pxflow.constants import compute_constants, smoothed_random_fields
from pxflow.semiflow import evolve, sample_l_trajectory


def default_model(**kw):
    cfg = RunConfig(**kw)
    dom = cfg.build_domain()
    p = cfg.build_exponent(dom)
    fam = cfg.build_diffusion(dom)
    return dom, p, fam, cfg.energy_params(dom)


def test_tartar_hand_values():
    x = np.array([1.0])
    y = np.array([1.0])
    assert tartar_margin(x, y, 3.0) == 0.0
    # p = 2: both sides are |x-y|^2, margin identically 0
    rng = np.random.default_rng(0)
    for _ in range(100):
        a, b = rng.normal(size=(2, 3))
        assert abs(tartar_margin(a, b, 2.0)) <= 1e-12
    # p = 4, x = 1, y = 0: LHS 1, RHS 1/8
    m = tartar_margin(np.array([1.0]), np.array([0.0]), 4.0)
    assert m == pytest.approx(7.0 / 8.0, abs=1e-12)


def test_tartar_small_p_branch():
    rng = np.random.default_rng(8)
    for _ in range(1000):
        a, b = rng.normal(size=(2, 3))
        pv = rng.uniform(1.05, 1.95)
        assert tartar_margin(a, b, pv) >= -1e-12


def test_tartar_invalid_exponent():
    with pytest.raises(ValueError):
        tartar_margin(np.array([1.0]), np.array([0.0]), 1.0)


def test_tartar_sweep_report():
    rng = np.random.default_rng(5)
    rep = check_tartar(rng, n_samples=20_000)
    assert rep.passed
    assert rep.bound >= -1e-12


def test_gronwall_contraction_cases():
    dom, p, fam, params = default_model(n_cells=64)
    rng = np.random.default_rng(2)
    u0, v0 = smoothed_random_fields(rng, dom, 2, 1.0)
    rep = check_gronwall_contraction(u0, v0, 1.0, params, dom, p, fam,
                                     tau=1 / 256)
    assert rep.passed
    # identical data: the difference stays identically zero
    rep0 = check_gronwall_contraction(u0, u0, 0.5, params, dom, p, fam,
                                      tau=1 / 256)
    assert rep0.passed


def test_gronwall_kappa_zero_is_nonexpansive():
    dom, p, fam, params = default_model(n_cells=64, kappa=0.0)
    rng = np.random.default_rng(3)
    u0, v0 = smoothed_random_fields(rng, dom, 2, 1.0)
    rep = check_gronwall_contraction(u0, v0, 1.0, params, dom, p, fam,
                                     tau=1 / 256)
    assert rep.passed and rep.margin >= 0.0


def test_integral_bounds_and_sup_report():
    dom, p, fam, params = default_model(n_cells=64, kappa=0.0)
    # kappa = 0 leaves no exp(2 L_B T) slack, so the early decay of the
    # gradient modular must be resolved: gentle data, fine sampling
    u0 = dom.nodal(0.3 * np.sin(np.pi * dom.nodes))
    traj = evolve(u0, 1.0, 1 / 256, params, dom, p, fam, 1 / 64)
    rep = check_integral_bounds(traj, params, dom, p, fam)
    assert rep.passed and rep.margin >= 0.0
    sups = check_sup_bounds(traj, params, dom, p, fam)
    assert sups["sup_u"] <= 0.5  # decaying flow keeps the sup of the data
    zero = evolve(dom.nodal(np.zeros(dom.N + 1)), 0.5, 1 / 256, params,
                  dom, p, fam, 1 / 16)
    z = check_sup_bounds(zero, params, dom, p, fam)
    assert z["sup_u"] == 0.0 and z["sup_grad"] == 0.0


def test_monotone_coercive_probe():
    dom, p, fam, params = default_model(n_cells=64)
    rep = check_monotone_coercive(np.random.default_rng(11), 12, params,
                                  dom, p, fam)
    assert rep.passed
    with pytest.raises(ValueError):
        check_monotone_coercive(np.random.default_rng(0), 5, params,
                                dom, p, fam)


def test_lipschitz_and_holder_small_budget():
    dom, p, fam, params = default_model(n_cells=64)
    consts = compute_constants(params, dom, p, fam, seed=0)
    rng = np.random.default_rng(13)
    starts = []
    from pxflow.checks import absorbed_states

    starts = absorbed_states(rng, 4, params, dom, p, fam, transient=2.0,
                             tau=1 / 256)
    lip = estimate_L1_lipschitz(starts, consts, params, dom, p, fam,
                                tau=1 / 256, sample_dt=1 / 32)
    assert lip.passed
    assert lip.empirical <= consts.rho1

    chi1 = sample_l_trajectory(starts[0], params, dom, p, fam, 1 / 256, 1 / 32)
    chi2 = sample_l_trajectory(starts[1], params, dom, p, fam, 1 / 256, 1 / 32)
    hol = check_shift_holder(chi1, chi2, 1 / 8, 5 / 8, consts, params,
                             dom, p, fam)
    assert hol.passed

"""Variable-exponent building blocks: modular, Luxemburg norm, and the
elementary inequalities they must satisfy."""

import numpy as np
import pytest

from pxflow.domain import build_domain
from pxflow.varexp import (
    GridMismatchError,
    check_norm_modular_bounds,
    check_power_inequality,
    luxemburg_norm,
    modular,
)


def make_space(N=1000, p_func=None):
    dom = build_domain(N, [(0.4, 0.6)])
    if p_func is None:
        p_func = lambda x: np.full_like(np.asarray(x, dtype=float), 3.0)
    return dom, dom.exponent_field(p_func), dom.quadrature()


def const_p(c):
    return lambda x: np.full_like(np.asarray(x, dtype=float), c)


def test_modular_zero_field():
    dom, p, w = make_space()
    assert modular(dom.nodal(np.zeros(dom.N + 1)), p, w) == 0.0


def test_modular_constant_cube():
    # p = 3, v = 2: integrand 2^3 over unit measure
    dom, p, w = make_space()
    v = dom.nodal(np.full(dom.N + 1, 2.0))
    assert modular(v, p, w) == pytest.approx(8.0, rel=1e-12)


def test_modular_quartic_oracle():
    # closed form: integral of x^4 over (0,1) is 1/5
    dom, p, w = make_space(N=1000, p_func=const_p(4.0))
    v = dom.nodal(dom.nodes.copy())
    assert modular(v, p, w) == pytest.approx(0.2, abs=1e-4)


def test_luxemburg_zero_and_constant():
    dom, p, w = make_space(p_func=const_p(4.0))
    assert luxemburg_norm(dom.nodal(np.zeros(dom.N + 1)), p, w) == 0.0
    one = dom.nodal(np.ones(dom.N + 1))
    assert luxemburg_norm(one, p, w) == pytest.approx(1.0, rel=1e-10)
    two = dom.nodal(np.full(dom.N + 1, 2.0))
    assert luxemburg_norm(two, p, w) == pytest.approx(2.0, rel=1e-10)


def test_luxemburg_constant_exponent_is_classical_norm():
    rng = np.random.default_rng(11)
    for pc in (2.5, 3.0, 4.0, 6.0):
        dom, p, w = make_space(N=200, p_func=const_p(pc))
        v = dom.nodal(rng.normal(size=dom.N + 1))
        classical = (np.sum(w.node_weights * np.abs(v.values) ** pc)) ** (1.0 / pc)
        assert luxemburg_norm(v, p, w) == pytest.approx(classical, rel=1e-10)


def test_luxemburg_bisection_residual():
    rng = np.random.default_rng(5)
    dom, p, w = make_space(N=200, p_func=lambda x: 3.0 + np.sin(np.pi * np.asarray(x)))
    for _ in range(20):
        v = dom.nodal(rng.normal(size=dom.N + 1) * rng.uniform(0.1, 10.0))
        s = luxemburg_norm(v, p, w)
        scaled = dom.nodal(v.values / s)
        assert abs(modular(scaled, p, w) - 1.0) <= 1e-10


def test_modular_scaling_sandwich():
    # c^{p-} rho(v) <= rho(cv) <= c^{p+} rho(v) for c >= 1
    rng = np.random.default_rng(7)
    dom, p, w = make_space(N=128, p_func=lambda x: 3.0 + np.asarray(x, dtype=float))
    for _ in range(50):
        v = dom.nodal(rng.normal(size=dom.N + 1))
        c = rng.uniform(1.0, 5.0)
        r = modular(v, p, w)
        rc = modular(dom.nodal(c * v.values), p, w)
        assert c ** p.p_minus * r <= rc * (1 + 1e-12)
        assert rc <= c ** p.p_plus * r * (1 + 1e-12)


def test_norm_modular_bounds_constant_exponent():
    dom, p, w = make_space(N=128)
    rng = np.random.default_rng(3)
    v = dom.nodal(rng.normal(size=dom.N + 1))
    lo, hi = check_norm_modular_bounds(v, p, w)
    # with p- = p+ the sandwich degenerates to an identity
    assert abs(lo) <= 1e-10 and abs(hi) <= 1e-10


def test_norm_modular_bounds_unit_modular():
    # p(x) = 3 + x, v = 1: rho = 1 pins L = U = n = 1
    dom = build_domain(1000, [(0.4, 0.6)])
    p = dom.exponent_field(lambda x: 3.0 + np.asarray(x, dtype=float))
    w = dom.quadrature()
    v = dom.nodal(np.ones(dom.N + 1))
    lo, hi = check_norm_modular_bounds(v, p, w)
    assert lo >= -1e-10 and hi >= -1e-10


def test_norm_modular_bounds_random_sweep():
    rng = np.random.default_rng(19)
    dom = build_domain(100, [(0.4, 0.6)])
    w = dom.quadrature()
    for _ in range(100):
        a, b = rng.uniform(2.1, 5.0), rng.uniform(0.0, 2.0)
        p = dom.exponent_field(
            lambda x, a=a, b=b: a + b * np.sin(2 * np.pi * np.asarray(x)) ** 2)
        v = dom.nodal(rng.normal(size=dom.N + 1) * rng.uniform(0.05, 20.0))
        lo, hi = check_norm_modular_bounds(v, p, w)
        assert lo >= -1e-10 and hi >= -1e-10


def test_norm_modular_bounds_rejects_zero_field():
    dom, p, w = make_space()
    with pytest.raises(ValueError):
        check_norm_modular_bounds(dom.nodal(np.zeros(dom.N + 1)), p, w)


def test_power_inequality_hand_values():
    lo, hi = check_power_inequality(0.0, 0.0, 2.0, 2.0)
    assert lo == 0.0 and hi == 0.0
    lo, hi = check_power_inequality(1.0, 1.0, 2.0, 2.0)
    # sum 2, lower 1, upper 8
    assert lo == pytest.approx(1.0, abs=1e-12)
    assert hi == pytest.approx(6.0, abs=1e-12)


def test_power_inequality_sweep():
    rng = np.random.default_rng(23)
    for _ in range(10_000):
        a, b = rng.uniform(0.0, 5.0, 2)
        beta = rng.uniform(0.0, 4.0)
        alpha = beta + rng.uniform(0.0, 3.0)
        lo, hi = check_power_inequality(a, b, alpha, beta)
        assert lo >= -1e-12 and hi >= -1e-12


def test_power_inequality_precondition():
    with pytest.raises(ValueError):
        check_power_inequality(1.0, 1.0, 1.0, 2.0)


def test_exponent_floor_enforced():
    dom = build_domain(64, [(0.4, 0.6)])
    with pytest.raises(ValueError):
        dom.exponent_field(const_p(2.0))


def test_grid_mismatch_detected():
    dom_a = build_domain(64, [(0.4, 0.6)])
    dom_b = build_domain(128, [(0.4, 0.6)])
    v = dom_a.nodal(np.ones(dom_a.N + 1))
    p_b = dom_b.exponent_field(const_p(3.0))
    with pytest.raises(GridMismatchError):
        modular(v, p_b, dom_b.quadrature())

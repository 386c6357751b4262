"""Closed-form constants of the a-priori estimates, computed from the model
configuration plus a small budget of probe fields and probe trajectories.

The chain runs: a coercivity constant from probes (clamped by the provable
energy floor min{m0, 1}), an epsilon picked on a log grid to keep the
dissipation gap positive while minimizing the absorbing radius, then the
cascade delta, gamma_tilde, k1..k4, r0, r_V, and finally the trajectory-space
Lipschitz and Hoelder constants rho1 and c3.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np
from scipy.linalg import solve_banded

from .domain import Domain1D, DiffusionFamily, l2_norm
from .semiflow import EnergyParams, System, _stiffness_plus_mass, build_system
from .varexp import ExponentField, NodalField, luxemburg_norm

__all__ = [
    "TheoreticalConstants",
    "MarginReport",
    "ConstantsUnavailableError",
    "compute_constants",
    "rho1_closed_form",
    "smoothed_random_fields",
]


class ConstantsUnavailableError(RuntimeError):
    """The epsilon search found no positive dissipation gap."""


@dataclass(frozen=True)
class MarginReport:
    """Outcome of one inequality check: bound, empirical value and margin."""

    name: str
    bound: float
    empirical: float
    margin: float
    passed: bool
    tolerance: float
    metadata: dict

    @staticmethod
    def from_values(name, bound, empirical, tolerance=1e-6, metadata=None):
        margin = bound - empirical
        scale = max(1.0, abs(bound), abs(empirical))
        return MarginReport(name, float(bound), float(empirical), float(margin),
                            bool(margin >= -tolerance * scale), float(tolerance),
                            metadata or {})

    def to_dict(self):
        return {
            "name": self.name,
            "bound": self.bound,
            "empirical": self.empirical,
            "margin": self.margin,
            "pass": self.passed,
            "tolerance": self.tolerance,
            "metadata": self.metadata,
        }


@dataclass(frozen=True)
class TheoreticalConstants:
    L_B: float
    m0: float
    M0: float
    eta: float
    p_minus: float
    p_plus: float
    B0_norm: float
    C_coerc: float
    epsilon_star: float
    theta: float
    theta_conj: float
    q: float
    gamma_small: float
    delta: float
    gamma_tilde: float
    k1: float
    k2: float
    k3: float
    k4: float
    r0: float
    r_V: float
    c_emb: float
    beta_lip: float
    alpha_poincare: float
    alpha1_embed: float
    gamma_big: float
    rho1: float
    c1_T: float
    c2_T: float
    c3: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def smoothed_random_fields(rng, dom: Domain1D, count: int, amplitude: float):
    """Random nodal Dirichlet fields in [-R, R], one Laplacian-averaging pass."""
    fields = []
    for _ in range(count):
        v = rng.uniform(-amplitude, amplitude, dom.N + 1)
        v[1:-1] = 0.25 * v[:-2] + 0.5 * v[1:-1] + 0.25 * v[2:]
        v[0] = v[-1] = 0.0
        fields.append(NodalField(v, dom.grid_id))
    return fields


def _v_norm(sys: System, dofs, p: ExponentField, dom: Domain1D):
    """Discrete V-norm: Luxemburg norm of u plus Luxemburg norm of grad u."""
    from .varexp import _luxemburg_values

    u = sys.space.embed(dofs)
    g = np.diff(u) / dom.h
    nu = _luxemburg_values(u, p.node_values, sys.node_w, p.p_minus, p.p_plus)
    cw = np.full(dom.N, dom.h)
    ng = _luxemburg_values(g, p.cell_values, cw, p.p_minus, p.p_plus)
    return nu + ng


def _poincare_alpha(sys: System) -> float:
    """Largest singular value of the H^1_0-seminorm -> L^2 embedding, by
    inverse power iteration on the stiffness."""
    K = _stiffness_plus_mass(sys).copy()
    K[1] -= sys.W  # remove the mass part, keep pure stiffness
    v = np.sin(np.pi * np.arange(1, sys.n_dof + 1) / (sys.n_dof + 1))
    mu = 0.0
    for _ in range(200):
        r = sys.W * v
        z = solve_banded((1, 1), K, r)
        mu_new = float(np.dot(z, sys.W * z) / max(np.dot(z, r), 1e-300))
        z /= np.sqrt(np.dot(sys.W * z, z))
        if abs(mu_new - mu) <= 1e-12 * max(1.0, mu_new):
            v = z
            mu = mu_new
            break
        v, mu = z, mu_new
    # mu approximates max ||u||_H^2 / ||grad u||_H^2
    return float(np.sqrt(mu))


def _k1_chain(C_coerc, p_minus, p_plus, theta, theta_conj, q, c1, c2, c_emb, eps):
    gamma_small = C_coerc / 2.0**p_plus - eps**theta / theta - eps**p_minus / p_minus
    if gamma_small <= 0.0:
        return gamma_small, None, None, None
    delta = 0.0
    if c1 > 0.0:
        delta += (2.0 / theta_conj) * (c1 / eps) ** theta_conj
    if c2 > 0.0:
        delta += (2.0 / q) * (c2 / eps) ** q
    gamma_tilde = 2.0 * gamma_small / c_emb**p_minus
    k1 = ((delta / gamma_tilde) ** (1.0 / p_minus)
          + (gamma_tilde * (p_minus - 2.0) / 2.0) ** (-1.0 / (p_minus - 2.0)))
    return gamma_small, delta, gamma_tilde, k1


def rho1_closed_form(alpha1: float, gamma_big: float, L_B: float, m0: float,
                     eta: float) -> float:
    """Trajectory-space Lipschitz constant of the unit shift:
    (1 + alpha1 * gamma) * sqrt(exp(4 L_B) / (2 m0 eta))."""
    return (1.0 + alpha1 * gamma_big) * float(
        np.sqrt(np.exp(4.0 * L_B) / (2.0 * m0 * eta)))


def compute_constants(params: EnergyParams, dom: Domain1D, p: ExponentField,
                      fam: DiffusionFamily, probe_budget: int = 32,
                      seed: int = 0) -> TheoreticalConstants:
    rng = np.random.default_rng(seed)
    sys = build_system(params, dom, p, fam)
    w = dom.quadrature()

    g = params.forcing if params.forcing is not None else np.zeros(dom.N + 1)
    B0 = l2_norm(NodalField(g, dom.grid_id), w)

    p_minus, p_plus = p.p_minus, p.p_plus
    theta = p_minus / 2.0
    theta_conj = theta / (theta - 1.0)
    q = p_minus / (p_minus - 1.0)
    c_emb = 2.0  # |Omega| + 1
    c1 = params.L_B * c_emb**2
    c2 = c_emb * B0
    floor = min(fam.m0, 1.0)

    # coercivity probes: min <Au, u> 2^{p+} / ||u||_V^{p-} over fields with
    # ||u||_V >= 1, clamped by the provable floor
    probes = smoothed_random_fields(rng, dom, probe_budget, 2.0)
    quotients = []
    for f in probes:
        dofs = sys.unwrap(f)
        vn = _v_norm(sys, dofs, p, dom)
        if vn < 1.0:
            dofs = dofs / max(vn, 1e-12)
            vn = _v_norm(sys, dofs, p, dom)
        pairing = sys.h_inner(sys.A(dofs), dofs)
        quotients.append(pairing * 2.0**p_plus / vn**p_minus)
    C_coerc = min(min(quotients), floor)

    # epsilon on a 61-point log grid, smallest resulting k1 wins
    best = None
    for eps in np.logspace(-6.0, 0.0, 61):
        gam, delta, gamma_tilde, k1 = _k1_chain(
            C_coerc, p_minus, p_plus, theta, theta_conj, q, c1, c2, c_emb, eps)
        if k1 is None:
            continue
        if best is None or k1 < best[4]:
            best = (eps, gam, delta, gamma_tilde, k1)
    if best is None:
        raise ConstantsUnavailableError(
            f"no epsilon gives a positive dissipation gap "
            f"(C_coerc={C_coerc:.3e}, p_plus={p_plus})")
    eps, gamma_small, delta, gamma_tilde, k1 = best

    r0 = max(k1, c_emb)
    k2 = params.L_B * r0 + B0
    k3 = 0.5 * r0**2 + k2 * r0
    k4 = k3 + 0.5 * k2**2
    base = 2.0**p_plus * p_plus * k4 / floor
    r_V = max(base ** (1.0 / p_plus), base ** (1.0 / p_minus), 1.0)

    # probe trajectories from inside the absorbing proxy for the local
    # Lipschitz range, the embedding ratio and the time-derivative bound
    n_traj = max(4, probe_budget // 8)
    tau = 1.0 / 256
    sup_u = sup_g = 0.0
    ut_norms = []
    for f in smoothed_random_fields(rng, dom, n_traj, 1.0):
        dofs = sys.unwrap(f)
        path = sys.evolve_dofs(dofs, 256, tau, 16)
        prev = None
        sq = 0.0
        for s in path:
            u = sys.space.embed(s)
            sup_u = max(sup_u, float(np.max(np.abs(u))))
            sup_g = max(sup_g, float(np.max(np.abs(np.diff(u) / dom.h))))
            if prev is not None:
                dt = tau * 16
                sq += dt * np.sum(sys.W * ((s - prev) / dt) ** 2)
            prev = s
        ut_norms.append(np.sqrt(sq))
    R = max(1.0, sup_u, sup_g)
    beta = (p_plus - 1.0) * R ** (p_plus - 2.0)

    alpha = _poincare_alpha(sys)
    ratios = []
    for f in probes:
        lux = luxemburg_norm(f, p, w)
        if lux > 0.0:
            ratios.append(l2_norm(f, w) / lux)
    alpha1 = max(ratios)

    gamma_big = fam.M0 * (beta + params.eta) + alpha**2 * (beta + params.L_B)
    rho1 = rho1_closed_form(alpha1, gamma_big, params.L_B, fam.m0, params.eta)
    c1_T = float(max(ut_norms))
    c2_T = float(np.exp(params.L_B))
    c3 = 2.0 * (c1_T + c2_T)

    return TheoreticalConstants(
        L_B=params.L_B, m0=fam.m0, M0=fam.M0, eta=params.eta,
        p_minus=p_minus, p_plus=p_plus, B0_norm=B0, C_coerc=float(C_coerc),
        epsilon_star=float(eps), theta=theta, theta_conj=theta_conj, q=q,
        gamma_small=float(gamma_small), delta=float(delta),
        gamma_tilde=float(gamma_tilde), k1=float(k1), k2=float(k2),
        k3=float(k3), k4=float(k4), r0=float(r0), r_V=float(r_V), c_emb=c_emb,
        beta_lip=float(beta), alpha_poincare=float(alpha),
        alpha1_embed=float(alpha1), gamma_big=float(gamma_big),
        rho1=float(rho1), c1_T=c1_T, c2_T=c2_T, c3=float(c3))

"""Empirical verification of the a-priori inequalities against simulated
trajectories.  Each check returns a MarginReport whose margin is
bound - empirical; negative margins beyond the tolerance fail."""

from __future__ import annotations

import numpy as np

from .constants import MarginReport, TheoreticalConstants, smoothed_random_fields
from .domain import Domain1D, DiffusionFamily
from .semiflow import (EnergyParams, Trajectory, apply_shift, build_system,
                       sample_l_trajectory, trajectory_metrics)
from .varexp import ExponentField

__all__ = [
    "check_tartar",
    "tartar_margin",
    "check_gronwall_contraction",
    "check_absorbing",
    "check_integral_bounds",
    "check_sup_bounds",
    "estimate_L1_lipschitz",
    "check_shift_holder",
    "check_monotone_coercive",
    "absorbed_states",
]


def tartar_margin(x, y, pval: float) -> float:
    """Pointwise margin of the strong monotonicity inequality for the
    p-power map, vectors allowed."""
    if pval <= 1.0:
        raise ValueError(f"exponent must exceed 1, got {pval}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    ax = np.linalg.norm(x)
    ay = np.linalg.norm(y)
    diff = x - y
    ad = np.linalg.norm(diff)
    lhs = float(np.dot(ax ** (pval - 2.0) * x - ay ** (pval - 2.0) * y, diff))
    if pval >= 2.0:
        rhs = 2.0 ** (3.0 - pval) / pval * ad**pval
    else:
        if ad == 0.0:
            return 0.0
        rhs = (pval - 1.0) * ad**2 / (ax**pval + ay**pval) ** (2.0 - pval)
    return lhs - rhs


def check_tartar(rng, n_samples: int = 100_000, dim: int = 3,
                 p_range=(2.0, 6.0), tolerance: float = 1e-12) -> MarginReport:
    worst = np.inf
    for _ in range(n_samples):
        pv = rng.uniform(*p_range)
        x = rng.normal(size=dim)
        y = rng.normal(size=dim)
        worst = min(worst, tartar_margin(x, y, pv))
    return MarginReport.from_values(
        "tartar_inequality", bound=worst, empirical=0.0, tolerance=tolerance,
        metadata={"n_samples": n_samples, "dim": dim})


def check_gronwall_contraction(u0, v0, T: float, params: EnergyParams,
                               dom: Domain1D, p: ExponentField,
                               fam: DiffusionFamily, tau: float = 1.0 / 512,
                               sample_dt: float = 1.0 / 32,
                               tolerance: float = 1e-6) -> MarginReport:
    """||w(t)||^2 <= ||w(0)||^2 exp(2 L_B t) along a trajectory pair."""
    sys = build_system(params, dom, p, fam)
    a = sys.unwrap(u0)
    b = sys.unwrap(v0)
    w0_sq = sys.h_norm(a - b) ** 2
    worst = np.inf
    n = int(round(T / sample_dt))
    per = int(round(sample_dt / tau))
    t = 0.0
    for _ in range(n):
        for _ in range(per):
            a, _ = sys.prox_step(a, tau)
            b, _ = sys.prox_step(b, tau)
        t += sample_dt
        bound = w0_sq * np.exp(2.0 * params.L_B * t) * (1.0 + tolerance)
        worst = min(worst, bound - sys.h_norm(a - b) ** 2)
    return MarginReport.from_values(
        "gronwall_contraction", bound=worst, empirical=0.0,
        tolerance=tolerance, metadata={"T": T, "L_B": params.L_B})


def check_absorbing(initial_data, consts: TheoreticalConstants,
                    params: EnergyParams, dom: Domain1D, p: ExponentField,
                    fam: DiffusionFamily, T: float = 5.0,
                    tau: float = 1.0 / 512, sample_dt: float = 0.25,
                    tolerance: float = 1e-6) -> MarginReport:
    """Trajectories enter the r0-ball in H by t = 1 and the r_V-ball in the
    V-norm by t = 2, for arbitrary initial data."""
    from .constants import _v_norm

    sys = build_system(params, dom, p, fam)
    worst_h = np.inf
    worst_v = np.inf
    per = int(round(sample_dt / tau))
    n = int(round(T / sample_dt))
    for u0 in initial_data:
        dofs = sys.unwrap(u0)
        t = 0.0
        for _ in range(n):
            for _ in range(per):
                dofs, _ = sys.prox_step(dofs, tau)
            t += sample_dt
            if t >= 1.0 - 1e-9:
                worst_h = min(worst_h, consts.r0 - sys.h_norm(dofs))
            if t >= 2.0 - 1e-9:
                worst_v = min(worst_v, consts.r_V - _v_norm(sys, dofs, p, dom))
    return MarginReport.from_values(
        "absorbing_set", bound=min(worst_h, worst_v), empirical=0.0,
        tolerance=tolerance,
        metadata={"r0": consts.r0, "r_V": consts.r_V,
                  "worst_H_margin": worst_h, "worst_V_margin": worst_v})


def _space_time_modulars(traj: Trajectory, params, dom, p, fam):
    """Trapezoid-in-time integrals of the zero-order and gradient modulars;
    gradient over Omega_1 for limit trajectories, all of Omega otherwise."""
    sys = build_system(params, dom, p, fam)
    dt = traj.dt_sample
    n = len(traj.samples)
    tw = np.full(n, dt)
    tw[0] = tw[-1] = 0.5 * dt
    mod_u = 0.0
    mod_g = 0.0
    if params.is_limit:
        cell_mask = dom.cell_subdomain < 0
    else:
        cell_mask = np.ones(dom.N, dtype=bool)
    for wt, s in zip(tw, traj.samples):
        u = sys.space.embed(sys.unwrap(s))
        mod_u += wt * np.sum(sys.node_w * np.abs(u) ** p.node_values)
        g = np.diff(u) / dom.h
        mod_g += wt * np.sum(dom.h * (np.abs(g) ** p.cell_values)[cell_mask])
    return float(mod_u), float(mod_g)


def check_integral_bounds(traj: Trajectory, params: EnergyParams,
                          dom: Domain1D, p: ExponentField,
                          fam: DiffusionFamily,
                          tolerance: float = 1e-6) -> MarginReport:
    """Space-time modular bounds: the |u|^{p(x)} integral against
    exp(2 L_B T) ||u0||^2 / 2 and the gradient integral against the same
    with an extra 1/m0."""
    sys = build_system(params, dom, p, fam)
    u0_sq = sys.h_norm(sys.unwrap(traj.samples[0])) ** 2
    T = traj.t_final - traj.t0
    env = np.exp(2.0 * params.L_B * T) * u0_sq
    bound_u = 0.5 * env
    bound_g = env / (2.0 * fam.m0)
    mod_u, mod_g = _space_time_modulars(traj, params, dom, p, fam)
    return MarginReport.from_values(
        "space_time_integral_bounds",
        bound=min(bound_u - mod_u, bound_g - mod_g), empirical=0.0,
        tolerance=tolerance,
        metadata={"T": T, "modular_u": mod_u, "bound_u": bound_u,
                  "modular_grad": mod_g, "bound_grad": bound_g})


def check_sup_bounds(traj: Trajectory, params: EnergyParams, dom: Domain1D,
                     p: ExponentField, fam: DiffusionFamily) -> dict:
    """Reports sup |u| and sup |grad u| over the trajectory.  Deliberately
    non-asserting; the pointwise unit bounds are only recorded."""
    sys = build_system(params, dom, p, fam)
    sup_u = sup_g = 0.0
    for s in traj.samples:
        u = sys.space.embed(sys.unwrap(s))
        sup_u = max(sup_u, float(np.max(np.abs(u))))
        sup_g = max(sup_g, float(np.max(np.abs(np.diff(u) / dom.h))))
    return {"sup_u": sup_u, "sup_grad": sup_g}


def absorbed_states(rng, count, params, dom, p, fam, amplitude=1.0,
                    transient=2.0, tau=1.0 / 512):
    """States obtained by running random data past the absorbing times;
    proxies for members of the positively invariant set."""
    sys = build_system(params, dom, p, fam)
    out = []
    for f in smoothed_random_fields(rng, dom, count, amplitude):
        dofs = sys.unwrap(f)
        n = int(round(transient / tau))
        for _ in range(n):
            dofs, _ = sys.prox_step(dofs, tau)
        out.append(sys.wrap(dofs))
    return out


def estimate_L1_lipschitz(start_states, consts: TheoreticalConstants,
                          params: EnergyParams, dom: Domain1D,
                          p: ExponentField, fam: DiffusionFamily,
                          tau: float = 1.0 / 512, sample_dt: float = 1.0 / 64,
                          tolerance: float = 1e-6) -> MarginReport:
    """Empirical Lipschitz ratio of the unit shift from L^2(0,1;H) into the
    trajectory space, compared with its closed-form bound rho1."""
    ratios = []
    skipped = 0
    pairs = list(zip(start_states[0::2], start_states[1::2]))
    for ua, ub in pairs:
        chi1 = sample_l_trajectory(ua, params, dom, p, fam, tau, sample_dt)
        chi2 = sample_l_trajectory(ub, params, dom, p, fam, tau, sample_dt)
        d0 = trajectory_metrics(chi1, chi2, params, dom, p, fam)["dist_L2H"]
        if d0 <= 1e-14:
            skipped += 1
            continue
        s1 = apply_shift(chi1, 1.0, params, dom, p, fam)
        s2 = apply_shift(chi2, 1.0, params, dom, p, fam)
        dY = trajectory_metrics(s1, s2, params, dom, p, fam)["dist_Y"]
        ratios.append(dY / d0)
    worst = max(ratios)
    return MarginReport.from_values(
        "shift_lipschitz_bound", bound=consts.rho1, empirical=worst,
        tolerance=tolerance,
        metadata={"pairs": len(pairs), "skipped_coincident": skipped,
                  "max_ratio": worst})


def check_shift_holder(chi1: Trajectory, chi2: Trajectory, s: float, t: float,
                       consts: TheoreticalConstants, params: EnergyParams,
                       dom: Domain1D, p: ExponentField, fam: DiffusionFamily,
                       tolerance: float = 1e-6) -> MarginReport:
    """||L(s)chi1 - L(t)chi2|| <= c3 (|s-t|^{1/2} + ||chi1 - chi2||) in
    L^2(0,1;H)."""
    ls = apply_shift(chi1, s, params, dom, p, fam)
    lt = apply_shift(chi2, t, params, dom, p, fam)
    lhs = trajectory_metrics(ls, lt, params, dom, p, fam)["dist_L2H"]
    d0 = trajectory_metrics(chi1, chi2, params, dom, p, fam)["dist_L2H"]
    bound = consts.c3 * (np.sqrt(abs(s - t)) + d0)
    return MarginReport.from_values(
        "shift_holder_bound", bound=bound, empirical=lhs, tolerance=tolerance,
        metadata={"s": s, "t": t, "c3": consts.c3})


def check_monotone_coercive(rng, probe_count: int, params: EnergyParams,
                            dom: Domain1D, p: ExponentField,
                            fam: DiffusionFamily,
                            tolerance: float = 1e-10) -> MarginReport:
    """Monotonicity of the elliptic operator on random pairs plus growth of
    the coercivity quotient along a scaling ray."""
    from .constants import _v_norm

    if probe_count < 10:
        raise ValueError(f"need at least 10 probes, got {probe_count}")
    sys = build_system(params, dom, p, fam)
    fields = smoothed_random_fields(rng, dom, 2 * probe_count, 2.0)
    worst = np.inf
    for ua, ub in zip(fields[0::2], fields[1::2]):
        a, b = sys.unwrap(ua), sys.unwrap(ub)
        worst = min(worst, sys.h_inner(sys.A(a) - sys.A(b), a - b))
    base = sys.unwrap(fields[0])
    base = base / max(_v_norm(sys, base, p, dom), 1e-12)
    quotients = []
    for c in (1.0, 2.0, 4.0, 8.0):
        z = c * base
        quotients.append(sys.h_inner(sys.A(z), z) / _v_norm(sys, z, p, dom))
    increasing = all(b > a for a, b in zip(quotients, quotients[1:]))
    return MarginReport.from_values(
        "monotone_coercive", bound=worst if increasing else -1.0,
        empirical=0.0, tolerance=tolerance,
        metadata={"coercivity_quotients": quotients,
                  "quotients_increasing": increasing,
                  "probe_count": probe_count})

"""Command-line surface: `pxflow <command> [--config FILE] [--seed N]
[--out DIR]` with commands simulate, verify, constants, attractor,
limit-study and ltraj."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import attractor as attr
from . import checks
from .config import ConfigError, RunConfig, parse_config
from .constants import compute_constants, smoothed_random_fields
from .reporting import line_plot, write_csv, write_json, write_trajectory_csv
from .semiflow import evolve, sample_l_trajectory
from .varexp import check_norm_modular_bounds, check_power_inequality

COMMANDS = ("simulate", "verify", "constants", "attractor", "limit-study", "ltraj")


def _load(args):
    if args.config:
        cfg = parse_config(Path(args.config).read_text())
    else:
        cfg = RunConfig().validate()
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def _model(cfg: RunConfig):
    dom = cfg.build_domain()
    p = cfg.build_exponent(dom)
    fam = cfg.build_diffusion(dom)
    params = cfg.energy_params(dom)
    return dom, p, fam, params


def cmd_simulate(cfg: RunConfig, out: Path) -> int:
    dom, p, fam, params = _model(cfg)
    rng = np.random.default_rng(cfg.seed)
    u0 = smoothed_random_fields(rng, dom, 1, cfg.amplitude)[0]
    if params.is_limit:
        from .semiflow import project_to_limit_space
        u0 = project_to_limit_space(u0, dom)
    T = cfg.transient + cfg.t_sample
    traj = evolve(u0, T, cfg.tau, params, dom, p, fam, cfg.sample_dt)
    write_trajectory_csv(out / "trajectory.csv", traj, dom)

    from .semiflow import build_system, energy_phi
    sys_ = build_system(params, dom, p, fam)
    times = traj.times()
    energies = [sys_.phi(sys_.unwrap(s)) for s in traj.samples]
    norms = [sys_.h_norm(sys_.unwrap(s)) for s in traj.samples]
    write_csv(out / "timeseries.csv", ["t", "energy", "h_norm"],
              list(zip(times, energies, norms)))
    line_plot(out / "plots" / "energy.svg", times, {"energy": energies},
              "t", "energy", "Energy along the flow", logy=False)
    line_plot(out / "plots" / "h_norm.svg", times, {"||u(t)||": norms},
              "t", "H norm", "Solution norm along the flow")
    return 0


def _verify_reports(cfg: RunConfig):
    dom, p, fam, params = _model(cfg)
    rng = np.random.default_rng(cfg.seed)
    w = dom.quadrature()
    reports = []

    # norm-modular sandwich on random fields
    worst = np.inf
    for f in smoothed_random_fields(rng, dom, 100, 2.0):
        lo, hi = check_norm_modular_bounds(f, p, w)
        worst = min(worst, lo, hi)
    reports.append(checks.MarginReport.from_values(
        "norm_modular_bounds", bound=worst, empirical=0.0, tolerance=1e-10,
        metadata={"cases": 100}))

    # two-sided power inequality sweep
    worst = np.inf
    for _ in range(10_000):
        a, b = rng.uniform(0.0, 3.0, 2)
        beta = rng.uniform(0.0, 4.0)
        alpha = beta + rng.uniform(0.0, 3.0)
        lo, hi = check_power_inequality(a, b, alpha, beta)
        worst = min(worst, lo, hi)
    reports.append(checks.MarginReport.from_values(
        "power_inequality", bound=worst, empirical=0.0, tolerance=1e-12,
        metadata={"cases": 10_000}))

    reports.append(checks.check_tartar(rng, n_samples=100_000))

    # Gronwall envelope on trajectory pairs
    pairs = smoothed_random_fields(rng, dom, 40, cfg.amplitude)
    worst = np.inf
    meta = None
    for ua, ub in zip(pairs[0::2], pairs[1::2]):
        rep = checks.check_gronwall_contraction(
            ua, ub, 2.0, params, dom, p, fam, tau=cfg.tau)
        worst = min(worst, rep.margin)
        meta = rep.metadata
    reports.append(checks.MarginReport.from_values(
        "gronwall_contraction", bound=worst, empirical=0.0, tolerance=1e-6,
        metadata={"pairs": 20, **(meta or {})}))

    reports.append(checks.check_monotone_coercive(rng, 25, params, dom, p, fam))
    return reports


def cmd_verify(cfg: RunConfig, out: Path) -> int:
    reports = _verify_reports(cfg)
    write_json(out / "report.json",
               [{**r.to_dict(), "config_hash": hash_config(cfg),
                 "seed": cfg.seed} for r in reports])
    names = [r.name for r in reports]
    margins = [r.margin for r in reports]
    fig_margins(out, names, margins)
    ok = all(r.passed for r in reports)
    for r in reports:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: margin {r.margin:.3e}")
    print("verification " + ("passed" if ok else "FAILED"))
    return 0 if ok else 1


def fig_margins(out: Path, names, margins):
    import matplotlib.pyplot as plt

    from .reporting import save_figure
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.barh(range(len(names)), margins)
    ax.set_yticks(range(len(names)), names)
    ax.set_xlabel("margin (bound - empirical)")
    ax.set_title("Inequality margins")
    fig.tight_layout()
    save_figure(fig, out / "plots" / "margins.svg")


def hash_config(cfg: RunConfig) -> str:
    import hashlib

    from .config import serialize_config
    return hashlib.sha256(serialize_config(cfg).encode()).hexdigest()[:16]


def cmd_constants(cfg: RunConfig, out: Path) -> int:
    dom, p, fam, params = _model(cfg)
    consts = compute_constants(params, dom, p, fam, seed=cfg.seed)
    (out / "constants.json").parent.mkdir(parents=True, exist_ok=True)
    (out / "constants.json").write_text(consts.to_json() + "\n")
    print(f"r0 = {consts.r0:.6g}, r_V = {consts.r_V:.6g}, "
          f"rho1 = {consts.rho1:.6g}, c3 = {consts.c3:.6g}")
    return 0


def cmd_attractor(cfg: RunConfig, out: Path) -> int:
    dom, p, fam, params = _model(cfg)
    rng = np.random.default_rng(cfg.seed)
    cloud = attr.approximate_attractor(
        rng, cfg.ensemble, max(2.0, cfg.transient), cfg.t_sample,
        params, dom, p, fam, amplitude=cfg.amplitude, tau=cfg.tau)
    header = ["member", "t"] + [f"dof_{k}" for k in range(cloud.points.shape[1])]
    rows = [[m, t, *pt] for m, t, pt in
            zip(cloud.members, cloud.times, cloud.points)]
    write_csv(out / "attractor_cloud.csv", header, rows)
    if len(cloud.points) >= 100 and cloud.diameter() > 1e-12:
        dim = attr.fractal_dimension(cloud, "correlation")
    else:
        dim = attr.fractal_dimension(
            attr.SnapshotCloud(cloud.points, cloud.weights, cloud.times,
                               cloud.members), "box-on-PCA")
    write_json(out / "dimension.json", dim.to_dict())
    fit = attr.attraction_experiment(rng, cloud, 4.0, params, dom, p, fam,
                                     ensemble_size=min(8, cfg.ensemble),
                                     amplitude=cfg.amplitude, tau=cfg.tau)
    write_json(out / "attraction_fit.json", fit.to_dict())
    print(f"dimension ({dim.method}) = {dim.slope:.3f}, "
          f"attraction rate c2 = {fit.c2:.3f}")
    return 0 if (fit.degenerate or fit.c2 > 0.0) else 1


def cmd_limit_study(cfg: RunConfig, out: Path) -> int:
    dom, p, fam, params = _model(cfg)
    rng = np.random.default_rng(cfg.seed)
    u0 = smoothed_random_fields(rng, dom, 1, cfg.amplitude)[0]
    ladder = cfg.lambda_ladder()
    rows = attr.lambda_limit_study(ladder, u0, cfg.energy_params(dom, lam=1.0),
                                   dom, p, fam, tau=cfg.tau)
    write_csv(out / "lambda_study.csv",
              ["lambda", "max_oscillation", "sup_dist_to_limit"],
              [[r["lambda"], r["max_oscillation"], r["sup_dist_to_limit"]]
               for r in rows])
    lams = [r["lambda"] for r in rows]
    line_plot(out / "plots" / "lambda_study.svg", lams,
              {"oscillation": [r["max_oscillation"] for r in rows],
               "dist to limit": [r["sup_dist_to_limit"] for r in rows]},
              "lambda", "sup over [1,2]", "Vanishing-lambda collapse",
              logx=True, logy=True)
    return 0


def cmd_ltraj(cfg: RunConfig, out: Path) -> int:
    dom, p, fam, params = _model(cfg)
    rng = np.random.default_rng(cfg.seed)
    consts = compute_constants(params, dom, p, fam, seed=cfg.seed)
    starts = checks.absorbed_states(rng, 2 * min(cfg.ensemble, 10), params,
                                    dom, p, fam, amplitude=cfg.amplitude,
                                    tau=cfg.tau)
    lip = checks.estimate_L1_lipschitz(starts, consts, params, dom, p, fam,
                                       tau=cfg.tau, sample_dt=cfg.sample_dt)
    chi1 = sample_l_trajectory(starts[0], params, dom, p, fam,
                               cfg.tau, cfg.sample_dt)
    chi2 = sample_l_trajectory(starts[1], params, dom, p, fam,
                               cfg.tau, cfg.sample_dt)
    k = int(round(1.0 / cfg.sample_dt))
    s, t = 4 * cfg.sample_dt, (k - 4) * cfg.sample_dt
    holder = checks.check_shift_holder(chi1, chi2, s, t, consts, params,
                                       dom, p, fam)
    reports = [lip, holder]
    write_json(out / "report.json",
               [{**r.to_dict(), "config_hash": hash_config(cfg),
                 "seed": cfg.seed} for r in reports])
    for r in reports:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: margin {r.margin:.3e}")
    return 0 if all(r.passed for r in reports) else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pxflow",
        description="Variable-exponent reaction-diffusion laboratory")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", default=None, help="config file path")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", default="out", help="output directory")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        cfg = _load(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    handler = {
        "simulate": cmd_simulate,
        "verify": cmd_verify,
        "constants": cmd_constants,
        "attractor": cmd_attractor,
        "limit-study": cmd_limit_study,
        "ltraj": cmd_ltraj,
    }[args.command]
    try:
        return handler(cfg, out)
    except Exception as exc:  # solver or configuration failure
        print(f"error in {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

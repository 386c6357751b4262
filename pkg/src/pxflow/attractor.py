"""Empirical attractor characterization: long-run snapshot clouds, Hausdorff
semidistances, fractal-dimension estimates and exponential-attraction fits,
plus the vanishing-lambda collapse study."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .checks import smoothed_random_fields
from .domain import Domain1D, DiffusionFamily
from .semiflow import EnergyParams, build_system, project_to_limit_space
from .varexp import ExponentField

__all__ = [
    "SnapshotCloud",
    "DimensionEstimate",
    "AttractionFit",
    "approximate_attractor",
    "hausdorff_semidistance",
    "fractal_dimension",
    "fit_exponential_attraction",
    "attraction_experiment",
    "lambda_limit_study",
]


@dataclass(frozen=True)
class SnapshotCloud:
    """Finite set of states in the discrete L^2 geometry.  ``points`` holds
    one dof vector per row; ``weights`` the lumped masses of the dofs."""

    points: np.ndarray
    weights: np.ndarray
    times: np.ndarray
    members: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValueError("cloud must hold at least one point")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))

    @property
    def scaled(self) -> np.ndarray:
        """Points scaled so the Euclidean metric equals the H metric."""
        return self.points * np.sqrt(self.weights)

    def diameter(self) -> float:
        if len(self.points) == 1:
            return 0.0
        d = cdist(self.scaled, self.scaled)
        return float(d.max())


@dataclass(frozen=True)
class DimensionEstimate:
    method: str
    slope: float
    eps_lo: float
    eps_hi: float
    r_squared: float
    note: str = ""

    def to_dict(self):
        return {"method": self.method, "slope": self.slope,
                "eps_lo": self.eps_lo, "eps_hi": self.eps_hi,
                "r_squared": self.r_squared, "note": self.note}


@dataclass(frozen=True)
class AttractionFit:
    c1: float
    c2: float
    t_lo: float
    t_hi: float
    residual: float
    degenerate: bool = False

    def to_dict(self):
        return {"c1": self.c1, "c2": self.c2, "t_lo": self.t_lo,
                "t_hi": self.t_hi, "residual": self.residual,
                "degenerate": self.degenerate}


def approximate_attractor(rng, ensemble_size: int, T_transient: float,
                          T_sample: float, params: EnergyParams,
                          dom: Domain1D, p: ExponentField,
                          fam: DiffusionFamily, amplitude: float = 1.0,
                          tau: float = 1.0 / 512,
                          sample_dt: float = 1.0 / 8) -> SnapshotCloud:
    """Long-run snapshot cloud: drop [0, T_transient], then sample each
    ensemble member on [T_transient, T_transient + T_sample]."""
    if T_transient < 2.0:
        raise ValueError(f"transient must cover the absorbing times, got {T_transient}")
    sys = build_system(params, dom, p, fam)
    pts, times, members = [], [], []
    per = int(round(sample_dt / tau))
    n_drop = int(round(T_transient / sample_dt))
    n_keep = int(round(T_sample / sample_dt))
    for m, f in enumerate(smoothed_random_fields(rng, dom, ensemble_size, amplitude)):
        dofs = sys.unwrap(f)
        for k in range(n_drop + n_keep):
            for _ in range(per):
                dofs, _ = sys.prox_step(dofs, tau)
            if k >= n_drop:
                pts.append(dofs.copy())
                times.append((k + 1) * sample_dt)
                members.append(m)
    return SnapshotCloud(np.array(pts), sys.W.copy(), np.array(times),
                         np.array(members))


def hausdorff_semidistance(A: SnapshotCloud, B: SnapshotCloud) -> float:
    """sup over A of the H-distance to B; brute force."""
    if A.points.shape[1] != B.points.shape[1]:
        raise ValueError("clouds must live in the same space")
    d = cdist(A.scaled, B.scaled)
    return float(d.min(axis=1).max())


def _fit_loglog(log_eps, log_count):
    slope, intercept = np.polyfit(log_eps, log_count, 1)
    pred = slope * log_eps + intercept
    ss_res = float(np.sum((log_count - pred) ** 2))
    ss_tot = float(np.sum((log_count - log_count.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2


def _scaling_range(scaled_points):
    """Central 60% of the log-eps range between the nearest-neighbor scale
    and the cloud diameter."""
    d = cdist(scaled_points, scaled_points)
    np.fill_diagonal(d, np.inf)
    diam = float(np.max(d[np.isfinite(d)]))
    positive = d[np.isfinite(d) & (d > 0)]
    # coincident snapshots are common near a point attractor; base the
    # lower scale on the smallest positive separation instead
    nn = float(np.min(positive)) if len(positive) else diam
    nn = max(nn, 1e-300)
    lo, hi = np.log(nn), np.log(diam)
    span = hi - lo
    return np.exp(lo + 0.2 * span), np.exp(hi - 0.2 * span)


def fractal_dimension(cloud: SnapshotCloud, method: str = "correlation",
                      n_scales: int = 12) -> DimensionEstimate:
    """Correlation-sum slope or box counting on a principal-component
    projection; degenerate clouds report dimension 0."""
    pts = cloud.scaled
    if len(pts) == 1 or cloud.diameter() <= 1e-12:
        return DimensionEstimate(method, 0.0, 0.0, 0.0, 1.0,
                                 note="degenerate cloud, dimension 0")
    if method == "correlation":
        if len(pts) < 100:
            raise ValueError("correlation method needs at least 100 points")
        d = cdist(pts, pts)
        iu = np.triu_indices(len(pts), k=1)
        dists = d[iu]
        eps_lo, eps_hi = _scaling_range(pts)
        eps = np.exp(np.linspace(np.log(eps_lo), np.log(eps_hi), n_scales))
        counts = np.array([np.count_nonzero(dists < e) for e in eps], dtype=float)
        keep = counts > 0
        if np.count_nonzero(keep) < 2:
            return DimensionEstimate("correlation", 0.0, float(eps_lo),
                                     float(eps_hi), 1.0,
                                     note="too few occupied scales")
        slope, r2 = _fit_loglog(np.log(eps[keep]), np.log(counts[keep]))
        return DimensionEstimate("correlation", max(0.0, slope),
                                 float(eps_lo), float(eps_hi), r2)
    if method == "box-on-PCA":
        centered = pts - pts.mean(axis=0)
        k = min(3, centered.shape[1], len(pts) - 1)
        _, _, vt = np.linalg.svd(centered, full_matrices=False)
        proj = centered @ vt[:k].T
        eps_lo, eps_hi = _scaling_range(pts)
        eps = eps_hi / 2.0 ** np.arange(n_scales)
        eps = eps[eps >= eps_lo]
        if len(eps) < 3:
            eps = eps_hi / 2.0 ** np.arange(3)
        counts = []
        for e in eps:
            boxes = {tuple(idx) for idx in np.floor(proj / e).astype(int)}
            counts.append(len(boxes))
        counts = np.array(counts, dtype=float)
        # below the inter-point spacing every point sits in its own box and
        # the count saturates; drop those scales from the fit
        keep = counts <= 0.5 * len(pts)
        if np.count_nonzero(keep) >= 3:
            eps, counts = eps[keep], counts[keep]
        slope, r2 = _fit_loglog(np.log(1.0 / eps), np.log(counts))
        return DimensionEstimate("box-on-PCA", max(0.0, slope),
                                 float(eps.min()), float(eps.max()), r2)
    raise ValueError(f"unknown method {method!r}")


def fit_exponential_attraction(dist_series, noise_floor: float = 1e-10) -> AttractionFit:
    """Least-squares line on (t, log dist); c2 = -slope, c1 = exp(intercept)."""
    series = [(float(t), float(d)) for t, d in dist_series]
    kept = [(t, d) for t, d in series if d > noise_floor]
    if len(kept) < 5:
        t_all = [t for t, _ in series]
        return AttractionFit(0.0, 0.0, min(t_all, default=0.0),
                             max(t_all, default=0.0), 0.0, degenerate=True)
    t = np.array([x for x, _ in kept])
    logd = np.log(np.array([d for _, d in kept]))
    slope, intercept = np.polyfit(t, logd, 1)
    resid = float(np.sqrt(np.mean((logd - (slope * t + intercept)) ** 2)))
    return AttractionFit(float(np.exp(intercept)), float(-slope),
                         float(t.min()), float(t.max()), resid)


def attraction_experiment(rng, M: SnapshotCloud, horizon: float,
                          params: EnergyParams, dom: Domain1D,
                          p: ExponentField, fam: DiffusionFamily,
                          ensemble_size: int = 8, amplitude: float = 1.0,
                          tau: float = 1.0 / 512,
                          sample_dt: float = 0.25) -> AttractionFit:
    """Evolves an ensemble from a bounded set and fits the decay rate of its
    Hausdorff semidistance to the attractor proxy M."""
    sys = build_system(params, dom, p, fam)
    members = [sys.unwrap(f) for f in
               smoothed_random_fields(rng, dom, ensemble_size, amplitude)]
    per = int(round(sample_dt / tau))
    n = int(round(horizon / sample_dt))
    series = []
    t = 0.0
    for _ in range(n):
        stepped = []
        for dofs in members:
            for _ in range(per):
                dofs, _ = sys.prox_step(dofs, tau)
            stepped.append(dofs)
        members = stepped
        t += sample_dt
        ens = SnapshotCloud(np.array(members), sys.W.copy(),
                            np.full(len(members), t), np.arange(len(members)))
        series.append((t, hausdorff_semidistance(ens, M)))
    return fit_exponential_attraction(series)


def lambda_limit_study(lambda_ladder, u0, params: EnergyParams, dom: Domain1D,
                       p: ExponentField, fam: DiffusionFamily,
                       t_lo: float = 1.0, t_hi: float = 2.0,
                       tau: float = 1.0 / 512,
                       sample_dt: float = 1.0 / 16) -> list[dict]:
    """For each lambda: sup over [t_lo, t_hi] of the interior oscillation on
    each subdomain and of the H-distance to the limit trajectory started from
    the projected initial datum.  Ladder must be sorted decreasing."""
    from dataclasses import replace

    from .semiflow import evolve

    ladder = [float(x) for x in lambda_ladder]
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("lambda ladder must be strictly decreasing")
    limit_params = replace(params, lam="limit")
    z0 = project_to_limit_space(u0, dom)
    limit_traj = evolve(z0, t_hi, tau, limit_params, dom, p, fam, sample_dt)
    w = dom.quadrature().node_weights
    k_lo = int(round(t_lo / sample_dt))
    rows = []
    for lam in ladder:
        lam_params = replace(params, lam=lam)
        traj = evolve(u0, t_hi, tau, lam_params, dom, p, fam, sample_dt)
        osc = 0.0
        dist = 0.0
        for k in range(k_lo, len(traj.samples)):
            u = traj.samples[k].values
            for ia, ib in dom.subdomain_nodes:
                interior = u[ia + 1 : ib]
                if len(interior):
                    osc = max(osc, float(interior.max() - interior.min()))
            v = limit_traj.samples[k].embed().values
            diff = u - v
            dist = max(dist, float(np.sqrt(np.sum(w * diff * diff))))
        rows.append({"lambda": lam, "max_oscillation": osc,
                     "sup_dist_to_limit": dist})
    return rows

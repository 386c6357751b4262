"""Discrete gradient-flow dynamics.

The elliptic operator is the exact gradient of an explicit convex energy, so
implicit Euler is a proximal step: each step minimizes

    phi(v) + ||v - u||_H^2 / (2 tau) - (B(u), v)_H

over the degrees of freedom of the working space.  Two spaces are supported:
the full Dirichlet grid, and the constrained space whose elements are
spatially constant on each interior subdomain (one scalar per subdomain).
Both are handled by the same assembly; the constrained space just remaps
nodes to degrees of freedom, which keeps its Hessian tridiagonal in the
position ordering.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import solve_banded

from .domain import CellField, Domain1D, DiffusionFamily, diffusion_at
from .varexp import ExponentField, GridMismatchError, NodalField

__all__ = [
    "EnergyParams",
    "LimitState",
    "LimitSpace",
    "Trajectory",
    "StepReport",
    "SolverError",
    "System",
    "build_system",
    "energy_phi",
    "energy_gradient",
    "proximal_step",
    "evolve",
    "project_to_limit_space",
    "shadow_ode_residual",
    "sample_l_trajectory",
    "apply_shift",
    "end_map",
    "trajectory_metrics",
]

LIMIT = "limit"


class SolverError(RuntimeError):
    """Newton did not reach the requested residual."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class EnergyParams:
    """Model parameters: eta-regularization, diffusion scale and reaction.

    ``lam`` is a float in (0, 1] for the full problem or the token "limit".
    The reaction is B(u) = kappa * tanh(u) + g with Lipschitz constant kappa.
    """

    eta: float = 0.5
    lam: object = 1.0
    kappa: float = 1.0
    forcing: np.ndarray | None = None

    def __post_init__(self):
        if self.eta <= 0.0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if self.kappa < 0.0:
            raise ValueError(f"kappa must be nonnegative, got {self.kappa}")
        if self.lam != LIMIT and not (0.0 < float(self.lam) <= 1.0):
            raise ValueError(f"lambda must be in (0,1] or 'limit', got {self.lam}")

    @property
    def is_limit(self) -> bool:
        return self.lam == LIMIT

    @property
    def L_B(self) -> float:
        return self.kappa


class LimitSpace:
    """Degree-of-freedom bookkeeping for fields constant on each subdomain.

    Degrees of freedom are the interior Omega_1 nodes plus one scalar per
    subdomain, ordered by position so couplings stay tridiagonal.
    """

    def __init__(self, dom: Domain1D):
        self.dom = dom
        node_to_dof = np.full(dom.N + 1, -1, dtype=int)
        sub_of = dom.node_subdomain
        dof_weights = []
        self.subdomain_dof = [-1] * dom.m
        dof = 0
        k = 1
        while k < dom.N:
            s = sub_of[k]
            if s < 0:
                node_to_dof[k] = dof
                dof_weights.append(dom.h)
                dof += 1
                k += 1
            else:
                ia, ib = dom.subdomain_nodes[s]
                node_to_dof[ia : ib + 1] = dof
                self.subdomain_dof[s] = dof
                dof_weights.append(dom.measures[s])
                dof += 1
                k = ib + 1
        self.node_to_dof = node_to_dof
        self.n_dof = dof
        self.dof_weights = np.array(dof_weights)
        # node-level quadrature matching the dof masses: h on Omega_1 nodes,
        # subinterval trapezoid inside each subdomain (totals |Omega_{0,i}|)
        node_w = np.full(dom.N + 1, dom.h)
        node_w[0] = node_w[dom.N] = 0.5 * dom.h
        for ia, ib in dom.subdomain_nodes:
            node_w[ia] = node_w[ib] = 0.5 * dom.h
        self.node_w = node_w

    def embed(self, dofs: np.ndarray) -> np.ndarray:
        u = np.zeros(self.dom.N + 1)
        mask = self.node_to_dof >= 0
        u[mask] = dofs[self.node_to_dof[mask]]
        return u

    def restrict_sum(self, nodal: np.ndarray) -> np.ndarray:
        out = np.zeros(self.n_dof)
        mask = self.node_to_dof >= 0
        np.add.at(out, self.node_to_dof[mask], nodal[mask])
        return out

    def project(self, nodal_values: np.ndarray) -> np.ndarray:
        """Copy Omega_1 values; subdomain scalars are quadrature means."""
        dofs = np.zeros(self.n_dof)
        sub_of = self.dom.node_subdomain
        mask = (self.node_to_dof >= 0) & (sub_of < 0)
        dofs[self.node_to_dof[mask]] = nodal_values[mask]
        for s, (ia, ib) in enumerate(self.dom.subdomain_nodes):
            w = self.node_w[ia : ib + 1]
            dofs[self.subdomain_dof[s]] = np.sum(w * nodal_values[ia : ib + 1]) / w.sum()
        return dofs


class FullSpace:
    """Interior Dirichlet nodes as degrees of freedom."""

    def __init__(self, dom: Domain1D):
        self.dom = dom
        node_to_dof = np.full(dom.N + 1, -1, dtype=int)
        node_to_dof[1:-1] = np.arange(dom.N - 1)
        self.node_to_dof = node_to_dof
        self.n_dof = dom.N - 1
        self.dof_weights = np.full(self.n_dof, dom.h)
        node_w = np.full(dom.N + 1, dom.h)
        node_w[0] = node_w[dom.N] = 0.5 * dom.h
        self.node_w = node_w

    def embed(self, dofs: np.ndarray) -> np.ndarray:
        u = np.zeros(self.dom.N + 1)
        u[1:-1] = dofs
        return u

    def restrict_sum(self, nodal: np.ndarray) -> np.ndarray:
        return nodal[1:-1].copy()


@dataclass(frozen=True)
class LimitState:
    """Constrained state: Omega_1 nodal values plus one scalar per subdomain."""

    dofs: np.ndarray
    space: LimitSpace

    def __post_init__(self):
        object.__setattr__(self, "dofs", np.asarray(self.dofs, dtype=float))
        if self.dofs.shape != (self.space.n_dof,):
            raise GridMismatchError(
                f"expected {self.space.n_dof} limit dofs, got {self.dofs.shape}"
            )

    @property
    def subdomain_values(self) -> np.ndarray:
        return self.dofs[self.space.subdomain_dof]

    @property
    def grid_id(self) -> str:
        return self.space.dom.grid_id

    def embed(self) -> NodalField:
        return NodalField(self.space.embed(self.dofs), self.grid_id)

    @property
    def omega1_values(self) -> np.ndarray:
        """Values on the closure of Omega_1 (outer boundary through Gamma_0)."""
        dom = self.space.dom
        full = self.space.embed(self.dofs)
        mask = (dom.node_subdomain < 0) | (dom.node_region == 2)
        return full[mask]


@dataclass(frozen=True)
class StepReport:
    newton_iterations: int
    residual_norm: float
    energy_before: float
    energy_after: float


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled solution path; samples[k] is the state at
    t0 + k * dt_sample."""

    t0: float
    dt_sample: float
    samples: tuple
    step_dt: float
    is_l_trajectory: bool = False

    @property
    def t_final(self) -> float:
        return self.t0 + (len(self.samples) - 1) * self.dt_sample

    def times(self) -> np.ndarray:
        return self.t0 + self.dt_sample * np.arange(len(self.samples))


class System:
    """Precomputed arrays for one (domain, exponent, diffusion, params) tuple."""

    def __init__(self, dom: Domain1D, p: ExponentField, fam: DiffusionFamily,
                 params: EnergyParams, newton_tol: float = 1e-9,
                 max_newton: int = 50):
        if not (p.grid_id == dom.grid_id == fam.grid_id):
            raise GridMismatchError("domain, exponent and diffusion must share a grid")
        self.dom = dom
        self.p = p
        self.fam = fam
        self.params = params
        self.newton_tol = newton_tol
        self.max_newton = max_newton
        if params.is_limit:
            self.space = LimitSpace(dom)
            cell_d = fam.d0_values.copy()
            cell_d[dom.cell_subdomain >= 0] = 0.0  # gradient terms live on Omega_1
        else:
            self.space = FullSpace(dom)
            cell_d = diffusion_at(fam, float(params.lam)).values
        self.cell_d = cell_d
        self.cell_p = p.cell_values
        self.node_p = p.node_values
        self.node_w = self.space.node_w
        self.W = self.space.dof_weights
        self.n_dof = self.space.n_dof
        g = params.forcing
        if g is None:
            g = np.zeros(dom.N + 1)
        # forcing seen by the dofs: nodal values, quadrature-averaged on
        # each subdomain scalar
        raw = self.space.restrict_sum(self.node_w * g)
        self.g_dofs = raw / self.W
        self._dof_pmin = None

    # -- state helpers -------------------------------------------------------

    def wrap(self, dofs: np.ndarray):
        if self.params.is_limit:
            return LimitState(dofs, self.space)
        return NodalField(self.space.embed(dofs), self.dom.grid_id)

    def unwrap(self, state) -> np.ndarray:
        if isinstance(state, LimitState):
            if not self.params.is_limit:
                raise GridMismatchError("limit state passed to a full-space system")
            return state.dofs.copy()
        if not isinstance(state, NodalField):
            raise TypeError(f"unsupported state type {type(state)!r}")
        if self.params.is_limit:
            raise GridMismatchError("full-grid field passed to a limit-space system")
        if state.grid_id != self.dom.grid_id:
            raise GridMismatchError(f"{state.grid_id} vs {self.dom.grid_id}")
        scale = 1e-10 * max(1.0, float(np.max(np.abs(state.values))))
        if abs(state.values[0]) > scale or abs(state.values[-1]) > scale:
            raise GridMismatchError("Dirichlet field must vanish on the outer boundary")
        return self.space.restrict_sum(state.values)

    def h_norm(self, dofs: np.ndarray) -> float:
        return float(np.sqrt(np.sum(self.W * dofs * dofs)))

    def h_inner(self, a: np.ndarray, b: np.ndarray) -> float:
        return float(np.sum(self.W * a * b))

    def reaction(self, dofs: np.ndarray) -> np.ndarray:
        return self.params.kappa * np.tanh(dofs) + self.g_dofs

    # -- energy, gradient, Hessian ------------------------------------------

    def phi(self, dofs: np.ndarray) -> float:
        u = self.space.embed(dofs)
        g = np.diff(u) / self.dom.h
        cell = self.dom.h * self.cell_d * (
            np.abs(g) ** self.cell_p / self.cell_p + 0.5 * self.params.eta * g * g
        )
        node = self.node_w * np.abs(u) ** self.node_p / self.node_p
        return float(cell.sum() + node.sum())

    def grad_raw(self, dofs: np.ndarray) -> np.ndarray:
        """d phi / d dof, before lumped-mass rescaling."""
        u = self.space.embed(dofs)
        g = np.diff(u) / self.dom.h
        t = self.cell_d * (np.abs(g) ** (self.cell_p - 2.0) * g + self.params.eta * g)
        nodal = self.node_w * np.abs(u) ** (self.node_p - 2.0) * u
        nodal[1:] += t
        nodal[:-1] -= t
        return self.space.restrict_sum(nodal)

    def A(self, dofs: np.ndarray) -> np.ndarray:
        """Mass-rescaled gradient: the discrete elliptic operator."""
        return self.grad_raw(dofs) / self.W

    def hess_banded(self, dofs: np.ndarray, diag_extra: np.ndarray) -> np.ndarray:
        """Tridiagonal Hessian of phi plus a diagonal term, in (3, n) banded
        storage for solve_banded."""
        u = self.space.embed(dofs)
        g = np.diff(u) / self.dom.h
        coef = self.cell_d * (
            (self.cell_p - 1.0) * np.abs(g) ** (self.cell_p - 2.0) + self.params.eta
        ) / self.dom.h
        ab = np.zeros((3, self.n_dof))
        ab[1] += diag_extra
        node_diag = self.node_w * (self.node_p - 1.0) * np.abs(u) ** (self.node_p - 2.0)
        ab[1] += self.space.restrict_sum(node_diag)
        n2d = self.space.node_to_dof
        for c in range(self.dom.N):
            d1, d2 = n2d[c], n2d[c + 1]
            if d1 == d2:
                continue  # cell interior to a subdomain: no gradient coupling
            k = coef[c]
            if d1 >= 0:
                ab[1, d1] += k
            if d2 >= 0:
                ab[1, d2] += k
            if d1 >= 0 and d2 >= 0:
                lo, hi = min(d1, d2), max(d1, d2)
                ab[0, hi] -= k
                ab[2, lo] -= k
        return ab

    # -- proximal stepping ---------------------------------------------------

    def prox_step(self, dofs: np.ndarray, tau: float):
        """One implicit-Euler step via damped Newton on the strongly convex
        per-step objective; reaction handled explicitly."""
        if tau <= 0.0:
            raise ValueError(f"time step must be positive, got {tau}")
        Bu = self.reaction(dofs)
        W = self.W

        def objective(v):
            diff = v - dofs
            return (self.phi(v) + np.sum(W * diff * diff) / (2.0 * tau)
                    - np.sum(W * Bu * v))

        def grad(v):
            return self.grad_raw(v) + W * ((v - dofs) / tau - Bu)

        tol = self.newton_tol * max(1.0, self.h_norm(dofs))
        v = dofs.copy()
        jv = objective(v)
        gv = grad(v)
        res = float(np.sqrt(np.sum(gv * gv / W)))
        iters = 0
        while res > tol and iters < self.max_newton:
            ab = self.hess_banded(v, W / tau)
            try:
                step = solve_banded((1, 1), ab, -gv)
            except np.linalg.LinAlgError:
                step = -gv / (W / tau)  # damped-gradient fallback
            slope = float(np.dot(gv, step))
            if slope >= 0.0:
                step = -gv / (W / tau)
                slope = float(np.dot(gv, step))
            # in the quadratic-convergence regime the objective decrease
            # falls below roundoff, so test the full step by gradient norm
            # before resorting to an Armijo backtracking line search
            vn = v + step
            gn_full = grad(vn)
            if np.sqrt(np.sum(gn_full * gn_full / W)) <= 0.5 * res:
                v = vn
            else:
                t = 1.0
                for _ in range(60):
                    vn = v + t * step
                    jn = objective(vn)
                    if jn <= jv + 1e-4 * t * slope:
                        break
                    t *= 0.5
                v = vn
            jv = objective(v)
            gv = grad(v)
            res = float(np.sqrt(np.sum(gv * gv / W)))
            iters += 1
        if res > tol:
            raise SolverError(
                f"proximal step stalled after {iters} Newton iterations "
                f"(residual {res:.3e} > {tol:.3e})", res)
        report = StepReport(iters, res, self.phi(dofs), self.phi(v))
        return v, report

    def evolve_dofs(self, dofs: np.ndarray, n_steps: int, tau: float,
                    record_every: int):
        samples = [dofs.copy()]
        v = dofs
        for k in range(1, n_steps + 1):
            v, _ = self.prox_step(v, tau)
            if k % record_every == 0:
                samples.append(v.copy())
        return samples


def build_system(params: EnergyParams, dom: Domain1D, p: ExponentField,
                 fam: DiffusionFamily, **kw) -> System:
    return System(dom, p, fam, params, **kw)


# -- public operations -------------------------------------------------------


def energy_phi(u, params: EnergyParams, dom: Domain1D, p: ExponentField,
               fam: DiffusionFamily) -> float:
    sys = build_system(params, dom, p, fam)
    return sys.phi(sys.unwrap(u))


def energy_gradient(u, params: EnergyParams, dom: Domain1D, p: ExponentField,
                    fam: DiffusionFamily):
    sys = build_system(params, dom, p, fam)
    return sys.wrap(sys.A(sys.unwrap(u)))


def proximal_step(u, tau: float, params: EnergyParams, dom: Domain1D,
                  p: ExponentField, fam: DiffusionFamily):
    sys = build_system(params, dom, p, fam)
    v, report = sys.prox_step(sys.unwrap(u), tau)
    return sys.wrap(v), report


def _check_timing(T, tau, sample_dt):
    if T <= 0.0:
        raise ValueError(f"horizon must be positive, got {T}")
    ratio = sample_dt / tau
    if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
        raise ValueError(f"tau={tau} must divide sample_dt={sample_dt}")
    nsamp = T / sample_dt
    if abs(nsamp - round(nsamp)) > 1e-9 or round(nsamp) < 1:
        raise ValueError(f"sample_dt={sample_dt} must divide T={T}")
    return int(round(nsamp)), int(round(ratio))


def evolve(u0, T: float, tau: float, params: EnergyParams, dom: Domain1D,
           p: ExponentField, fam: DiffusionFamily,
           sample_dt: float, t0: float = 0.0) -> Trajectory:
    nsamp, per = _check_timing(T, tau, sample_dt)
    sys = build_system(params, dom, p, fam)
    dofs = sys.unwrap(u0)
    samples = sys.evolve_dofs(dofs, nsamp * per, tau, per)
    return Trajectory(t0, sample_dt, tuple(sys.wrap(s) for s in samples), tau)


def project_to_limit_space(u: NodalField, dom: Domain1D) -> LimitState:
    """Omega_1 values copied, subdomain scalars set to quadrature means."""
    space = LimitSpace(dom)
    if u.grid_id != dom.grid_id:
        raise GridMismatchError(f"{u.grid_id} vs {dom.grid_id}")
    return LimitState(space.project(u.values), space)


def shadow_ode_residual(traj: Trajectory, i: int, k: int, params: EnergyParams,
                        dom: Domain1D, p: ExponentField,
                        fam: DiffusionFamily) -> float:
    """Defect of the subdomain ODE at interior sample k, with a centered
    time derivative of the subdomain scalar."""
    from .domain import boundary_flux

    if not 0 <= i < dom.m:
        raise IndexError(f"subdomain index {i} out of range (m={dom.m})")
    if not 1 <= k <= len(traj.samples) - 2:
        raise IndexError("need an interior sample for the centered derivative")
    space = traj.samples[k].space
    s_prev = traj.samples[k - 1].subdomain_values[i]
    s_next = traj.samples[k + 1].subdomain_values[i]
    s_dot = (s_next - s_prev) / (2.0 * traj.dt_sample)
    state = traj.samples[k]
    s_i = state.subdomain_values[i]
    d0 = CellField(fam.d0_values, fam.grid_id)
    F = boundary_flux(state.embed(), dom, d0, p, params.eta, i)
    ia, ib = dom.subdomain_nodes[i]
    w = space.node_w[ia : ib + 1]
    pv = p.node_values[ia : ib + 1]
    zero_order = float(np.sum(w * np.abs(s_i) ** (pv - 2.0) * s_i))
    g = params.forcing if params.forcing is not None else np.zeros(dom.N + 1)
    g_mean = float(np.sum(space.node_w[ia : ib + 1] * g[ia : ib + 1]) / w.sum())
    B = params.kappa * np.tanh(s_i) + g_mean
    measure = dom.measures[i]
    return abs(s_dot + (F + zero_order) / measure - B)


def sample_l_trajectory(u0, params: EnergyParams, dom: Domain1D,
                        p: ExponentField, fam: DiffusionFamily,
                        tau: float = 1.0 / 512, sample_dt: float = 1.0 / 64,
                        t0: float = 0.0) -> Trajectory:
    traj = evolve(u0, 1.0, tau, params, dom, p, fam, sample_dt, t0=t0)
    return replace(traj, is_l_trajectory=True)


def apply_shift(chi: Trajectory, t: float, params: EnergyParams, dom: Domain1D,
                p: ExponentField, fam: DiffusionFamily) -> Trajectory:
    """Window [t, t+1] of the unique continuation of the unit trajectory."""
    if not chi.is_l_trajectory:
        raise ValueError("apply_shift expects a unit-length trajectory")
    dt = chi.dt_sample
    shift = t / dt
    if t < 0.0 or abs(shift - round(shift)) > 1e-9:
        raise ValueError(f"shift {t} must be a nonnegative multiple of {dt}")
    shift = int(round(shift))
    sys = build_system(params, dom, p, fam)
    full = list(chi.samples)
    # continue deterministically from the final sample by `shift` samples
    if shift > 0:
        per = int(round(dt / chi.step_dt))
        dofs = sys.unwrap(chi.samples[-1])
        extra = sys.evolve_dofs(dofs, shift * per, chi.step_dt, per)[1:]
        full.extend(sys.wrap(s) for s in extra)
    window = tuple(full[shift:])
    return Trajectory(chi.t0 + t, dt, window, chi.step_dt, is_l_trajectory=True)


def end_map(chi: Trajectory):
    """Evaluation of a unit trajectory at its final time."""
    if not chi.is_l_trajectory:
        raise ValueError("end_map expects a unit-length trajectory")
    return chi.samples[-1]


def _dof_matrix(traj: Trajectory, sys: System) -> np.ndarray:
    return np.array([sys.unwrap(s) for s in traj.samples])


def trajectory_metrics(chi1: Trajectory, chi2: Trajectory,
                       params: EnergyParams, dom: Domain1D, p: ExponentField,
                       fam: DiffusionFamily) -> dict:
    """L^2(0,1;H) distance and the trajectory-space norm of the difference.

    The trajectory norm combines the space-time L^2 norm of the gradient with
    the dual norm of the time derivative, realized through the discrete
    Riesz solve (K + M) z = r described in the module docstring.
    """
    if (len(chi1.samples) != len(chi2.samples)
            or abs(chi1.dt_sample - chi2.dt_sample) > 1e-12):
        raise ValueError("trajectories must share their sampling")
    sys = build_system(params, dom, p, fam)
    w = _dof_matrix(chi1, sys) - _dof_matrix(chi2, sys)
    dt = chi1.dt_sample
    n = w.shape[0]
    tw = np.full(n, dt)
    tw[0] = tw[-1] = 0.5 * dt

    # L^2(0,1;H)
    h_sq = np.sum(sys.W * w * w, axis=1)
    dist_l2h = float(np.sqrt(np.sum(tw * h_sq)))

    # gradient part of the trajectory norm
    grads = np.diff(np.array([sys.space.embed(row) for row in w]), axis=1) / dom.h
    grad_sq = np.sum(dom.h * grads * grads, axis=1)
    grad_part = float(np.sqrt(np.sum(tw * grad_sq)))

    # dual part: w_t by centered differences, one-sided at the ends
    wt = np.empty_like(w)
    wt[1:-1] = (w[2:] - w[:-2]) / (2.0 * dt)
    wt[0] = (w[1] - w[0]) / dt
    wt[-1] = (w[-1] - w[-2]) / dt
    KM = _stiffness_plus_mass(sys)
    dual_sq = np.empty(n)
    for k in range(n):
        r = sys.W * wt[k]
        z = solve_banded((1, 1), KM, r)
        dual_sq[k] = max(0.0, float(np.dot(r, z)))
    dual_part = float(np.sqrt(np.sum(tw * dual_sq)))

    return {"dist_L2H": dist_l2h, "dist_Y": grad_part + dual_part}


def _stiffness_plus_mass(sys: System) -> np.ndarray:
    """Banded K + M with K the H^1_0-seminorm stiffness and M the lumped
    mass, both on the working space's degrees of freedom."""
    ab = np.zeros((3, sys.n_dof))
    ab[1] += sys.W
    n2d = sys.space.node_to_dof
    coef = 1.0 / sys.dom.h
    for c in range(sys.dom.N):
        d1, d2 = n2d[c], n2d[c + 1]
        if d1 == d2:
            continue
        if d1 >= 0:
            ab[1, d1] += coef
        if d2 >= 0:
            ab[1, d2] += coef
        if d1 >= 0 and d2 >= 0:
            lo, hi = min(d1, d2), max(d1, d2)
            ab[0, hi] -= coef
            ab[2, lo] -= coef
    return ab

"""One-dimensional discretization of Omega = (0,1) with labelled interior
subdomains, the localized-large-diffusion family d_lambda, and the discrete
differential operators used by the energies.

Region labelling: the outer boundary {0,1} is GAMMA, the snapped subdomain
endpoints are GAMMA0, nodes strictly between them OMEGA0, everything else
OMEGA1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .varexp import ExponentField, GridMismatchError, NodalField, QuadratureWeights

__all__ = [
    "Domain1D",
    "DiffusionFamily",
    "CellField",
    "ConfigurationError",
    "OMEGA1",
    "GAMMA",
    "GAMMA0",
    "OMEGA0",
    "build_domain",
    "build_diffusion",
    "gradient",
    "boundary_flux",
    "l2_inner",
    "l2_norm",
    "diffusion_at",
]

OMEGA1 = 0
GAMMA = 1
GAMMA0 = 2
OMEGA0 = 3


class ConfigurationError(ValueError):
    """Invalid domain or diffusion configuration."""


@dataclass(frozen=True)
class Domain1D:
    """Uniform grid on (0,1) with subdomain bookkeeping.

    ``subdomain_nodes`` holds the snapped node-index pairs (ia_i, ib_i) of each
    closed interval [a_i, b_i]; ``snap_displacements`` records how far each
    requested endpoint moved to reach a node.
    """

    N: int
    nodes: np.ndarray
    subdomain_nodes: tuple
    snap_displacements: tuple
    grid_id: str = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", np.asarray(self.nodes, dtype=float))
        spec = ";".join(f"{ia}:{ib}" for ia, ib in self.subdomain_nodes)
        object.__setattr__(self, "grid_id", f"grid[N={self.N};{spec}]")

    @property
    def h(self) -> float:
        return 1.0 / self.N

    @property
    def m(self) -> int:
        return len(self.subdomain_nodes)

    @property
    def measures(self) -> np.ndarray:
        """|Omega_{0,i}| for each subdomain."""
        return np.array([(ib - ia) * self.h for ia, ib in self.subdomain_nodes])

    @property
    def node_region(self) -> np.ndarray:
        lab = np.full(self.N + 1, OMEGA1, dtype=int)
        lab[0] = lab[self.N] = GAMMA
        for ia, ib in self.subdomain_nodes:
            lab[ia + 1 : ib] = OMEGA0
            lab[ia] = lab[ib] = GAMMA0
        return lab

    @property
    def node_subdomain(self) -> np.ndarray:
        """Subdomain index per node (-1 outside all closed subdomains)."""
        sub = np.full(self.N + 1, -1, dtype=int)
        for i, (ia, ib) in enumerate(self.subdomain_nodes):
            sub[ia : ib + 1] = i
        return sub

    @property
    def cell_subdomain(self) -> np.ndarray:
        """Subdomain index per cell (-1 for Omega_1 cells)."""
        sub = np.full(self.N, -1, dtype=int)
        for i, (ia, ib) in enumerate(self.subdomain_nodes):
            sub[ia:ib] = i
        return sub

    def quadrature(self) -> QuadratureWeights:
        nw = np.full(self.N + 1, self.h)
        nw[0] = nw[self.N] = 0.5 * self.h
        cw = np.full(self.N, self.h)
        return QuadratureWeights(nw, cw, self.grid_id, 1.0)

    def exponent_field(self, p_of_x) -> ExponentField:
        """Sample a callable p(x) at nodes and cell midpoints."""
        mid = 0.5 * (self.nodes[:-1] + self.nodes[1:])
        return ExponentField(p_of_x(self.nodes), p_of_x(mid), self.grid_id)

    def nodal(self, values) -> NodalField:
        values = np.asarray(values, dtype=float)
        if values.shape != (self.N + 1,):
            raise GridMismatchError(
                f"expected {self.N + 1} nodal values, got shape {values.shape}"
            )
        return NodalField(values, self.grid_id)


@dataclass(frozen=True)
class CellField:
    """One real value per cell (gradient-like quantities)."""

    values: np.ndarray
    grid_id: str

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))


@dataclass(frozen=True)
class DiffusionFamily:
    """d_lambda(x) = d0(x) + psi(x)/lambda on cells, with psi supported in
    the open subdomains so d_lambda == d0 on Omega_1 for every lambda."""

    m0: float
    d0_values: np.ndarray
    bump: np.ndarray
    grid_id: str

    def __post_init__(self):
        d0 = np.asarray(self.d0_values, dtype=float)
        psi = np.asarray(self.bump, dtype=float)
        object.__setattr__(self, "d0_values", d0)
        object.__setattr__(self, "bump", psi)
        if self.m0 <= 0.0:
            raise ConfigurationError(f"m0 must be positive, got {self.m0}")
        if np.any(d0 < self.m0):
            raise ConfigurationError("d0 must dominate m0 everywhere")
        if np.any(psi < 0.0):
            raise ConfigurationError("bump must be nonnegative")

    @property
    def M0(self) -> float:
        return float(self.d0_values.max())


def build_domain(N: int, subdomains) -> Domain1D:
    """Labelled uniform grid; subdomain endpoints snapped to the nearest node.

    ``subdomains`` is a sequence of (a, b) intervals with disjoint closures
    contained in (0, 1).
    """
    if N < 16:
        raise ConfigurationError(f"need N >= 16 cells, got {N}")
    h = 1.0 / N
    nodes = np.linspace(0.0, 1.0, N + 1)
    intervals = sorted((float(a), float(b)) for a, b in subdomains)
    snapped = []
    displacements = []
    for a, b in intervals:
        ia = int(round(a / h))
        ib = int(round(b / h))
        displacements.extend([abs(ia * h - a), abs(ib * h - b)])
        if not (0 < ia < ib < N):
            raise ConfigurationError(
                f"subdomain [{a}, {b}] must lie strictly inside (0,1) and be "
                f"nondegenerate after snapping to the grid"
            )
        snapped.append((ia, ib))
    for (ia, ib), (ja, jb) in zip(snapped, snapped[1:]):
        if jb <= ja or ja <= ib:
            raise ConfigurationError("subdomain closures must be pairwise disjoint")
    return Domain1D(N, nodes, tuple(snapped), tuple(displacements))


def build_diffusion(dom: Domain1D, m0: float = 1.0, d0=None) -> DiffusionFamily:
    """Default diffusion family: constant-extended d0 and a C^1 bump
    ((x-a)(b-x))^{5/4} on each subdomain, normalized to peak value 1.

    The 5/4 power makes the bump vanish like dist^{5/4} at the subdomain
    edges; a quadratically vanishing profile would leave a boundary layer
    whose oscillation scales only like sqrt(lambda)."""
    mid = 0.5 * (dom.nodes[:-1] + dom.nodes[1:])
    if d0 is None:
        d0_vals = np.full(dom.N, float(m0))
    elif np.isscalar(d0):
        d0_vals = np.full(dom.N, float(d0))
    else:
        d0_vals = d0(mid)
    psi = np.zeros(dom.N)
    for ia, ib in dom.subdomain_nodes:
        a, b = ia * dom.h, ib * dom.h
        z = np.maximum(0.0, (mid - a) * (b - mid))
        peak = ((b - a) / 2.0) ** 2
        psi += (z / peak) ** 1.25
    return DiffusionFamily(float(m0), d0_vals, psi, dom.grid_id)


def gradient(u: NodalField, dom: Domain1D) -> CellField:
    """Forward-difference gradient, one value per cell."""
    if u.grid_id != dom.grid_id:
        raise GridMismatchError(f"{u.grid_id} vs {dom.grid_id}")
    return CellField(np.diff(u.values) / dom.h, dom.grid_id)


def diffusion_at(fam: DiffusionFamily, lam: float) -> CellField:
    """Per-cell samples of d_lambda = d0 + psi/lambda for lambda in (0, 1]."""
    if not (0.0 < lam <= 1.0):
        raise ConfigurationError(f"lambda must lie in (0, 1], got {lam}")
    return CellField(fam.d0_values + fam.bump / lam, fam.grid_id)


def boundary_flux(
    u: NodalField,
    dom: Domain1D,
    d: CellField,
    p: ExponentField,
    eta: float,
    i: int,
) -> float:
    """Inward nonlinear flux through Gamma_{0,i}, from the Omega_1 side.

    In 1D the surface integral reduces to two point evaluations of
    d (|u'|^{p-2} + eta) du/dn with n the inward normal to Omega_{0,i}.
    """
    if not 0 <= i < dom.m:
        raise IndexError(f"subdomain index {i} out of range (m={dom.m})")
    if u.grid_id != dom.grid_id or d.grid_id != dom.grid_id:
        raise GridMismatchError("flux arguments must share the domain grid")
    ia, ib = dom.subdomain_nodes[i]
    g = np.diff(u.values) / dom.h

    def flux(cell):
        gc = g[cell]
        return d.values[cell] * (abs(gc) ** (p.cell_values[cell] - 2.0) + eta) * gc

    # inward normal is +x at a_i (cell ia-1 on the Omega_1 side) and -x at b_i
    return flux(ia - 1) - flux(ib)


def l2_inner(u: NodalField, v: NodalField, w: QuadratureWeights) -> float:
    """Discrete L^2(Omega) inner product."""
    if not (u.grid_id == v.grid_id == w.grid_id):
        raise GridMismatchError("inner-product arguments must share a grid")
    return float(np.sum(w.node_weights * u.values * v.values))


def l2_norm(u: NodalField, w: QuadratureWeights) -> float:
    return float(np.sqrt(max(0.0, l2_inner(u, u, w))))

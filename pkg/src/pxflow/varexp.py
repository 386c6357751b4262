"""Variable-exponent Lebesgue numerics: modulars, Luxemburg norms and the
elementary power inequalities the energy estimates rest on.

The exponent is sampled twice: at grid nodes (for zero-order terms) and at
cell midpoints (for gradient terms), so that the discrete energy stays a
smooth function of nodal values.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ExponentField",
    "NodalField",
    "QuadratureWeights",
    "GridMismatchError",
    "modular",
    "luxemburg_norm",
    "check_norm_modular_bounds",
    "check_power_inequality",
]


class GridMismatchError(ValueError):
    """Fields passed to an operation do not share a grid."""


@dataclass(frozen=True)
class ExponentField:
    """Nodal and per-cell samples of the exponent p(x), with 2 < p_minus."""

    node_values: np.ndarray
    cell_values: np.ndarray
    grid_id: str
    p_minus: float = field(init=False)
    p_plus: float = field(init=False)

    def __post_init__(self):
        nv = np.asarray(self.node_values, dtype=float)
        cv = np.asarray(self.cell_values, dtype=float)
        object.__setattr__(self, "node_values", nv)
        object.__setattr__(self, "cell_values", cv)
        # min/max always recomputed from the samples, never trusted from input
        pmin = float(min(nv.min(), cv.min()))
        pmax = float(max(nv.max(), cv.max()))
        if not pmin > 2.0:
            raise ValueError(f"exponent must exceed 2 everywhere, got p_minus={pmin}")
        object.__setattr__(self, "p_minus", pmin)
        object.__setattr__(self, "p_plus", pmax)


@dataclass(frozen=True)
class NodalField:
    """One real value per grid node."""

    values: np.ndarray
    grid_id: str

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))


@dataclass(frozen=True)
class QuadratureWeights:
    """Trapezoid weights per node and midpoint weights per cell."""

    node_weights: np.ndarray
    cell_weights: np.ndarray
    grid_id: str
    measure: float

    def __post_init__(self):
        nw = np.asarray(self.node_weights, dtype=float)
        cw = np.asarray(self.cell_weights, dtype=float)
        object.__setattr__(self, "node_weights", nw)
        object.__setattr__(self, "cell_weights", cw)
        for name, w in (("node", nw), ("cell", cw)):
            if abs(w.sum() - self.measure) > 1e-12 * max(1.0, self.measure):
                raise ValueError(f"{name} weights sum {w.sum()} != |Omega| = {self.measure}")


def _require_same_grid(*objs):
    gids = {o.grid_id for o in objs}
    if len(gids) != 1:
        raise GridMismatchError(f"fields live on different grids: {sorted(gids)}")


def modular(v: NodalField, p: ExponentField, w: QuadratureWeights) -> float:
    """Discrete modular sum_k w_k |v_k|^{p_k} ~ int |v|^{p(x)} dx."""
    _require_same_grid(v, p, w)
    return float(np.sum(w.node_weights * np.abs(v.values) ** p.node_values))


def _modular_values(values, pvals, weights):
    return float(np.sum(weights * np.abs(values) ** pvals))


def _luxemburg_values(values, pvals, weights, pmin, pmax, rtol=1e-12):
    rho = _modular_values(values, pvals, weights)
    if rho == 0.0:
        return 0.0
    # the modular-norm sandwich gives a provable enclosure of the root
    lo = 0.5 * min(rho ** (1.0 / pmin), rho ** (1.0 / pmax))
    hi = 2.0 * max(rho ** (1.0 / pmin), rho ** (1.0 / pmax))

    def f(s):
        return _modular_values(values / s, pvals, weights) - 1.0

    while f(lo) < 0.0:
        lo *= 0.5
    while f(hi) > 0.0:
        hi *= 2.0
    # f is continuous and strictly decreasing in s, so bisection is safe
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rtol * hi:
            break
    return 0.5 * (lo + hi)


def luxemburg_norm(v: NodalField, p: ExponentField, w: QuadratureWeights) -> float:
    """inf{s > 0 : modular(v/s) <= 1}, by bisection; 0 for v == 0."""
    _require_same_grid(v, p, w)
    return _luxemburg_values(v.values, p.node_values, w.node_weights, p.p_minus, p.p_plus)


def check_norm_modular_bounds(v: NodalField, p: ExponentField, w: QuadratureWeights):
    """Margins of min{rho^(1/p-), rho^(1/p+)} <= ||v|| <= max{...}.

    Returns (lower_margin, upper_margin); both must be >= -1e-10.
    """
    rho = modular(v, p, w)
    if rho == 0.0:
        raise ValueError("degenerate input: v == 0 has no norm-modular margins")
    lo = min(rho ** (1.0 / p.p_minus), rho ** (1.0 / p.p_plus))
    hi = max(rho ** (1.0 / p.p_minus), rho ** (1.0 / p.p_plus))
    n = luxemburg_norm(v, p, w)
    return n - lo, hi - n


def check_power_inequality(a: float, b: float, alpha: float, beta: float):
    """Margins of the two-sided power-sum inequality for a^alpha + b^beta.

    Requires alpha >= beta >= 0 and a, b >= 0. Returns
    (a^alpha + b^beta - lower, upper - (a^alpha + b^beta)); both >= -1e-12.
    """
    if not (alpha >= beta >= 0.0):
        raise ValueError(f"need alpha >= beta >= 0, got alpha={alpha}, beta={beta}")
    if a < 0.0 or b < 0.0:
        raise ValueError("a and b must be nonnegative")
    s = a + b
    total = a**alpha + b**beta
    if s < 1.0:
        lower = (s**alpha) / 2.0**alpha
        upper = 2.0 * s**beta
    else:
        lower = (s**beta) / 2.0**alpha
        upper = 2.0 * s**alpha
    return total - lower, upper - total

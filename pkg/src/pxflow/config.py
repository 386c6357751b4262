"""Run configuration: a small `key = value` format under `[section]`
headers, with strict validation (unknown keys rejected, exponent floor
enforced at parse time) and lossless serialization."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .domain import Domain1D, DiffusionFamily, build_diffusion, build_domain
from .semiflow import EnergyParams
from .varexp import ExponentField

__all__ = ["RunConfig", "ConfigError", "parse_config", "serialize_config",
           "DEFAULT_LADDER"]

DEFAULT_LADDER = (1.0, 0.3, 0.1, 0.03, 0.01)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    n_cells: int = 256
    subdomains: tuple = ((0.4, 0.6),)
    exponent_kind: str = "constant"   # constant | affine | table
    p_constant: float = 3.0
    p0: float = 3.0
    p1: float = 0.0
    p_table: tuple = ()
    m0: float = 1.0
    d0: float = 1.0
    eta: float = 0.5
    lam: object = 1.0                  # float, "limit", or a ladder tuple
    kappa: float = 1.0
    forcing: str = "zero"              # zero | constant:C | sine:A
    tau: float = 1.0 / 512
    sample_dt: float = 1.0 / 64
    newton_tol: float = 1e-9
    max_newton: int = 50
    seed: int = 0
    ensemble: int = 10
    transient: float = 2.0
    t_sample: float = 4.0
    amplitude: float = 1.0

    # -- model assembly ------------------------------------------------------

    def build_domain(self) -> Domain1D:
        return build_domain(self.n_cells, self.subdomains)

    def exponent_callable(self):
        if self.exponent_kind == "constant":
            return lambda x: np.full_like(np.asarray(x, dtype=float), self.p_constant)
        if self.exponent_kind == "affine":
            return lambda x: self.p0 + self.p1 * np.asarray(x, dtype=float)
        table = np.asarray(self.p_table, dtype=float)
        xs = np.linspace(0.0, 1.0, len(table))
        return lambda x: np.interp(np.asarray(x, dtype=float), xs, table)

    def build_exponent(self, dom: Domain1D) -> ExponentField:
        return dom.exponent_field(self.exponent_callable())

    def build_diffusion(self, dom: Domain1D) -> DiffusionFamily:
        return build_diffusion(dom, self.m0, self.d0)

    def forcing_values(self, dom: Domain1D):
        kind, _, arg = self.forcing.partition(":")
        if kind == "zero":
            return None
        if kind == "constant":
            g = np.full(dom.N + 1, float(arg))
            g[0] = g[-1] = 0.0
            return g
        if kind == "sine":
            return float(arg) * np.sin(np.pi * dom.nodes)
        raise ConfigError(f"unknown forcing kind {kind!r}")

    def energy_params(self, dom: Domain1D, lam=None) -> EnergyParams:
        if lam is None:
            lam = self.lam
            if isinstance(lam, tuple):
                lam = lam[0]
        return EnergyParams(eta=self.eta, lam=lam, kappa=self.kappa,
                            forcing=self.forcing_values(dom))

    def lambda_ladder(self) -> tuple:
        if isinstance(self.lam, tuple):
            return self.lam
        return DEFAULT_LADDER

    def validate(self) -> "RunConfig":
        pf = self.exponent_callable()
        samples = pf(np.linspace(0.0, 1.0, 4097))
        if float(np.min(samples)) <= 2.0:
            raise ConfigError("exponent must exceed 2 (need 2 < p_minus)")
        if self.eta <= 0.0:
            raise ConfigError(f"eta must be positive, got {self.eta}")
        if self.tau <= 0.0:
            raise ConfigError(f"tau must be positive, got {self.tau}")
        if self.kappa < 0.0:
            raise ConfigError(f"kappa must be nonnegative, got {self.kappa}")
        self.build_domain()  # raises ConfigurationError for bad intervals
        return self


_SCHEMA = {
    "domain": {"n_cells", "subdomains"},
    "exponent": {"kind", "p_constant", "p0", "p1", "p_table"},
    "diffusion": {"m0", "d0"},
    "model": {"eta", "lambda"},
    "reaction": {"kappa", "forcing"},
    "solver": {"tau", "sample_dt", "newton_tol", "max_newton"},
    "experiment": {"seed", "ensemble", "transient", "t_sample", "amplitude"},
}


def _parse_lambda(text: str):
    text = text.strip()
    if text == "limit":
        return "limit"
    if text.startswith("ladder:"):
        return tuple(float(x) for x in text[len("ladder:"):].split(","))
    return float(text)


def _parse_subdomains(text: str):
    out = []
    for part in text.split(","):
        a, _, b = part.partition(":")
        out.append((float(a), float(b)))
    return tuple(out)


def parse_config(text: str) -> RunConfig:
    """Parse the line-based config; empty input yields the defaults."""
    cfg = RunConfig()
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise ConfigError(
                    f"line {lineno}: unknown section [{section}]; valid "
                    f"sections: {sorted(_SCHEMA)}")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if section is None:
            raise ConfigError(f"line {lineno}: key outside any [section]")
        key, _, value = (s.strip() for s in line.partition("="))
        if key not in _SCHEMA[section]:
            raise ConfigError(
                f"line {lineno}: unknown key {key!r} in [{section}]; valid "
                f"keys: {sorted(_SCHEMA[section])}")
        try:
            cfg = _apply(cfg, section, key, value)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    return cfg.validate()


def _apply(cfg: RunConfig, section: str, key: str, value: str) -> RunConfig:
    if section == "domain":
        if key == "n_cells":
            return replace(cfg, n_cells=int(value))
        return replace(cfg, subdomains=_parse_subdomains(value))
    if section == "exponent":
        if key == "kind":
            if value not in ("constant", "affine", "table"):
                raise ConfigError(f"exponent kind must be constant, affine or "
                                  f"table, got {value!r}")
            return replace(cfg, exponent_kind=value)
        if key == "p_constant":
            return replace(cfg, p_constant=float(value))
        if key == "p0":
            return replace(cfg, p0=float(value))
        if key == "p1":
            return replace(cfg, p1=float(value))
        return replace(cfg, p_table=tuple(float(x) for x in value.split(",")))
    if section == "diffusion":
        return replace(cfg, **{key: float(value)})
    if section == "model":
        if key == "eta":
            return replace(cfg, eta=float(value))
        return replace(cfg, lam=_parse_lambda(value))
    if section == "reaction":
        if key == "kappa":
            return replace(cfg, kappa=float(value))
        return replace(cfg, forcing=value)
    if section == "solver":
        if key == "max_newton":
            return replace(cfg, max_newton=int(value))
        return replace(cfg, **{key: float(value)})
    # experiment
    if key in ("seed", "ensemble"):
        return replace(cfg, **{key: int(value)})
    return replace(cfg, **{key: float(value)})


def serialize_config(cfg: RunConfig) -> str:
    """Emit text that parses back to an identical configuration."""
    lam = cfg.lam
    if isinstance(lam, tuple):
        lam_txt = "ladder:" + ",".join(f"{x:.17g}" for x in lam)
    elif lam == "limit":
        lam_txt = "limit"
    else:
        lam_txt = f"{float(lam):.17g}"
    sub_txt = ",".join(f"{a:.17g}:{b:.17g}" for a, b in cfg.subdomains)
    lines = [
        "[domain]",
        f"n_cells = {cfg.n_cells}",
        f"subdomains = {sub_txt}",
        "[exponent]",
        f"kind = {cfg.exponent_kind}",
        f"p_constant = {cfg.p_constant:.17g}",
        f"p0 = {cfg.p0:.17g}",
        f"p1 = {cfg.p1:.17g}",
    ]
    if cfg.p_table:
        lines.append("p_table = " + ",".join(f"{x:.17g}" for x in cfg.p_table))
    lines += [
        "[diffusion]",
        f"m0 = {cfg.m0:.17g}",
        f"d0 = {cfg.d0:.17g}",
        "[model]",
        f"eta = {cfg.eta:.17g}",
        f"lambda = {lam_txt}",
        "[reaction]",
        f"kappa = {cfg.kappa:.17g}",
        f"forcing = {cfg.forcing}",
        "[solver]",
        f"tau = {cfg.tau:.17g}",
        f"sample_dt = {cfg.sample_dt:.17g}",
        f"newton_tol = {cfg.newton_tol:.17g}",
        f"max_newton = {cfg.max_newton}",
        "[experiment]",
        f"seed = {cfg.seed}",
        f"ensemble = {cfg.ensemble}",
        f"transient = {cfg.transient:.17g}",
        f"t_sample = {cfg.t_sample:.17g}",
        f"amplitude = {cfg.amplitude:.17g}",
    ]
    return "\n".join(lines) + "\n"

"""Experiment configuration: INI files layered over the shipped defaults."""
from __future__ import annotations

import configparser
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigError
from .fields import DomainSpec
from .params import ProblemParams
from .potentials import PotentialSpec


@dataclass(frozen=True)
class ExperimentConfig:
    params: ProblemParams
    potential: PotentialSpec
    domain: DomainSpec
    r_max: float
    nodes: int
    eps_list: tuple
    rho_list: tuple
    two_bump_rho: float
    s_list: tuple
    minmax_rho: float
    s_count: int
    n_azimuth: int
    n_polar: int
    bary_spacing: float
    bary_pad: float
    bary_rho_list: tuple
    z_grid: tuple
    exterior_z_grid: tuple
    below_amplitude: float
    below_width: float
    hole_radius: float
    n_list: tuple
    solver_below_amplitude: float
    solver_below_width: float
    fd_directions: int
    out_dir: Path


def default_text() -> str:
    return resources.files("nehari_levels").joinpath("defaults.ini").read_text()


def _floats(text):
    return tuple(float(v) for v in text.replace(",", " ").split())


def _points(text):
    rows = [r for r in text.split(";") if r.strip()]
    return tuple(tuple(float(v) for v in r.split()) for r in rows)


def load_config(path: Optional[Path] = None, out_dir: Optional[Path] = None) -> ExperimentConfig:
    """Read defaults, overlay ``path``, validate everything and collect all messages."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    cp.read_string(default_text())
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            cp.read(path)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
    errors = []

    def get(section, key, conv, check=None, msg=""):
        raw = cp.get(section, key, fallback=None)
        if raw is None:
            errors.append(f"[{section}] {key}: missing")
            return None
        try:
            val = conv(raw)
        except (TypeError, ValueError):
            errors.append(f"[{section}] {key}: cannot parse {raw!r}")
            return None
        if check is not None and not check(val):
            errors.append(f"[{section}] {key}: {msg} (got {raw.strip()!r})")
            return None
        return val

    N = get("problem", "N", int, lambda v: v >= 3, "must be an integer >= 3")
    p = get("problem", "p", float)
    eps = get("problem", "eps", float, lambda v: v >= 0, "must be >= 0")
    params = None
    if None not in (N, p, eps):
        try:
            params = ProblemParams(N=N, p=p, eps=eps)
        except ValueError as exc:
            errors.append(f"[problem] {exc}")
    r_max = get("radial", "r_max", float, lambda v: v > 5, "must exceed 5")
    nodes = get("radial", "nodes", int, lambda v: v >= 100, "must be >= 100")
    kind = get("domain", "kind", str.strip, lambda v: v in ("whole", "exterior"), "must be whole or exterior")
    hole = get("domain", "hole_radius", float, lambda v: v > 0, "must be positive")
    domain = None
    if kind is not None and hole is not None:
        domain = DomainSpec.exterior(hole) if kind == "exterior" else DomainSpec()
    pkind = get("potential", "kind", str.strip, lambda v: v in ("none", "gaussian", "compact"),
                "must be none, gaussian or compact")
    amp = get("potential", "amplitude", float)
    width = get("potential", "width", float, lambda v: v > 0, "must be positive")
    potential = None
    if None not in (pkind, amp, width):
        try:
            potential = PotentialSpec(pkind, amp, width)
        except ValueError as exc:
            errors.append(f"[potential] {exc}")
    positive_list = lambda v: len(v) > 0 and all(x > 0 for x in v)
    eps_list = get("levels", "eps_list", _floats, positive_list, "needs positive values")
    rho_list = get("interaction", "rho_list", _floats,
                   lambda v: positive_list(v) and all(b > a for a, b in zip(v, v[1:])), "needs increasing positive values")
    tb_rho = get("interaction", "two_bump_rho", float, lambda v: v > 0, "must be positive")
    s_list = get("interaction", "s_list", _floats, lambda v: v and all(0 <= x <= 1 for x in v), "values must lie in [0, 1]")
    mm_rho = get("minmax", "rho", float, lambda v: v > 0, "must be positive")
    s_count = get("minmax", "s_count", int, lambda v: v >= 3, "must be >= 3")
    n_az = get("minmax", "n_azimuth", int, lambda v: v >= 1, "must be >= 1")
    n_pol = get("minmax", "n_polar", int, lambda v: v >= 1, "must be >= 1")
    spacing = get("barycenter", "spacing", float, lambda v: 0 < v <= 1, "must lie in (0, 1]")
    pad = get("barycenter", "pad", float, lambda v: v >= 2, "must be >= 2")
    b_rhos = get("barycenter", "rho_list", _floats, positive_list, "needs positive values")
    dim_ok = lambda pts: len(pts) > 0 and all(len(z) == (N or 3) for z in pts)
    z_grid = get("criteria", "z_grid", _points, dim_ok, "rows need N coordinates")
    ez_grid = get("criteria", "exterior_z_grid", _points, dim_ok, "rows need N coordinates")
    below_amp = get("criteria", "below_amplitude", float, lambda v: -1 < v < 0, "must lie in (-1, 0)")
    below_w = get("criteria", "below_width", float, lambda v: v > 0, "must be positive")
    ne_hole = get("nonexistence", "hole_radius", float, lambda v: v > 0, "must be positive")
    n_list = get("nonexistence", "n_list", _floats, positive_list, "needs positive values")
    s_amp = get("solver", "below_amplitude", float, lambda v: -1 < v < 0, "must lie in (-1, 0)")
    s_w = get("solver", "below_width", float, lambda v: v > 0, "must be positive")
    fd = get("solver", "fd_directions", int, lambda v: v >= 1, "must be >= 1")
    out = get("output", "dir", str.strip)
    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(
        params=params, potential=potential, domain=domain, r_max=r_max, nodes=nodes,
        eps_list=eps_list, rho_list=rho_list, two_bump_rho=tb_rho, s_list=s_list,
        minmax_rho=mm_rho, s_count=s_count, n_azimuth=n_az, n_polar=n_pol,
        bary_spacing=spacing, bary_pad=pad, bary_rho_list=b_rhos,
        z_grid=z_grid, exterior_z_grid=ez_grid, below_amplitude=below_amp, below_width=below_w,
        hole_radius=ne_hole, n_list=n_list, solver_below_amplitude=s_amp, solver_below_width=s_w,
        fd_directions=fd, out_dir=Path(out_dir) if out_dir is not None else Path(out),
    )


def as_array(z) -> np.ndarray:
    return np.asarray(z, dtype=float)

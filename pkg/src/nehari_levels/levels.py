"""Sobolev constant, concentration level and the limit levels m, m_ε."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .nehari import NormBundle, energy, project_to_nehari
from .params import ProblemParams
from .radial import RadialProfile, profile_norms, radial_integral, shoot_ground_state, stretched_grid

BUBBLE_R_MAX = 400.0
BUBBLE_NODES = 6000
ROUTE_TOL = 1e-8
EXTRAPOLATION_TOL = 0.01


def bubble_constant(N: int) -> float:
    """C with C (1+r²)^(-(N-2)/2) solving -ΔU = U^(2*-1)."""
    return (N * (N - 2.0)) ** ((N - 2.0) / 4.0)


def bubble_profile(N: int, scale: float = 1.0) -> RadialProfile:
    """n^((N-2)/2) Ū(n r) with Ū = C (1 + r²)^(-(N-2)/2), n = ``scale``."""
    if N < 3 or int(N) != N:
        raise ValueError("N must be an integer >= 3")
    if not scale > 0:
        raise ValueError("scale must be positive")
    N = int(N)
    C = bubble_constant(N)
    k = 0.5 * (N - 2)
    amp = scale**k * C

    def u_du(r):
        s = (scale * r) ** 2
        base = 1.0 + s
        u = amp * base ** (-k)
        du = -2.0 * k * scale**2 * r * amp * base ** (-k - 1.0)
        return u, du

    grid = stretched_grid(BUBBLE_R_MAX / scale, BUBBLE_NODES, stretch=6.0)
    u, du = u_du(grid)
    s = (scale * grid) ** 2
    d2 = -2.0 * k * scale**2 * amp * (1.0 + s) ** (-k - 2.0) * (1.0 + s - 2.0 * (k + 1.0) * s)
    crit = 2.0 * N / (N - 2)
    params = ProblemParams(N=N, p=0.5 * (2.0 + crit))
    return RadialProfile(grid, u, du, d2, params, tail=u_du, label="bubble")


def rayleigh_quotient(profile: RadialProfile) -> float:
    """∫|∇u|² / |u|_{2*}² for a radial profile."""
    N = profile.N
    crit = 2.0 * N / (N - 2)
    grad = radial_integral(profile, lambda u, du, r: du**2)
    lc = radial_integral(profile, lambda u, du, r: np.abs(u) ** crit)
    return grad / lc ** (2.0 / crit)


def bubble_norms(N: int) -> tuple:
    """(∫|∇Ū|², ∫Ū^(2*)) of the unit-coefficient bubble."""
    b = bubble_profile(N)
    crit = 2.0 * N / (N - 2)
    grad = radial_integral(b, lambda u, du, r: du**2)
    lc = radial_integral(b, lambda u, du, r: np.abs(u) ** crit)
    return grad, lc


def sobolev_constant(N: int) -> float:
    """Best constant S in S|u|_{2*}² <= ∫|∇u|², from the bubble's Rayleigh quotient."""
    grad, lc = bubble_norms(N)
    crit = 2.0 * N / (N - 2)
    return grad / lc ** (2.0 / crit)


def critical_level(N: int, eps: float, S: Optional[float] = None) -> float:
    """(1/N) S^(N/2) ε^(-(N-2)/2), cross-checked through the scaled bubble.

    The second route projects U_ε = ε^(-(N-2)/4) Ū onto the Nehari set of
    (1/2)∫|∇U|² - (ε/2*)∫U^(2*) and evaluates the energy there.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    grad, lc = bubble_norms(N)
    crit = 2.0 * N / (N - 2)
    if S is None:
        S = grad / lc ** (2.0 / crit)
    direct = S ** (N / 2.0) * eps ** (-(N - 2) / 2.0) / N
    g_eps = eps ** (-(N - 2) / 2.0) * grad
    l_eps = eps ** (-N / 2.0) * lc
    t2 = (g_eps / (eps * l_eps)) ** (2.0 / (crit - 2.0))
    scaled = (0.5 - 1.0 / crit) * t2 * g_eps
    if abs(scaled - direct) > ROUTE_TOL * direct:
        raise ArithmeticError(f"critical level routes disagree: {direct!r} vs {scaled!r}")
    return direct


def ground_bundle(params: ProblemParams) -> NormBundle:
    w = shoot_ground_state(params)
    n = profile_norms(w)
    return NormBundle(n["h1"], n["lp"], n["lcrit"], params.p, params.crit_exp, n["l2"])


def compute_m(params: ProblemParams) -> float:
    """m = E_∞(w) = (1/2 - 1/p)‖w‖²."""
    return energy(ground_bundle(params.with_eps(0.0)), 0.0)


def compute_m_eps(params: ProblemParams) -> float:
    """m_ε = E_{ε,∞}(w_ε) from the shot ground state."""
    return energy(ground_bundle(params), params.eps)


def limit_chain_gap(params: ProblemParams) -> float:
    """m_ε + (ε/2*)|t_ε w_ε|_{2*}^{2*} - m with t_ε w_ε on the ε = 0 Nehari set (nonnegative)."""
    b = ground_bundle(params)
    t = project_to_nehari(b, 0.0).t
    m = compute_m(params)
    return energy(b, params.eps) + params.eps / params.crit_exp * t**params.crit_exp * b.lcrit - m


@dataclass(frozen=True)
class Check:
    name: str
    lhs: float
    rhs: float
    margin: float
    passed: Optional[bool]


@dataclass
class EnergyLedger:
    m: float
    S: float
    m_eps: dict = field(default_factory=dict)
    crit_level: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    slope: float = float("nan")

    def add(self, name, lhs, rhs, margin, passed):
        self.checks.append(Check(name, float(lhs), float(rhs), float(margin),
                                 None if passed is None else bool(passed)))

    @property
    def all_passed(self) -> bool:
        return all(c.passed is not False for c in self.checks)

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def write_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["check", "lhs", "rhs", "margin", "pass"])
            for c in self.checks:
                status = "skipped" if c.passed is None else str(c.passed).lower()
                wr.writerow([c.name, f"{c.lhs:.12g}", f"{c.rhs:.12g}", f"{c.margin:.6g}", status])
        return path

    def report(self) -> str:
        lines = [f"{k} = {v:.10g}" for k, v in (("m", self.m), ("S", self.S)) if math.isfinite(v)]
        for eps in sorted(self.m_eps):
            line = f"eps = {eps:g}: m_eps = {self.m_eps[eps]:.10g}"
            if eps in self.crit_level:
                line += f", critical level = {self.crit_level[eps]:.10g}"
            lines.append(line)
        if math.isfinite(self.slope):
            lines.append(f"linear fit slope dm_eps/deps = {self.slope:.6g}")
        for c in self.checks:
            status = "SKIP" if c.passed is None else ("PASS" if c.passed else "FAIL")
            lines.append(f"[{status}] {c.name}: lhs={c.lhs:.10g} rhs={c.rhs:.10g} margin={c.margin:.4g}")
        lines.extend(f"note: {n}" for n in self.notes)
        return "\n".join(lines)


def verify_level_ordering(params: ProblemParams, eps_list) -> EnergyLedger:
    """Record m_ε <= m, m_ε < (1/N)S^(N/2)ε^(-(N-2)/2) and the ε -> 0 extrapolation."""
    eps_list = sorted(float(e) for e in eps_list)
    if not eps_list:
        raise ValueError("eps_list must not be empty")
    N = params.N
    m = compute_m(params)
    S = sobolev_constant(N)
    ledger = EnergyLedger(m=m, S=S)
    for eps in eps_list:
        me = compute_m_eps(params.with_eps(eps))
        cl = critical_level(N, eps, S)
        ledger.m_eps[eps] = me
        ledger.crit_level[eps] = cl
        ledger.add(f"m_eps<=m (eps={eps:g})", me, m, m - me, m - me >= -1e-12 * m)
        ledger.add(f"m_eps<critical (eps={eps:g})", me, cl, cl - me, cl - me > 0)
    values = [ledger.m_eps[e] for e in eps_list]
    mono = min((values[i] - values[i + 1] for i in range(len(values) - 1)), default=0.0)
    if len(eps_list) >= 2:
        ledger.add("m_eps nonincreasing in eps", values[0], values[-1], mono, mono >= -1e-12 * m)
        slope, intercept = np.polyfit(eps_list, values, 1)
        ledger.slope = float(slope)
        rel = abs(intercept - m) / m
        ledger.add("linear extrapolation to eps=0 hits m", intercept, m, EXTRAPOLATION_TOL - rel,
                   rel <= EXTRAPOLATION_TOL)
        if len(eps_list) >= 3:
            quad_fit = np.polyfit(eps_list, values, 2)
            ledger.notes.append(f"quadratic fit intercept {quad_fit[-1]:.8g} "
                                f"(relative gap {abs(quad_fit[-1] - m) / m:.3g})")
    else:
        ledger.add("linear extrapolation to eps=0 hits m", float("nan"), m, float("nan"), None)
        ledger.notes.append("extrapolation skipped: needs at least two eps values")
    return ledger

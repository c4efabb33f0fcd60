"""Exponentially small interaction between two distant bumps.

δ_ρ = (ρ^((N-1)/2) e^(2ρ))^(-1) is the scale of the coupling between bumps
at distance 2ρ; c₁ is the limit of the δ_ρ-normalized cross integral.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.special import ive

from . import quadrature as quad
from .errors import PlateauNotReached
from .fields import cross_term, h1_cross_term, pair_breaks, psi_field, field_bundle
from .params import ProblemParams, sphere_area
from .radial import RadialProfile, profile_norms, radial_integral, shoot_ground_state

DRIFT_TOL = 0.05
BRACKET_LOW = 0.5
BRACKET_HIGH = 2.0
POWER_SLACK = 1e-12


def delta_rho(rho: float, N: int) -> float:
    if not rho > 0:
        raise ValueError("rho must be positive")
    return 1.0 / (rho ** ((N - 1) / 2.0) * math.exp(2.0 * rho))


def _drift(values) -> float:
    """Relative spread of the last three entries."""
    tail = np.asarray(values[-3:], dtype=float)
    return float((tail.max() - tail.min()) / abs(tail[-1]))


def exponential_moment(h: Callable, profile: RadialProfile, alpha: float = 1.0) -> float:
    """∫ h(u(|x|)) e^(-α x_1) dx for a radial integrand h of the profile values.

    The angular average of e^(-α r t) over the sphere is
    (2π)^(N/2) (αr)^(-ν) I_ν(αr) / ω_N with ν = (N-2)/2.
    """
    N = profile.N
    nu = 0.5 * (N - 2)
    scale = (2.0 * math.pi) ** (N / 2.0) / sphere_area(N)

    def integrand(u, du, r):
        x = alpha * r
        hv = h(u)
        safe_x = np.where(x > 0, x, 1.0)
        ang = np.where(x > 0, ive(nu, safe_x) * safe_x ** (-nu), 1.0 / (2.0**nu * math.gamma(nu + 1.0)))
        # e^x ive(x) = I(x); skip the exponential where h has underflowed
        grow = np.exp(np.minimum(x, 700.0))
        return np.where(hv > 0, hv * ang * grow, 0.0) * scale

    return radial_integral(profile, integrand)


def c1_oracle(profile: RadialProfile, exps=None) -> float:
    """γ ∫ w^(p-1) e^(-x_1) dx / 2^((N-1)/2): the limit predicted for the normalized cross integral.

    The cross integral is symmetric in its two factors, and the δ_ρ scale
    needs one exponent equal to 1; the other one carries the moment.
    """
    N, p = profile.N, profile.params.p
    if profile.decay_c is None:
        raise ValueError("profile has no decay constant")
    exps = (p - 1.0, 1.0) if exps is None else tuple(exps)
    if min(exps) != 1.0 or max(exps) <= 1.0:
        raise ValueError(f"the limit on the δ_ρ scale needs exponents (k, 1) with k > 1, got {exps}")
    e1 = max(exps)
    return profile.decay_c * exponential_moment(lambda u: np.maximum(u, 0.0) ** e1, profile) / 2.0 ** ((N - 1) / 2.0)


@dataclass
class InteractionReport:
    rho_list: list
    raw_integrals: list
    normalized: list
    c1_estimate: float
    plateau_drift: float
    gamma_half: float
    target: float = float("nan")
    exps: tuple = (3.0, 1.0)

    @property
    def gaps(self) -> list:
        return [(n - self.target) / self.target for n in self.normalized]

    def write_csv(self, path, N: int = 3) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["rho", "raw", "delta_rho", "normalized", "target", "gap"])
            for rho, raw, nrm, gap in zip(self.rho_list, self.raw_integrals, self.normalized, self.gaps):
                wr.writerow([f"{rho:g}", f"{raw:.12e}", f"{delta_rho(rho, N):.12e}", f"{nrm:.12g}",
                             f"{self.target:.12g}", f"{gap:.6e}"])
        return path


def estimate_c1(params: ProblemParams, rho_list, exps=None, y=None, profile: Optional[RadialProfile] = None,
                strict: bool = True) -> InteractionReport:
    """δ_ρ^(-1) ∫ w^e1(x - ρe_1) w^e2(x - ρy) dx over ``rho_list``; default exponents (p-1, 1), y = -e_1."""
    rho_list = [float(r) for r in rho_list]
    if any(b <= a for a, b in zip(rho_list, rho_list[1:])):
        raise ValueError("rho_list must be increasing")
    w = shoot_ground_state(params) if profile is None else profile
    N = w.N
    exps = (params.p - 1.0, 1.0) if exps is None else tuple(float(e) for e in exps)
    e1 = np.eye(N)[0]
    y = -e1 if y is None else np.asarray(y, dtype=float)
    if abs(np.linalg.norm(e1 - y) - 2.0) > 1e-12:
        raise ValueError("y must satisfy |y - e_1| = 2 so the centers are 2ρ apart")
    raw = [cross_term(w, exps[0], exps[1], rho * e1, rho * y) for rho in rho_list]
    normalized = [r / delta_rho(rho, N) for r, rho in zip(raw, rho_list)]
    drift = _drift(normalized) if len(normalized) >= 3 else float("nan")
    c1 = normalized[-1]
    lp = profile_norms(w)["lp"] ** (1.0 / params.p)
    target = float("nan")
    if w.decay_c is not None and min(exps) == 1.0 and max(exps) > 1.0:
        target = c1_oracle(w, exps)
    report = InteractionReport(rho_list, raw, normalized, c1, drift,
                               gamma_function(0.5, c1, lp, params.p), target, exps)
    if strict and len(normalized) >= 3 and drift > DRIFT_TOL:
        raise PlateauNotReached(f"normalized interaction drifts by {drift:.3%} over the last three rho")
    return report


# ------------------------------------------------------------ general decay limit

@dataclass
class BLReport:
    rho_list: list
    lhs: list
    target: float
    drift: float

    @property
    def gap(self) -> float:
        return abs(self.lhs[-1] - self.target) / abs(self.target)


def bl_limit_check(g: Callable, decay: tuple, h: Callable, z, rho_list, N: int = 3,
                   h_breaks=(), strict: bool = True) -> BLReport:
    """Left side (∫ g(x + ρz) h(x) dx) e^(α|ρz|) |ρz|^b against γ ∫ h(x) e^(-α x·z/|z|) dx.

    ``g`` and ``h`` are radial: functions of |x| on arrays. ``decay`` is the
    triple (α, b, γ) with g(r) ~ γ e^(-αr) r^(-b).
    """
    alpha, b, gam = decay
    z = np.asarray(z, dtype=float)
    zn = float(np.linalg.norm(z))
    lhs = []
    for rho in rho_list:
        d = rho * zn
        zb, qb = pair_breaks(d)
        zb = np.union1d(zb, [bb for bb in h_breaks] + [-bb for bb in h_breaks])
        qb = np.union1d(qb, [bb for bb in h_breaks if bb > 0])
        # h at the origin, g centered at -ρz; put g's center at z = d on the axis by reflection
        val = quad.axisymmetric_integral(lambda Z, Q: g(np.hypot(Z - d, Q)) * h(np.hypot(Z, Q)), zb, qb, N=N)
        lhs.append(val * math.exp(alpha * d) * d**b)
    nu = 0.5 * (N - 2)
    rb = np.union1d(np.linspace(0.0, 40.0, 81), np.asarray(h_breaks, dtype=float))

    def moment(r):
        x = alpha * r
        safe = np.where(x > 0, x, 1.0)
        ang = np.where(x > 0, ive(nu, safe) * safe ** (-nu), 1.0 / (2.0**nu * math.gamma(nu + 1.0)))
        hv = h(r)
        return np.where(hv != 0, hv * ang * np.exp(np.minimum(x, 700.0)), 0.0) * (2 * math.pi) ** (N / 2) * r ** (N - 1)

    nodes, weights = quad.composite_gl(rb, 16)
    target = gam * float(np.dot(weights, moment(nodes)))
    drift = _drift(lhs) if len(lhs) >= 3 else float("nan")
    if strict and len(lhs) >= 3 and drift > DRIFT_TOL:
        raise PlateauNotReached(f"left side drifts by {drift:.3%} over the last three rho")
    return BLReport(list(rho_list), lhs, target, drift)


# ------------------------------------------------------------ inequalities

def power_inequality_slack(a, b, p):
    """[(a+b)^p - a^p - b^p - (p-1)(a^(p-1)b + ab^(p-1))] / (a+b)^p, evaluated in x = a/(a+b)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    tot = a + b
    safe = np.where(tot > 0, tot, 1.0)
    x = a / safe
    y = b / safe
    out = 1.0 - x**p - y**p - (p - 1.0) * (x ** (p - 1.0) * y + x * y ** (p - 1.0))
    return np.where(tot > 0, out, 0.0)


def power_inequality(a: float, b: float, p: float) -> bool:
    """(a+b)^p >= a^p + b^p + (p-1)(a^(p-1) b + a b^(p-1)) for a, b >= 0, p >= 2."""
    if a < 0 or b < 0 or p < 2:
        raise ValueError("need a, b >= 0 and p >= 2")
    return bool(power_inequality_slack(a, b, p) >= -POWER_SLACK)


def gamma_function(s: float, c1: float, lp_norm: float, p: float) -> float:
    """First-order δ_ρ coefficient of ‖ψ‖²/|ψ|_p² along the segment s ∈ [0, 1]."""
    u, v = 1.0 - s, s
    sp = u**p + v**p
    q2 = u**2 + v**2
    inner = 1.0 - (p - 1.0) / p * q2 / sp * (u ** (p - 2.0) + v ** (p - 2.0))
    return 2.0 * s * (1.0 - s) * c1 / (sp ** (2.0 / p) * lp_norm**2) * inner


# ------------------------------------------------------------ two-bump expansion

@dataclass(frozen=True)
class ExpansionRow:
    s: float
    norm_sq: float
    norm_main: float
    lp_p: float
    lp_main: float
    delta: float
    c1: float
    cross_part: float
    raw_h1: float

    @property
    def norm_residual(self) -> float:
        """(‖ψ‖² - main) / δ_ρ."""
        return (self.norm_sq - self.norm_main) / self.delta

    @property
    def lp_residual(self) -> float:
        return (self.lp_p - self.lp_main) / self.delta

    def in_norm_bracket(self, low=BRACKET_LOW, high=BRACKET_HIGH) -> bool:
        slack = self.c1 * self.delta
        return self.norm_main - low * slack <= self.norm_sq <= self.norm_main + high * slack

    def lp_lower_bound(self, low=BRACKET_LOW) -> bool:
        return self.lp_p >= self.lp_main - low * self.c1 * self.delta


def two_bump_expansion_check(params: ProblemParams, rho: float, s_list, c1: Optional[float] = None,
                             domain=None, potential=None, profile: Optional[RadialProfile] = None):
    """Quadrature of ‖ψ_ρ[s, -e_1]‖² and |ψ_ρ[s, -e_1]|_p^p against the main terms of their expansions."""
    from .fields import WHOLE_SPACE
    from .potentials import CONSTANT

    w = shoot_ground_state(params) if profile is None else profile
    N, p = w.N, params.p
    domain = WHOLE_SPACE if domain is None else domain
    potential = CONSTANT if potential is None else potential
    if c1 is None:
        c1 = estimate_c1(params, [3.0, 4.0, 5.0, 6.0], profile=w).c1_estimate
    n = profile_norms(w)
    dlt = delta_rho(rho, N)
    e1 = np.eye(N)[0]
    raw_h1 = h1_cross_term(w, rho * e1, -rho * e1)
    rows = []
    for s in s_list:
        s = float(s)
        b = field_bundle(psi_field(w, rho, s, -e1, domain), potential)
        norm_main = ((1 - s) ** 2 + s**2) * n["h1"] + 2 * s * (1 - s) * c1 * dlt
        lp_main = ((1 - s) ** p + s**p) * n["lp"] + (p - 1) * ((1 - s) ** (p - 1) * s + (1 - s) * s ** (p - 1)) * c1 * dlt
        cross_part = b.norm_a_sq - ((1 - s) ** 2 + s**2) * n["h1"]
        rows.append(ExpansionRow(s, b.norm_a_sq, norm_main, b.lp_p, lp_main, dlt, c1, cross_part, raw_h1))
    return rows

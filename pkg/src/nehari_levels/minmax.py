"""Two-bump min-max levels over [0, 1] x Σ with Σ = ∂B_2(e_1).

ψ_ρ[s, y] = ϑ [(1-s) w(· - ρe_1) + s w(· - ρy)] with w the ε = 0 ground
state. Every Σ point sits at distance 2ρ from ρe_1, so for a ≡ 1 on the whole
space the energy depends on s only.

Ĉ reported here is the energy of an explicitly found β-zero, i.e. an upper
bound for the min-max level C_{0,ε}; it is never a computed value of it.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .barycenter import BarycenterLattice, barycenter
from .errors import NoSignChange
from .fields import DomainSpec, WHOLE_SPACE, field_bundle, psi_field
from .levels import EnergyLedger, compute_m, compute_m_eps
from .nehari import energy, nehari_residual, project_to_nehari
from .params import ProblemParams
from .potentials import CONSTANT, PotentialSpec
from .radial import shoot_ground_state

CHAIN_HEADER = ("Ĉ is the energy of an explicit β-zero candidate: an upper bound for C_0,eps, "
                "not its value.")
BISECTION_TOL = 1e-10
RESIDUAL_TOL = 1e-10
MAX_BISECTIONS = 80


@dataclass(frozen=True)
class SigmaPoint:
    y: tuple
    azimuth: float
    polar: float

    @classmethod
    def from_chart(cls, azimuth: float, polar: float) -> "SigmaPoint":
        v = np.array([math.cos(polar), math.sin(polar) * math.cos(azimuth), math.sin(polar) * math.sin(azimuth)])
        v /= np.linalg.norm(v)
        y = np.array([1.0, 0.0, 0.0]) + 2.0 * v
        if abs(polar - math.pi) < 1e-15:
            y = np.array([-1.0, 0.0, 0.0])
        elif polar == 0.0:
            y = np.array([3.0, 0.0, 0.0])
        return cls(tuple(float(c) for c in y), float(azimuth), float(polar))

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.y)


def sigma_grid(n_azimuth: int = 16, n_polar: int = 8) -> list:
    """Chart grid on Σ: ``n_polar`` interior polar angles jπ/(n_polar+1) times ``n_azimuth`` azimuths, plus both poles."""
    pts = [SigmaPoint.from_chart(0.0, 0.0)]
    for j in range(1, n_polar + 1):
        theta = j * math.pi / (n_polar + 1)
        for k in range(n_azimuth):
            pts.append(SigmaPoint.from_chart(2.0 * math.pi * k / n_azimuth, theta))
    pts.append(SigmaPoint.from_chart(0.0, math.pi))
    return pts


AXIS_POINT = SigmaPoint.from_chart(0.0, math.pi)


@dataclass(frozen=True)
class ScanPoint:
    s: float
    y: SigmaPoint
    t: float
    energy: float
    beta: tuple = (float("nan"),) * 3
    residual: float = 0.0


def make_psi(s: float, y: SigmaPoint, rho: float, domain: DomainSpec = WHOLE_SPACE, profile=None, N: int = 3):
    """ψ_ρ[s, y]; the cutoff is added exactly when the domain is exterior."""
    if not 0.0 <= s <= 1.0:
        raise ValueError("s must lie in [0, 1]")
    if not rho > 0:
        raise ValueError("rho must be positive")
    w = shoot_ground_state(ProblemParams(N=N)) if profile is None else profile
    yv = y.vector if isinstance(y, SigmaPoint) else np.asarray(y, dtype=float)
    return psi_field(w, rho, s, yv, domain)


class _Evaluator:
    """E_ε(t ψ_ρ[s, y]) with memoization; with a ≡ 1 on the whole space points share energies by s."""

    def __init__(self, rho, eps, domain, potential, profile):
        self.rho, self.eps, self.domain, self.potential, self.w = rho, eps, domain, potential, profile
        self.symmetric = (not domain.is_exterior) and potential.is_trivial
        self.memo = {}

    def __call__(self, s, y: SigmaPoint):
        key = (float(s),) if self.symmetric else (float(s), y.y)
        if key not in self.memo:
            fld = psi_field(self.w, self.rho, s, y.vector, self.domain)
            b = field_bundle(fld, self.potential)
            pr = project_to_nehari(b, self.eps)
            self.memo[key] = (pr.t, pr.energy_at_t, nehari_residual(b, self.eps, pr.t) / b.norm_a_sq)
        return self.memo[key]


@dataclass
class ScanResult:
    A: float
    B: float
    points: list
    argmax: tuple
    rho: float
    eps: float

    def write_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["s", "azimuth", "polar", "t", "energy", "beta_x", "beta_y", "beta_z"])
            for p in self.points:
                wr.writerow([f"{p.s:.6f}", f"{p.y.azimuth:.10f}", f"{p.y.polar:.10f}", f"{p.t:.12g}",
                             f"{p.energy:.12g}"] + [f"{b:.10g}" for b in p.beta])
        return path


def scan_levels(rho: float, eps: float, s_count: int = 41, sigma=None, domain: DomainSpec = WHOLE_SPACE,
                potential: PotentialSpec = CONSTANT, params: Optional[ProblemParams] = None,
                compute_beta: bool = True, refine: bool = True, threads: int = 1) -> ScanResult:
    """A = max of E_ε(t ψ) over the grid (refined in s near the maximum), B = max over s = 1."""
    params = ProblemParams(N=3) if params is None else params.with_eps(0.0)
    w = shoot_ground_state(params)
    sigma = sigma_grid() if sigma is None else list(sigma)
    if s_count < 2 or not sigma:
        raise ValueError("grids must be nonempty")
    s_grid = np.linspace(0.0, 1.0, s_count)
    ev = _Evaluator(rho, eps, domain, potential, w)

    def scan_y(y):
        lat = BarycenterLattice(psi_field(w, rho, 0.5, y.vector, domain)) if compute_beta else None
        rows = []
        for s in s_grid:
            t, e, res = ev(s, y)
            beta = tuple(float(b) for b in lat.beta([1.0 - s, s])) if lat is not None else (float("nan"),) * 3
            rows.append(ScanPoint(float(s), y, t, e, beta, res))
        return rows

    if threads > 1:
        # evaluate one y first so shared two-center node caches are filled once
        first = scan_y(sigma[0])
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rest = list(pool.map(scan_y, sigma[1:]))
        per_y = [first] + rest
    else:
        per_y = [scan_y(y) for y in sigma]
    points = [p for rows in per_y for p in rows]
    best = max(points, key=lambda p: p.energy)
    A, argmax = best.energy, (best.s, best.y)
    if refine:
        k = int(round(best.s * (s_count - 1)))
        lo, hi = s_grid[max(k - 1, 0)], s_grid[min(k + 1, s_count - 1)]
        res = minimize_scalar(lambda s: -ev(s, best.y)[1], bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-8})
        if -res.fun > A:
            A, argmax = float(-res.fun), (float(res.x), best.y)
    B = max(p.energy for p in points if p.s == 1.0)
    return ScanResult(A, B, points, argmax, rho, eps)


@dataclass
class BetaZeroCertificate:
    s_star: float
    s_lo: float
    s_hi: float
    f_lo: float
    f_hi: float
    beta: tuple
    t: float
    energy: float
    precondition: list = field(default_factory=list)


def beta_precondition(rho, domain=WHOLE_SPACE, sigma=None, profile=None):
    """β(ψ_ρ[1, y])·y for each sampled y; all must be positive."""
    w = shoot_ground_state(ProblemParams(N=3)) if profile is None else profile
    sigma = [SigmaPoint.from_chart(0.0, 0.0), AXIS_POINT] + [SigmaPoint.from_chart(a, math.pi / 2)
                                                             for a in (0.0, math.pi / 2, math.pi, 1.5 * math.pi)] \
        if sigma is None else sigma
    out = []
    for y in sigma:
        b = barycenter(psi_field(w, rho, 1.0, y.vector, domain))
        out.append((y, float(np.dot(b, y.vector))))
    return out


def find_beta_zero(rho: float, eps: float, domain: DomainSpec = WHOLE_SPACE, potential: PotentialSpec = CONSTANT,
                   tol: float = BISECTION_TOL, sigma=None) -> BetaZeroCertificate:
    """Bisect s ↦ β_1(ψ_ρ[s, -e_1]) on [0, 1] and project the zero onto the Nehari set."""
    w = shoot_ground_state(ProblemParams(N=3))
    pre = beta_precondition(rho, domain, sigma, w)
    bad = [(y.y, v) for y, v in pre if not v > 0]
    if bad:
        raise NoSignChange(f"β(ψ[1,y])·y <= 0 at {bad}; rho is too small")
    lat = BarycenterLattice(psi_field(w, rho, 0.5, AXIS_POINT.vector, domain))
    f = lambda s: float(lat.beta([1.0 - s, s])[0])
    lo, hi = 0.0, 1.0
    f_lo, f_hi = f(lo), f(hi)
    if not (f_lo > 0 > f_hi):
        raise NoSignChange(f"β_1 does not change sign on the axis: {f_lo!r}, {f_hi!r}")
    for _ in range(MAX_BISECTIONS):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            lo = hi = mid
            f_lo = f_hi = 0.0
            break
        if fm > 0:
            lo, f_lo = mid, fm
        else:
            hi, f_hi = mid, fm
    s_star = 0.5 * (lo + hi)
    beta = tuple(float(b) for b in lat.beta([1.0 - s_star, s_star]))
    b = field_bundle(psi_field(w, rho, s_star, AXIS_POINT.vector, domain), potential)
    pr = project_to_nehari(b, eps)
    return BetaZeroCertificate(s_star, lo, hi, f_lo, f_hi, beta, pr.t, pr.energy_at_t, pre)


def inequality_chain_report(rho: float, eps: float, domain: DomainSpec = WHOLE_SPACE,
                            potential: PotentialSpec = CONSTANT, scan: Optional[ScanResult] = None,
                            certificate: Optional[BetaZeroCertificate] = None,
                            candidates: Optional[Callable] = None, params: Optional[ProblemParams] = None,
                            **scan_kw) -> EnergyLedger:
    """Record B < Ĉ, Ĉ <= A, A < 2m_ε and m < A < 2m with their margins.

    ``candidates(rho, eps, domain, potential)`` may return further
    (s, SigmaPoint) pairs; those whose barycenter vanishes (to two lattice
    spacings) join the minimum defining Ĉ.
    """
    params = ProblemParams(N=3) if params is None else params
    base = params.with_eps(0.0)
    if scan is None:
        scan = scan_levels(rho, eps, domain=domain, potential=potential, params=base, **scan_kw)
    if certificate is None:
        certificate = find_beta_zero(rho, eps, domain, potential)
    energies = [certificate.energy]
    if candidates is not None:
        w = shoot_ground_state(base)
        for s, y in candidates(rho, eps, domain, potential):
            fld = psi_field(w, rho, s, y.vector, domain)
            if np.linalg.norm(barycenter(fld)) <= 0.5:
                energies.append(project_to_nehari(field_bundle(fld, potential), eps).energy_at_t)
    c_hat = min(energies)
    m = compute_m(base)
    m_eps = compute_m_eps(base.with_eps(eps)) if eps > 0 else m
    A, B = scan.A, scan.B
    ledger = EnergyLedger(m=m, S=float("nan"))
    ledger.m_eps[eps] = m_eps
    ledger.notes.append(CHAIN_HEADER)
    ledger.notes.append(f"A = {A:.12g} at s = {scan.argmax[0]:.8f}, y = {scan.argmax[1].y}; "
                        f"B = {B:.12g}; Ĉ = {c_hat:.12g} at s* = {certificate.s_star:.12f}")
    tol = 1e-12 * A
    ledger.add("B < C_hat", B, c_hat, c_hat - B, c_hat - B > 0)
    ledger.add("C_hat <= A", c_hat, A, A - c_hat, A - c_hat >= -tol)
    label = "A < 2 m_eps" if eps > 0 else "A < 2 m"
    ledger.add(label, A, 2 * m_eps, 2 * m_eps - A, 2 * m_eps - A > 0)
    ledger.add("m < A", m, A, A - m, A - m > 0)
    ledger.add("A < 2 m", A, 2 * m, 2 * m - A, 2 * m - A > 0)
    ledger.add("B <= A", B, A, A - B, A - B >= 0)
    ledger.add("m < C_hat", m, c_hat, c_hat - m, c_hat - m > 0)
    res = max((abs(p.residual) for p in scan.points), default=0.0)
    ledger.add("max Nehari residual over the scan", res, RESIDUAL_TOL, RESIDUAL_TOL - res, res < RESIDUAL_TOL)
    if not ledger.all_passed:
        ledger.notes.append(f"diagnostic: the chain fails at rho = {rho:g}, eps = {eps:g}. The inequalities are "
                            "asymptotic: they need rho above a threshold, and A < 2 m_eps also needs eps "
                            "small compared with the interaction gain of order delta_rho.")
    return ledger

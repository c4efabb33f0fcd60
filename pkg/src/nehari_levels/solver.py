"""Constrained minimization on the Nehari set for radial potentials, plus the
criteria that decide whether a ground state exists.

The radial minimization uses P1 elements on the shooting grid, lumped mass
for the potential and nonlinear terms, and an H¹ (stiffness + mass)
preconditioned gradient. After every step the iterate is rescaled back onto
the Nehari set, so the objective is the reduced energy J(u) = max_t E(tu).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import solveh_banded

from .errors import NehariLevelsError
from .fields import BumpField, CutoffSpec, DomainSpec, WHOLE_SPACE, field_bundle
from .nehari import NormBundle, energy, project_to_nehari
from .params import ProblemParams, sphere_area
from .potentials import CONSTANT, PotentialSpec
from .radial import RadialProfile, profile_norms, shoot_ground_state, stretched_grid

GRAD_TOL = 1e-6
ARMIJO_C1 = 1e-4
ARMIJO_FACTOR = 0.5
MAX_ITERS = 5000
MAX_HALVINGS = 60
DESCENT_SLACK = 1e-12


class LineSearchStalled(NehariLevelsError):
    """Backtracking found no admissible step."""


class NonconvergedAfterMaxIters(NehariLevelsError):
    """The gradient did not fall below tolerance within the iteration budget."""


class RadialDiscretization:
    """P1 elements on [r_0, r_max] with Dirichlet data at r_max (and at r_0 > 0).

    Only interior nodes carry unknowns. The energy is

        ω_N [ 1/2 uᵀKu + 1/2 Σ m_i a_i u_i² - 1/p Σ m_i |u_i|^p - ε/2* Σ m_i |u_i|^2* ]

    with K the stiffness matrix and m_i the lumped masses for the weight r^(N-1).
    """

    def __init__(self, grid, params: ProblemParams, potential: PotentialSpec = CONSTANT,
                 r0: float = 0.0):
        grid = np.asarray(grid, dtype=float)
        if r0 > 0:
            grid = np.concatenate([[r0], grid[grid > r0]])
        self.full_grid = grid
        self.params, self.potential, self.r0 = params, potential, float(r0)
        N = params.N
        h = np.diff(grid)
        # ∫ r^(N-1) over each element, exact
        mom = (grid[1:] ** N - grid[:-1] ** N) / N
        k_el = mom / h**2
        # lumped mass: ∫ φ_i r^(N-1), exact per element half
        m_left = (grid[1:] ** (N + 1) - grid[:-1] ** (N + 1)) / (N + 1)
        lin_right = (m_left - grid[:-1] * mom) / h     # ∫ (r - r_i)/h r^(N-1) on [r_i, r_{i+1}]
        lin_left = mom - lin_right
        mass = np.zeros(len(grid))
        mass[:-1] += lin_left
        mass[1:] += lin_right
        diag = np.zeros(len(grid))
        diag[:-1] += k_el
        diag[1:] += k_el
        off = -k_el
        lo = 1 if r0 > 0 else 0
        hi = len(grid) - 1
        self.free = slice(lo, hi)
        self.r = grid[lo:hi]
        self.mass = mass[lo:hi]
        self.k_diag = diag[lo:hi]
        self.k_off = off[lo:hi - 1]
        self.a = potential(self.r)
        self.omega = sphere_area(N)
        # banded H¹ Gram matrix K + M for the preconditioner (upper form)
        self._gram = np.zeros((2, len(self.r)))
        self._gram[0, 1:] = self.k_off
        self._gram[1] = self.k_diag + self.mass

    def stiff(self, u):
        out = self.k_diag * u
        out[:-1] += self.k_off * u[1:]
        out[1:] += self.k_off * u[:-1]
        return out

    def bundle(self, u) -> NormBundle:
        prm = self.params
        au = np.abs(u)
        return NormBundle(
            norm_a_sq=self.omega * float(u @ self.stiff(u) + np.sum(self.mass * self.a * u**2)),
            lp_p=self.omega * float(np.sum(self.mass * au**prm.p)),
            lcrit=self.omega * float(np.sum(self.mass * au**prm.crit_exp)),
            p=prm.p, crit=prm.crit_exp,
            l2=self.omega * float(np.sum(self.mass * u**2)),
        )

    def energy(self, u) -> float:
        return energy(self.bundle(u), self.params.eps)

    def gradient(self, u):
        """Euclidean gradient of the discrete energy with respect to the nodal values."""
        prm = self.params
        au = np.abs(u)
        nl = au ** (prm.p - 2) * u + prm.eps * au ** (prm.crit_exp - 2) * u
        return self.omega * (self.stiff(u) + self.mass * (self.a * u - nl))

    def riesz(self, g):
        """H¹ representative s with (K + M)s = g / ω_N."""
        return solveh_banded(self._gram, g / self.omega)

    def project(self, u):
        pr = project_to_nehari(self.bundle(u), self.params.eps)
        return pr.t * u, pr

    def sample(self, profile: RadialProfile):
        return np.maximum(profile(self.r), 0.0)

    def to_profile(self, u, label="u") -> RadialProfile:
        g = self.full_grid
        full = np.zeros(len(g))
        full[self.free] = u
        du = np.gradient(full, g)
        d2 = np.gradient(du, g)
        if self.r0 > 0:
            # the function vanishes on the hole; a flat segment keeps the interpolant at 0 there
            g = np.concatenate([[0.0], g])
            full = np.concatenate([[0.0], full])
            du = np.concatenate([[0.0], du])
            d2 = np.concatenate([[0.0], d2])
        return RadialProfile(g, full, du, d2, self.params, label=label)


@dataclass
class SolverResult:
    profile: RadialProfile
    energy: float
    status: str
    iterations: int
    grad_norm: float
    history: list = field(default_factory=list)
    max_increase: float = 0.0
    max_residual: float = 0.0

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def write_log(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["iter", "energy", "grad_norm", "t"])
            for it, e, g, t in self.history:
                wr.writerow([it, f"{e:.15g}", f"{g:.6e}", f"{t:.15g}"])
        return path


def default_disc(params, potential=CONSTANT, domain: DomainSpec = WHOLE_SPACE, r_max=35.0, n_nodes=4000):
    r0 = domain.hole_radius if domain.is_exterior else 0.0
    return RadialDiscretization(stretched_grid(r_max, n_nodes), params, potential, r0)


def minimize_on_nehari_radial(potential: PotentialSpec, domain: DomainSpec, params: ProblemParams,
                              init: RadialProfile, max_iters: int = MAX_ITERS, grad_tol: float = GRAD_TOL,
                              disc: RadialDiscretization = None, strict: bool = False) -> SolverResult:
    """Minimize E_ε on the Nehari set among radial functions.

    The gradient norm is the H¹-dual norm of E'(u) relative to ‖u‖_H¹.
    With ``strict`` a stalled line search or an exhausted budget raises
    instead of returning the best iterate.
    """
    if disc is None:
        disc = default_disc(params, potential, domain)
    u0 = disc.sample(init)
    if not np.any(u0 > 0):
        raise ValueError("initial profile must be positive somewhere on the domain")
    u, pr = disc.project(u0)
    J = pr.energy_at_t
    history, status = [], "max_iters"
    max_inc, max_res = 0.0, abs(disc.bundle(u).norm_a_sq - _nl_part(disc, u)) / disc.bundle(u).norm_a_sq
    gnorm = math.inf
    it = 0
    for it in range(max_iters):
        g = disc.gradient(u)
        s = disc.riesz(g)
        gs = float(g @ s)
        unorm = math.sqrt(max(disc.bundle(u).norm_a_sq, 1e-300))
        gnorm = math.sqrt(max(gs, 0.0)) / unorm
        history.append((it, J, gnorm, pr.t))
        if gnorm < grad_tol:
            status = "converged"
            break
        alpha = 1.0
        for _ in range(MAX_HALVINGS):
            trial = u - alpha * s
            if np.all(trial <= 0):
                alpha *= ARMIJO_FACTOR
                continue
            try:
                v, pv = disc.project(np.abs(trial))
            except NehariLevelsError:
                alpha *= ARMIJO_FACTOR
                continue
            if pv.energy_at_t <= J - ARMIJO_C1 * alpha * gs:
                break
            alpha *= ARMIJO_FACTOR
        else:
            status = "line_search_stalled"
            break
        max_inc = max(max_inc, pv.energy_at_t - J)
        u, pr, J = v, pv, pv.energy_at_t
        b = disc.bundle(u)
        max_res = max(max_res, abs(b.norm_a_sq - _nl_part(disc, u)) / b.norm_a_sq)
    if strict and status == "line_search_stalled":
        raise LineSearchStalled(f"no admissible step at iteration {it}, gradient {gnorm:.3e}")
    if strict and status == "max_iters":
        raise NonconvergedAfterMaxIters(f"gradient {gnorm:.3e} after {max_iters} iterations")
    return SolverResult(disc.to_profile(u, label="u_eps"), J, status, it, gnorm, history, max_inc, max_res)


def _nl_part(disc, u):
    b = disc.bundle(u)
    return b.lp_p + disc.params.eps * b.lcrit


def discrete_limit_level(params: ProblemParams, disc_like: RadialDiscretization = None) -> float:
    """m_ε on the same radial discretization (a ≡ 1, whole space), for like-for-like comparisons."""
    w = shoot_ground_state(params)
    grid = stretched_grid(35.0, 4000) if disc_like is None else disc_like.full_grid
    disc = RadialDiscretization(grid, params, CONSTANT, 0.0)
    return minimize_on_nehari_radial(CONSTANT, WHOLE_SPACE, params, w, disc=disc).energy


def finite_difference_check(disc: RadialDiscretization, u, n_dirs: int = 20, seed: int = 0, h: float = 1e-5):
    """Max relative mismatch between gE·v and the central difference of E along random smooth v."""
    rng = np.random.default_rng(seed)
    g = disc.gradient(u)
    worst = 0.0
    for _ in range(n_dirs):
        # smooth random direction: a few random Gaussian bumps in r
        c = rng.uniform(0.0, 6.0, 3)
        wdt = rng.uniform(0.5, 2.0, 3)
        amp = rng.normal(size=3)
        v = sum(a * np.exp(-((disc.r - cc) / ww) ** 2) for a, cc, ww in zip(amp, c, wdt))
        v = v / np.max(np.abs(v)) * np.max(np.abs(u))
        fd = (disc.energy(u + h * v) - disc.energy(u - h * v)) / (2.0 * h)
        an = float(g @ v)
        worst = max(worst, abs(fd - an) / max(abs(an), 1e-300))
    return worst


# ------------------------------------------------------------ existence criteria

@dataclass(frozen=True)
class ConditionRow:
    z: tuple
    lhs: float
    rhs: float
    satisfied: bool
    energy_sw: float
    m: float

    @property
    def gap(self) -> float:
        return self.rhs - self.lhs


def check_condition_18_24(potential: PotentialSpec, domain: DomainSpec, params: ProblemParams, z_grid):
    """Compare ‖w_z‖_a²/|w_z|_p² with ‖w‖²/|w|_p² for w_z = ϑ w(· - z).

    Also returns E(s w_z) with s w_z on the ε = 0 Nehari set of the problem
    with potential a, which is below m exactly when the inequality holds.
    """
    z_grid = list(z_grid)
    if not z_grid:
        raise ValueError("z_grid must not be empty")
    base = params.with_eps(0.0)
    w = shoot_ground_state(base)
    n = profile_norms(w)
    rhs = n["h1"] / n["lp"] ** (2.0 / base.p)
    m = (0.5 - 1.0 / base.p) * n["h1"]
    cutoff = CutoffSpec.for_domain(domain) if domain.is_exterior else None
    rows = []
    for z in z_grid:
        z = tuple(float(c) for c in z)
        fld = BumpField.single(w, z, domain=domain, cutoff=cutoff)
        b = field_bundle(fld, potential)
        lhs = b.norm_a_sq / b.lp_p ** (2.0 / base.p)
        e_sw = project_to_nehari(b, 0.0).energy_at_t
        rows.append(ConditionRow(z, lhs, rhs, lhs < rhs, e_sw, m))
    return rows


def nonexistence_diagnostic(potential: PotentialSpec, domain: DomainSpec, params: ProblemParams, n_list):
    """E_ε(t_n ϑ w_ε(· - n e_1)) for each n, with t_n the Nehari scaling."""
    w = shoot_ground_state(params)
    cutoff = CutoffSpec.for_domain(domain) if domain.is_exterior else None
    out = []
    for n in n_list:
        center = np.zeros(params.N)
        center[0] = float(n)
        fld = BumpField.single(w, center, domain=domain, cutoff=cutoff)
        out.append(project_to_nehari(field_bundle(fld, potential), params.eps).energy_at_t)
    return out

"""Check lists for each experiment, shared by the command line and the acceptance tests.

Each ``*_checks`` function runs module operations and returns an
:class:`~nehari_levels.levels.EnergyLedger` (a list of named checks with
their numbers) plus whatever tables the caller may want to write.
"""
from __future__ import annotations

import math

import numpy as np

from . import barycenter as bary
from .fields import BumpField, CutoffSpec, DomainSpec, WHOLE_SPACE, psi_field
from .interaction import (c1_oracle, estimate_c1, gamma_function, power_inequality_slack,
                          two_bump_expansion_check)
from .levels import (EnergyLedger, bubble_profile, compute_m, compute_m_eps, rayleigh_quotient,
                     sobolev_constant, verify_level_ordering)
from .minmax import find_beta_zero, inequality_chain_report, scan_levels, sigma_grid
from .nehari import NormBundle, energy, nehari_residual, project_to_nehari
from .params import ProblemParams
from .potentials import CONSTANT, PotentialSpec
from .radial import (RadialProfile, extract_decay_constants, plateau_drift, profile_norms,
                     shoot_ground_state)
from .solver import (RadialDiscretization, check_condition_18_24, default_disc, finite_difference_check,
                     minimize_on_nehari_radial, nonexistence_diagnostic)

GROUND_TOL = 1e-5
DECAY_TOL = 0.02
C1_GAP_TOL = 0.03
INTERACTION_DRIFT_TOL = 0.05
CONDITION_TOL = 1e-4
NONEXISTENCE_GAP = 1e-3
FD_TOL = 1e-5


def _ledger(m=float("nan")):
    return EnergyLedger(m=m, S=float("nan"))


def ground_state_checks(params: ProblemParams, r_max=35.0, nodes=4000):
    """Nehari identity, energy formula and grid-halving stability of the shot ground state."""
    params = params.with_eps(0.0)
    w = shoot_ground_state(params, r_max, nodes)
    half = shoot_ground_state(params, r_max, nodes // 2)
    n, nh = profile_norms(w), profile_norms(half)
    led = _ledger((0.5 - 1 / params.p) * n["h1"])
    nehari = abs(n["h1"] - n["lp"]) / n["h1"]
    led.add("Nehari identity |w|^2 = |w|_p^p (rel)", n["h1"], n["lp"], GROUND_TOL - nehari, nehari < GROUND_TOL)
    b = NormBundle(n["h1"], n["lp"], n["lcrit"], params.p, params.crit_exp, n["l2"])
    e = energy(b, 0.0)
    formula = (0.5 - 1 / params.p) * n["h1"]
    rel = abs(e - formula) / formula
    led.add("E(w) = (1/2-1/p)|w|^2 (rel)", e, formula, GROUND_TOL - rel, rel < GROUND_TOL)
    drift = abs(n["h1"] - nh["h1"]) / n["h1"]
    led.add("norm stable under grid halving (rel)", n["h1"], nh["h1"], GROUND_TOL - drift, drift < GROUND_TOL)
    eh = (0.5 - 1 / params.p) * nh["h1"]
    drift_e = abs(formula - eh) / formula
    led.add("energy stable under grid halving (rel)", formula, eh, GROUND_TOL - drift_e, drift_e < GROUND_TOL)
    led.notes.append(f"w(0) = {w.values[0]:.12g}, matching radius = {w.cache['match_radius']:.6g}")
    return led, w


def decay_checks(params: ProblemParams, r_max=35.0, nodes=4000):
    w = shoot_ground_state(params.with_eps(0.0), r_max, nodes)
    c, cp = extract_decay_constants(w)
    led = _ledger()
    drift = plateau_drift(w)
    led.add("plateau drift of w e^r r^((N-1)/2)", drift, DECAY_TOL, DECAY_TOL - drift, drift < DECAY_TOL)
    rel = abs(cp + c) / c
    led.add("|c' + c| / c", rel, DECAY_TOL, DECAY_TOL - rel, rel < DECAY_TOL)
    led.notes.append(f"c = {c:.10g}, c' = {cp:.10g}")
    return led, w, (c, cp)


def decay_table(w: RadialProfile):
    """Rows (r, u, u e^r r^b, u' e^r r^b) on the decayed range."""
    b = 0.5 * (w.N - 1)
    keep = (w.grid > 0) & (w.values > 1e-13)
    r = w.grid[keep]
    fac = np.exp(r) * r**b
    return np.column_stack([r, w.values[keep], w.values[keep] * fac, w.derivs[keep] * fac])


def _power_trial(alpha, beta):
    def u_du(r):
        r = np.asarray(r, dtype=float)
        base = 1.0 + r**alpha
        return base**-beta, -alpha * beta * r ** (alpha - 1) * base ** (-beta - 1)
    return u_du


def _gauss_trial(amp, width):
    def u_du(r):
        g = np.exp(-(np.asarray(r, dtype=float)[..., None] / width) ** 2)
        return g @ amp, (-2 * np.asarray(r)[..., None] / width**2 * g) @ amp
    return u_du


def trial_family(N: int, n_samples=200, seed=0, r_max=60.0, n=3001):
    """Random radial trial functions.

    Even draws are Gaussian mixtures with three random weights and widths,
    odd draws are (1 + r^α)^(-β) with αβ in [0.6, 2], α in [1.2, 3].
    """
    rng = np.random.default_rng(seed)
    r = np.linspace(0.0, r_max, n)
    params = ProblemParams(N=N, p=0.5 * (2 + 2 * N / (N - 2)))
    out = []
    for k in range(n_samples):
        if k % 2 == 0:
            fn = _gauss_trial(rng.uniform(0.05, 1.0, 3), np.exp(rng.uniform(np.log(0.3), np.log(4.0), 3)))
        else:
            alpha = rng.uniform(1.2, 3.0)
            fn = _power_trial(alpha, rng.uniform(0.6, 2.0) / alpha)
        u, du = fn(r)
        d2 = np.gradient(du, r)
        out.append(RadialProfile(r, u, du, d2, params, tail=fn, label="trial"))
    return out


def sobolev_checks(N: int, n_samples=200, seed=0):
    led = _ledger()
    S = sobolev_constant(N)
    led.S = S
    led.add("S > 0", S, 0.0, S, S > 0)
    quotients = [rayleigh_quotient(t) for t in trial_family(N, n_samples, seed)]
    low = min(quotients)
    led.add(f"no trial in a {n_samples}-sample random family beats S", low, S, low - S, low > S)
    for lam in (0.99, 1.01):
        q = rayleigh_quotient(bubble_profile(N, lam))
        rel = (q - S) / S
        led.add(f"bubble rescaled by {lam} stays at S (rel change)", q, S, 1e-3 - abs(rel), abs(rel) < 1e-3)
    return led, S


def levels_checks(params: ProblemParams, eps_list):
    return verify_level_ordering(params, eps_list)


def interaction_checks(params: ProblemParams, rho_list):
    params = params.with_eps(0.0)
    rep = estimate_c1(params, rho_list, strict=False)
    swapped = estimate_c1(params, rho_list, exps=(1.0, params.p - 1.0), strict=False)
    led = _ledger()
    led.add("normalized interaction drift (last 3 rho)", rep.plateau_drift, INTERACTION_DRIFT_TOL,
            INTERACTION_DRIFT_TOL - rep.plateau_drift, rep.plateau_drift < INTERACTION_DRIFT_TOL)
    gap = abs(rep.c1_estimate - rep.target) / rep.target
    led.add("c1 estimate vs exponential-moment limit (rel)", rep.c1_estimate, rep.target, C1_GAP_TOL - gap,
            gap < C1_GAP_TOL)
    sw = abs(swapped.c1_estimate - rep.c1_estimate) / rep.c1_estimate
    led.add("swapped exponents give the same c1 (rel)", swapped.c1_estimate, rep.c1_estimate, 1e-3 - sw, sw < 1e-3)
    return led, rep


def two_bump_checks(params: ProblemParams, rho, s_list, c1=None):
    params = params.with_eps(0.0)
    rows = two_bump_expansion_check(params, rho, s_list, c1=c1)
    led = _ledger()
    for r in rows:
        led.add(f"|psi|^2 inside expansion bracket (s={r.s:g})", r.norm_sq, r.norm_main,
                min(r.norm_sq - (r.norm_main - 0.5 * r.c1 * r.delta), r.norm_main + 2 * r.c1 * r.delta - r.norm_sq),
                r.in_norm_bracket())
        led.add(f"|psi|_p^p above expansion lower bound (s={r.s:g})", r.lp_p, r.lp_main,
                r.lp_p - (r.lp_main - 0.5 * r.c1 * r.delta), r.lp_lower_bound())
    w = shoot_ground_state(params)
    lp = profile_norms(w)["lp"] ** (1 / params.p)
    c1 = rows[0].c1
    g = gamma_function(0.5, c1, lp, params.p)
    led.add("gamma(1/2) < 0", g, 0.0, -g, g < 0)
    return led, rows


def power_inequality_checks(n_samples=100_000, seed=0, slack=1e-12):
    rng = np.random.default_rng(seed)
    a = rng.uniform(0, 100, n_samples)
    b = rng.uniform(0, 100, n_samples)
    p = rng.uniform(2, 6, n_samples)
    s = power_inequality_slack(a, b, p)
    viol = int(np.sum(s < -slack))
    led = _ledger()
    led.add("power inequality violations", viol, 0, -viol, viol == 0)
    return led


def barycenter_checks(params: ProblemParams, spacing=0.25, pad=12.0, rho_list=(4.0, 6.0, 8.0), hole_radius=1.0):
    w = shoot_ground_state(params.with_eps(0.0))
    led = _ledger()
    tol = 2 * spacing
    origin = BumpField.single(w)
    b2 = float(np.linalg.norm(bary.barycenter(origin, spacing, pad)))
    led.add("(b2) radial field has barycenter 0", b2, tol, tol - b2, b2 <= tol)
    fld = psi_field(w, 6.0, 0.3, [0.0, 1.0, 0.0])
    base = bary.barycenter(fld, spacing, pad)
    scaled = bary.barycenter(fld.scaled(3.0), spacing, pad)
    d3 = float(np.max(np.abs(scaled - base)))
    led.add("(b3) beta(3u) = beta(u)", d3, 1e-12, 1e-12 - d3, d3 <= 1e-12)
    shift = np.array([0.37, -1.21, 2.05])
    moved = bary.barycenter(fld.translated(shift), spacing, pad)
    d4 = float(np.linalg.norm(moved - base - shift))
    led.add("(b4) beta(u(.-z)) = beta(u) + z", d4, tol, tol - d4, d4 <= tol)
    dom = DomainSpec.exterior(hole_radius)
    cut = CutoffSpec.for_domain(dom)
    devs = []
    y = np.array([0.0, 1.0, 0.0])
    for rho in rho_list:
        f = BumpField.single(w, rho * y, domain=dom, cutoff=cut)
        devs.append(float(np.linalg.norm(bary.barycenter(f, spacing, pad) - rho * y)))
    ok = all(d <= tol for d in devs) and all(b <= a + 1e-12 for a, b in zip(devs, devs[1:]))
    led.add("beta(cut bump at rho y) - rho y shrinks", devs[-1], devs[0], tol - max(devs), ok)
    return led, devs


def condition_checks(params: ProblemParams, z_grid, exterior_z_grid, below: PotentialSpec, hole_radius=1.0):
    """The three regimes of the ground-state criterion: equality, satisfied, violated."""
    params = params.with_eps(0.0)
    led = _ledger()
    table = []
    eq = check_condition_18_24(CONSTANT, WHOLE_SPACE, params, z_grid)
    worst = max(abs(r.lhs - r.rhs) / r.rhs for r in eq)
    led.add("a = 1, whole space: equality at every z", worst, CONDITION_TOL, CONDITION_TOL - worst,
            worst < CONDITION_TOL)
    table += [("equality",) + (r,) for r in eq]
    bl = check_condition_18_24(below, WHOLE_SPACE, params, [np.zeros(params.N)])
    led.add("below-class potential: strict inequality at its center", bl[0].lhs, bl[0].rhs, bl[0].gap,
            bl[0].satisfied)
    table += [("below",) + (r,) for r in bl]
    ext = check_condition_18_24(CONSTANT, DomainSpec.exterior(hole_radius), params, exterior_z_grid)
    margin = min(r.lhs - r.rhs for r in ext)
    led.add("exterior hole: strict violation at every z", margin, 0.0, margin, margin > 0)
    table += [("exterior",) + (r,) for r in ext]
    return led, table


def nonexistence_checks(params: ProblemParams, n_list, hole_radius=1.0, potential=CONSTANT):
    dom = DomainSpec.exterior(hole_radius)
    vals = nonexistence_diagnostic(potential, dom, params, n_list)
    m_eps = compute_m_eps(params)
    led = _ledger()
    diffs = [a - b for a, b in zip(vals, vals[1:])]
    led.add("energies strictly decreasing in n", min(diffs), 0.0, min(diffs), min(diffs) > 0)
    low = min(vals) - m_eps
    led.add("every energy above m_eps", min(vals), m_eps, low, low > 0)
    gap = vals[-1] - m_eps
    led.add("final gap below 1e-3", gap, NONEXISTENCE_GAP, NONEXISTENCE_GAP - gap, gap < NONEXISTENCE_GAP)
    return led, vals, m_eps


def solver_checks(params: ProblemParams, below: PotentialSpec, n_dirs=20, seed=0):
    """Gradient consistency, monotone descent and the below-class level gap."""
    w = shoot_ground_state(params)
    disc = default_disc(params)
    rng = np.random.default_rng(seed)
    u = disc.sample(w) * 1.2 + 0.3 * np.exp(-(disc.r - rng.uniform(0.5, 3.0)) ** 2)
    fd = finite_difference_check(disc, u, n_dirs=n_dirs, seed=seed)
    led = _ledger()
    led.add("gradient vs central differences (max rel)", fd, FD_TOL, FD_TOL - fd, fd < FD_TOL)
    ref = minimize_on_nehari_radial(CONSTANT, WHOLE_SPACE, params, w, disc=disc)
    run = minimize_on_nehari_radial(below, WHOLE_SPACE, params, w)
    inc = run.max_increase
    led.add("descent is monotone", inc, 1e-12, 1e-12 - inc, inc <= 1e-12)
    led.add("solver converged (a = 1 reference)", ref.grad_norm, 1e-6, 1e-6 - ref.grad_norm, ref.converged)
    led.add("solver converged (below class)", run.grad_norm, 1e-6, 1e-6 - run.grad_norm, run.converged)
    led.add("below-class level < discrete m_eps", run.energy, ref.energy, ref.energy - run.energy,
            run.energy < ref.energy)
    led.notes.append(f"discrete m_eps = {ref.energy:.10g}; below-class level = {run.energy:.10g}")
    return led, run, ref

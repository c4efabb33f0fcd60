"""Radial ground states of -u'' - (N-1)/r u' + u = u^(p-1) + ε u^(2*-1).

The profile is found by bisection on the central amplitude u(0). Once the
bracket has collapsed to adjacent floats, the shot is trusted up to the radius
where the under- and overshooting trajectories separate; beyond that the
nonlinearity is below 1e-8 relative and the solution is continued with the
decaying solution r^(-ν) K_ν(r), ν = (N-2)/2, of the linearized equation.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import BPoly
from scipy.optimize import brentq
from scipy.special import kve, roots_legendre

from .errors import NoGroundState, NoPlateaus, TruncationTooSmall
from .params import ProblemParams, sphere_area

DEFAULT_R_MAX = 35.0
DEFAULT_NODES = 4000
MAX_BISECTIONS = 200
PLATEAU_TOL = 0.02
# relative separation of the bracketing shots at which the shot stops being trusted
MATCH_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """A radial function sampled on ``grid`` with first and second derivatives.

    ``tail`` (optional) evaluates ``(u, u')`` beyond ``r_max``; when absent the
    decay law ``decay_c e^(-r) r^(-(N-1)/2)`` is used.
    """

    grid: np.ndarray
    values: np.ndarray
    derivs: np.ndarray
    second: np.ndarray
    params: ProblemParams
    decay_c: Optional[float] = None
    decay_c_prime: Optional[float] = None
    tail: Optional[Callable] = field(default=None, repr=False)
    label: str = "w"

    @property
    def r_max(self) -> float:
        return float(self.grid[-1])

    @property
    def N(self) -> int:
        return self.params.N

    @functools.cached_property
    def _interp(self):
        # quintic Hermite interpolant in Bernstein form, built per interval
        h = np.diff(self.grid)
        u, du, d2 = self.values, self.derivs, self.second
        c = np.empty((6, h.size))
        c[0] = u[:-1]
        c[1] = u[:-1] + h * du[:-1] / 5
        c[2] = u[:-1] + 2 * h * du[:-1] / 5 + h**2 * d2[:-1] / 20
        c[3] = u[1:] - 2 * h * du[1:] / 5 + h**2 * d2[1:] / 20
        c[4] = u[1:] - h * du[1:] / 5
        c[5] = u[1:]
        return BPoly(c, self.grid, extrapolate=False)

    @functools.cached_property
    def _interp_d(self):
        return self._interp.derivative()

    @functools.cached_property
    def cache(self) -> dict:
        """Scratch space for quadrature results keyed by the callers."""
        return {}

    def scaled(self, lam: float) -> "RadialProfile":
        c = None if self.decay_c is None else lam * self.decay_c
        cp = None if self.decay_c_prime is None else lam * self.decay_c_prime
        tail = None
        if self.tail is not None:
            def tail(r, _t=self.tail):
                u, du = _t(r)
                return lam * u, lam * du
        return RadialProfile(self.grid, lam * self.values, lam * self.derivs, lam * self.second,
                             self.params, c, cp, tail, self.label)

    def _tail(self, r):
        if self.tail is not None:
            return self.tail(r)
        if self.decay_c is None:
            return np.zeros_like(r), np.zeros_like(r)
        b = 0.5 * (self.N - 1)
        u = self.decay_c * np.exp(-r) * r ** (-b)
        return u, -u * (1.0 + b / r)

    def __call__(self, r):
        return self.evaluate(r)[0]

    def evaluate(self, r):
        """Return ``(u(r), u'(r))`` for an array of radii ``r >= 0``."""
        r = np.asarray(r, dtype=float)
        shape = r.shape
        r = r.ravel()
        u = np.empty_like(r)
        du = np.empty_like(r)
        inside = r <= self.r_max
        if inside.any():
            ri = r[inside]
            ui = self._interp(ri)
            # monotone safety: stay within the neighbouring node values
            k = np.clip(np.searchsorted(self.grid, ri, side="right") - 1, 0, len(self.grid) - 2)
            lo = np.minimum(self.values[k], self.values[k + 1])
            hi = np.maximum(self.values[k], self.values[k + 1])
            u[inside] = np.clip(ui, lo, hi)
            du[inside] = self._interp_d(ri)
        if (~inside).any():
            ut, dut = self._tail(r[~inside])
            u[~inside] = ut
            du[~inside] = dut
        return u.reshape(shape), du.reshape(shape)


def eval_profile(profile: RadialProfile, r: float) -> float:
    """Value of the profile at radius ``r`` (decay law beyond ``r_max``)."""
    return float(profile(np.array([r]))[0])


def stretched_grid(r_max: float, n_nodes: int, stretch: float = 3.0) -> np.ndarray:
    """Nodes r = r_max sinh(κξ)/sinh(κ), ξ uniform: finer near the origin."""
    xi = np.linspace(0.0, 1.0, n_nodes)
    return r_max * np.sinh(stretch * xi) / math.sinh(stretch)


def radial_integral(profile: RadialProfile, integrand, order: int = 8) -> float:
    """ω_N ∫_0^∞ F(u, u', r) r^(N-1) dr.

    Gauss-Legendre on every grid interval (exact for the quintic interpolant up
    to the weight), plus the tail beyond ``r_max``.
    """
    N = profile.N
    x, w = roots_legendre(order)
    g = profile.grid
    a, b = g[:-1], g[1:]
    h = 0.5 * (b - a)
    r = (0.5 * (a + b))[:, None] + h[:, None] * x[None, :]
    u, du = profile.evaluate(r)
    core = np.sum(integrand(u, du, r) * r ** (N - 1) * (h[:, None] * w[None, :]))
    # tail: panels of geometrically growing width out to where it is negligible
    edges = profile.r_max + np.concatenate([[0.0], np.geomspace(1.0, 1e6, 60)])
    a, b = edges[:-1], edges[1:]
    h = 0.5 * (b - a)
    r = (0.5 * (a + b))[:, None] + h[:, None] * x[None, :]
    u, du = profile.evaluate(r)
    tail = np.sum(integrand(u, du, r) * r ** (N - 1) * (h[:, None] * w[None, :]))
    return sphere_area(N) * float(core + tail)


def profile_norms(profile: RadialProfile) -> dict:
    """H¹ norm squared, |u|_2², |u|_p^p and |u|_{2*}^{2*} of a radial profile."""
    key = ("norms",)
    if key in profile.cache:
        return profile.cache[key]
    p, crit = profile.params.p, profile.params.crit_exp
    grad = radial_integral(profile, lambda u, du, r: du**2)
    l2 = radial_integral(profile, lambda u, du, r: u**2)
    out = {
        "grad": grad,
        "l2": l2,
        "h1": grad + l2,
        "lp": radial_integral(profile, lambda u, du, r: np.abs(u) ** p),
        "lcrit": radial_integral(profile, lambda u, du, r: np.abs(u) ** crit),
    }
    profile.cache[key] = out
    return out


# ---------------------------------------------------------------- shooting

def _threshold_amplitude(params: ProblemParams) -> float:
    """Amplitude a with f(a) = a; below it u''(0) >= 0 and nothing decays."""
    g = lambda a: a ** (params.p - 2) + params.eps * a ** (params.crit_exp - 2) - 1.0
    return brentq(g, 0.0, 1.0, xtol=1e-15)


def _shoot(a, params: ProblemParams, r_max, rtol, dense=False):
    """Integrate from the origin; +1 overshoot (u hits 0), -1 undershoot (u' > 0)."""
    N = params.N
    upp0 = (a - float(params.nonlinearity(a))) / N
    r0 = 1e-5

    def rhs(r, y):
        return [y[1], -(N - 1) / r * y[1] + y[0] - params.nonlinearity(y[0])]

    def cross(r, y):
        return y[0]

    def turn(r, y):
        return y[1]

    cross.terminal = turn.terminal = True
    cross.direction = -1
    turn.direction = 1
    sol = solve_ivp(rhs, [r0, r_max], [a + 0.5 * upp0 * r0**2, upp0 * r0], method="DOP853",
                    rtol=rtol, atol=1e-300, events=[cross, turn], dense_output=dense)
    if sol.t_events[0].size:
        return 1, sol
    if sol.t_events[1].size:
        return -1, sol
    return 0, sol


def _bracket(params, r_max, rtol):
    a0 = _threshold_amplitude(params)
    prev = None
    for a in a0 * np.geomspace(1.0 + 1e-3, 400.0, 240):
        kind, _ = _shoot(a, params, r_max, rtol)
        if kind == 0:
            return a, a
        if prev is not None and prev[1] == -1 and kind == 1:
            return prev[0], a
        prev = (a, kind)
    raise NoGroundState(
        f"no undershoot/overshoot transition for eps={params.eps}; eps too large or r_max too small")


def _bisect(params, r_max, rtol):
    lo, hi = _bracket(params, r_max, rtol)
    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        kind, _ = _shoot(mid, params, r_max, rtol)
        if kind == 1:
            hi = mid
        elif kind == -1:
            lo = mid
        else:
            lo = hi = mid
            break
    return lo, hi


def _linear_tail(N, r_m, u_m):
    nu = 0.5 * (N - 2)
    scale = u_m * r_m**nu / kve(nu, r_m)

    def tail(r):
        r = np.asarray(r, dtype=float)
        e = np.exp(-(r - r_m))
        return scale * r ** (-nu) * kve(nu, r) * e, -scale * r ** (-nu) * kve(nu + 1, r) * e

    return tail


@functools.lru_cache(maxsize=32)
def shoot_ground_state(params: ProblemParams, r_max: float = DEFAULT_R_MAX,
                       n_nodes: int = DEFAULT_NODES, rtol: float = 1e-13,
                       allow_large_eps: bool = False) -> RadialProfile:
    """Positive decreasing radial solution with u'(0) = 0 and u(r) -> 0."""
    if params.a_infty != 1.0:
        raise ValueError("normalize a_infty to 1 first (rescale_to_unit_potential)")
    if not allow_large_eps and not 0.0 <= params.eps <= 1.0:
        raise ValueError(f"eps={params.eps} outside [0, 1]; pass allow_large_eps=True to override")
    N = params.N
    lo, hi = _bisect(params, r_max, rtol)
    _, s_lo = _shoot(lo, params, r_max, rtol, dense=True)
    _, s_hi = _shoot(hi, params, r_max, rtol, dense=True)
    r_end = min(s_lo.t[-1], s_hi.t[-1])
    probe = np.linspace(s_lo.t[0], r_end, 40001)
    u_lo = s_lo.sol(probe)[0]
    u_hi = s_hi.sol(probe)[0]
    bad = np.abs(u_lo - u_hi) > MATCH_TOL * np.abs(u_lo)
    i_m = int(np.argmax(bad)) - 1 if bad.any() else len(probe) - 1
    r_m = float(probe[max(i_m, 1)])
    u_m = float(u_lo[max(i_m, 1)])
    tail = _linear_tail(N, r_m, u_m)

    grid = stretched_grid(r_max, n_nodes)
    u = np.empty_like(grid)
    du = np.empty_like(grid)
    shot = (grid > 0) & (grid <= r_m)
    y = s_lo.sol(np.maximum(grid[shot], s_lo.t[0]))
    u[shot], du[shot] = y[0], y[1]
    u[0], du[0] = lo, 0.0
    far = grid > r_m
    u[far], du[far] = tail(grid[far])
    d2 = np.empty_like(grid)
    d2[1:] = -(N - 1) / grid[1:] * du[1:] + u[1:] - params.nonlinearity(u[1:])
    d2[0] = (lo - float(params.nonlinearity(lo))) / N
    if u[-1] > 1e-10 * u[0]:
        raise TruncationTooSmall(f"u(r_max={r_max}) = {u[-1]:.3e} has not decayed")
    if np.any(u <= 0):
        raise NoGroundState("shot profile is not positive")
    try:
        c, cp = _decay_constants(grid, u, du, N, PLATEAU_TOL)
    except NoPlateaus:
        c = cp = None
    prof = RadialProfile(grid, u, du, d2, params, c, cp, label="w" if params.eps == 0 else "w_eps")
    prof.cache["amplitude_bracket"] = (lo, hi)
    prof.cache["match_radius"] = r_m
    return prof


# ---------------------------------------------------------------- decay law

def extract_decay_constants(profile: RadialProfile, tol: float = PLATEAU_TOL):
    """Constants c, c' of u e^r r^((N-1)/2) -> c and u' e^r r^((N-1)/2) -> -c.

    ``c`` is the plateau average over [r_cut/2, r_cut], r_cut the largest node
    with u > 1e-12. The derivative product approaches its limit like 1/r, so
    ``c'`` is the intercept of a least-squares fit a + b/r on the same window.
    """
    return _decay_constants(profile.grid, profile.values, profile.derivs, profile.N, tol)


def _decay_constants(g, u, du, N, tol):
    b = 0.5 * (N - 1)
    above = np.nonzero(u > 1e-12)[0]
    if above.size == 0 or above[-1] == len(g) - 1 and u[-1] > 1e-10:
        raise NoPlateaus("profile has not decayed below 1e-10 before r_max")
    r_cut = g[above[-1]]
    win = (g >= 0.5 * r_cut) & (g <= r_cut) & (g > 0)
    if win.sum() < 8:
        raise NoPlateaus("fit window too short")
    r = g[win]
    with np.errstate(over="ignore"):
        prod = u[win] * np.exp(r) * r**b
        dprod = du[win] * np.exp(r) * r**b
    if not np.all(np.isfinite(prod)):
        raise NoPlateaus("decay product overflows; no exponential decay")
    c = float(np.mean(prod))
    drift = float((prod.max() - prod.min()) / abs(c))
    if c <= 0 or drift > tol:
        raise NoPlateaus(f"plateau drift {drift:.3g} exceeds {tol}")
    A = np.stack([np.ones_like(r), 1.0 / r], axis=1)
    coef, *_ = np.linalg.lstsq(A, dprod, rcond=None)
    resid = dprod - A @ coef
    if np.max(np.abs(resid)) > tol * c:
        raise NoPlateaus("derivative product is not of the form a + b/r on the window")
    return c, float(coef[0])


def plateau_drift(profile: RadialProfile) -> float:
    """Relative variation of u e^r r^((N-1)/2) on the last quarter of the decayed range."""
    g, u = profile.grid, profile.values
    b = 0.5 * (profile.N - 1)
    above = np.nonzero(u > 1e-13)[0]
    r_cut = g[above[-1]]
    win = (g >= 0.75 * r_cut) & (g <= r_cut) & (g > 0)
    prod = u[win] * np.exp(g[win]) * g[win] ** b
    return float((prod.max() - prod.min()) / np.mean(prod))


def ode_residual(profile: RadialProfile, n_check: int = 2000) -> float:
    """Sup of |-u'' - (N-1)/r u' + u - f(u)| / u(0) at interval midpoints."""
    g = profile.grid
    idx = np.linspace(1, len(g) - 2, n_check).astype(int)
    mid = 0.5 * (g[idx] + g[idx + 1])
    interp = profile._interp
    u = interp(mid)
    du = interp.derivative()(mid)
    d2 = interp.derivative(2)(mid)
    N = profile.N
    res = -d2 - (N - 1) / mid * du + u - profile.params.nonlinearity(u)
    return float(np.max(np.abs(res)) / profile.values[0])


# ---------------------------------------------------------------- I/O

def save_profile(profile: RadialProfile, csv_path) -> Path:
    """Write ``(r, u, du)`` rows plus a ``key=value`` metadata sidecar."""
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    data = np.stack([profile.grid, profile.values, profile.derivs], axis=1)
    np.savetxt(csv_path, data, delimiter=",", header="r,u,du", comments="", fmt="%.17g")
    meta = {
        "N": profile.params.N,
        "p": repr(profile.params.p),
        "eps": repr(profile.params.eps),
        "a_infty": repr(profile.params.a_infty),
        "r_max": repr(profile.r_max),
        "decay_c": repr(profile.decay_c),
        "decay_c_prime": repr(profile.decay_c_prime),
        "label": profile.label,
    }
    meta_path = csv_path.with_suffix(".meta")
    meta_path.write_text("".join(f"{k}={v}\n" for k, v in meta.items()))
    return csv_path


def load_profile(csv_path) -> RadialProfile:
    csv_path = Path(csv_path)
    data = np.loadtxt(csv_path, delimiter=",", skiprows=1)
    meta = {}
    for line in csv_path.with_suffix(".meta").read_text().splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            meta[k.strip()] = v.strip()
    params = ProblemParams(int(meta["N"]), float(meta["p"]), float(meta["eps"]), float(meta["a_infty"]))
    grid, u, du = data[:, 0], data[:, 1], data[:, 2]
    N = params.N
    d2 = np.empty_like(grid)
    d2[1:] = -(N - 1) / grid[1:] * du[1:] + u[1:] - params.nonlinearity(u[1:])
    d2[0] = (u[0] - float(params.nonlinearity(u[0]))) / N
    opt = lambda s: None if s in ("None", "") else float(s)
    return RadialProfile(grid, u, du, d2, params, opt(meta["decay_c"]), opt(meta["decay_c_prime"]),
                         label=meta.get("label", "w"))


def empirical_eps_threshold(params: ProblemParams, eps_grid, **shoot_kw):
    """(last ε that shoots, first ε that fails) along an increasing grid; None where nothing applies.

    Small ε is only ever located empirically here, never from a theoretical bound.
    """
    last_ok, first_fail = None, None
    for eps in sorted(float(e) for e in eps_grid):
        try:
            shoot_ground_state(params.with_eps(eps), **shoot_kw)
            last_ok = eps
        except NoGroundState:
            first_fail = eps
            break
    return last_ok, first_fail

"""Energy functionals and Nehari projections from precomputed norms.

Every functional in the family

    E(u) = 1/2 ‖u‖_a² - 1/p |u|_p^p - ε/2* |u|_{2*}^{2*}

depends on u only through three integrals, so projections and ray scans work
on a :class:`NormBundle` and never re-integrate.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateFunction

RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class NormBundle:
    norm_a_sq: float
    lp_p: float
    lcrit: float
    p: float
    crit: float
    l2: float = float("nan")

    def __post_init__(self):
        for name in ("norm_a_sq", "lp_p", "lcrit"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    def scaled(self, t: float) -> "NormBundle":
        """Norms of t·u."""
        return replace(self, norm_a_sq=t**2 * self.norm_a_sq, lp_p=abs(t) ** self.p * self.lp_p,
                       lcrit=abs(t) ** self.crit * self.lcrit, l2=t**2 * self.l2)


@dataclass(frozen=True)
class NehariProjection:
    t: float
    energy_at_t: float
    source: NormBundle
    eps: float

    @property
    def residual(self) -> float:
        return nehari_residual(self.source, self.eps, self.t)


def energy(bundle: NormBundle, eps: float) -> float:
    return 0.5 * bundle.norm_a_sq - bundle.lp_p / bundle.p - eps * bundle.lcrit / bundle.crit


def energy_on_nehari(bundle: NormBundle, eps: float) -> float:
    """(1/2 - 1/p)‖u‖² + ε(1/p - 1/2*)|u|_{2*}^{2*}; equals ``energy`` on the manifold."""
    p, c = bundle.p, bundle.crit
    return (0.5 - 1.0 / p) * bundle.norm_a_sq + eps * (1.0 / p - 1.0 / c) * bundle.lcrit


def energy_along_ray(bundle: NormBundle, eps: float, t):
    t = np.asarray(t, dtype=float)
    return (0.5 * t**2 * bundle.norm_a_sq - t**bundle.p * bundle.lp_p / bundle.p
            - eps * t**bundle.crit * bundle.lcrit / bundle.crit)


def nehari_residual(bundle: NormBundle, eps: float, t: float) -> float:
    """‖u‖² - t^(p-2)|u|_p^p - ε t^(2*-2)|u|_{2*}^{2*}."""
    return (bundle.norm_a_sq - t ** (bundle.p - 2) * bundle.lp_p
            - eps * t ** (bundle.crit - 2) * bundle.lcrit)


def project_to_nehari(bundle: NormBundle, eps: float) -> NehariProjection:
    """Unique t > 0 with t·u on the Nehari manifold of the ε-functional."""
    A, P, C = bundle.norm_a_sq, bundle.lp_p, bundle.lcrit
    p, c = bundle.p, bundle.crit
    eff_C = eps * C
    if P <= 0 and eff_C <= 0:
        raise DegenerateFunction("|u|_p and ε|u|_{2*} both vanish")
    if A <= 0:
        raise DegenerateFunction("‖u‖ vanishes")
    if P > 0:
        t0 = (A / P) ** (1.0 / (p - 2))
    else:
        t0 = (A / eff_C) ** (1.0 / (c - 2))
    if eps == 0:
        t = t0
    else:
        t = _solve_increasing(lambda s: s ** (p - 2) * P + eff_C * s ** (c - 2) - A,
                              lambda s: (p - 2) * s ** (p - 3) * P + (c - 2) * eff_C * s ** (c - 3),
                              t0, A)
    e = float(energy_along_ray(bundle, eps, t))
    return NehariProjection(t, e, bundle, eps)


def _solve_increasing(g, dg, t0, scale):
    """Root of the strictly increasing g on (0, inf): Newton inside a bracket."""
    lo, hi = t0 / 8.0, 8.0 * t0
    while g(lo) > 0:
        lo /= 8.0
    while g(hi) < 0:
        hi *= 8.0
    t = min(max(t0, lo), hi)
    for _ in range(200):
        val = g(t)
        if abs(val) <= RESIDUAL_TOL * scale:
            return t
        if val > 0:
            hi = t
        else:
            lo = t
        d = dg(t)
        step = t - val / d if d > 0 else 0.5 * (lo + hi)
        t = step if lo < step < hi else 0.5 * (lo + hi)
        if hi - lo <= 4 * np.finfo(float).eps * hi:
            return t
    return t


def bracket_sign_changes(bundle: NormBundle, eps: float, t0: float, n: int = 400) -> int:
    """Number of sign changes of the Nehari residual on [t0/8, 8 t0]."""
    ts = np.geomspace(t0 / 8.0, 8.0 * t0, n)
    vals = np.array([nehari_residual(bundle, eps, t) for t in ts])
    return int(np.sum(np.signbit(vals[1:]) != np.signbit(vals[:-1])))


def verify_max_along_ray(bundle: NormBundle, eps: float, t_star: float, n: int = 64) -> bool:
    """True iff E(t*·u) is not beaten by 64 log-spaced t in [t*/10, 10 t*]."""
    ts = t_star * np.logspace(-1.0, 1.0, n)
    e_star = float(energy_along_ray(bundle, eps, t_star))
    sample = energy_along_ray(bundle, eps, ts)
    return bool(e_star >= np.max(sample) - 1e-14 * abs(e_star))

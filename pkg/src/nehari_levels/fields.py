"""Superpositions of translated radial profiles, optionally cut off near a hole.

A field is u(x) = ϑ(x) Σ_i c_i w_i(x - z_i) with at most two active terms.
Its integrals are split into pieces that are each computed where they are
cheap and accurate:

* single-bump terms c_i^q |w_i|_q^q from the one-dimensional radial rule,
* two-center interactions in cylinder coordinates about the axis z_1 -> z_2,
* a correction over a ball around the origin holding the cutoff collar and
  the support of a - 1.

Node values are cached per geometry, so scans over the coefficients only
redo array arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import quadrature as quad
from .errors import QuadratureNotConverged
from .nehari import NormBundle
from .potentials import CONSTANT, PotentialSpec
from .radial import RadialProfile, load_profile, profile_norms, radial_integral, save_profile

PAIR_OFFSETS = (0.0, 0.5, 1.0, 1.5, 2.5, 4.0, 6.0, 9.0, 13.0, 18.0, 24.0)
PAIR_ORDER = 10
BALL_ORDER = 8
MAX_LEVELS = 4
# absolute floor of the ball-correction tolerance, relative to the uncut norm
BALL_FLOOR = 1e-14


@dataclass(frozen=True)
class DomainSpec:
    """Whole space, or the exterior of the closed ball of radius ``hole_radius`` about 0."""

    kind: str = "whole"
    hole_radius: float = 0.0

    def __post_init__(self):
        if self.kind not in ("whole", "exterior"):
            raise ValueError(f"domain kind must be 'whole' or 'exterior', got {self.kind!r}")
        if self.kind == "exterior" and not self.hole_radius > 0:
            raise ValueError("exterior domain needs hole_radius > 0")
        if self.kind == "whole" and self.hole_radius != 0:
            raise ValueError("whole space has no hole")

    @classmethod
    def exterior(cls, hole_radius: float) -> "DomainSpec":
        return cls("exterior", float(hole_radius))

    @property
    def is_exterior(self) -> bool:
        return self.kind == "exterior"

    @property
    def collar_radius(self) -> float:
        """Radius r with the hole inside B_(r-1)(0)."""
        return self.hole_radius + 1.0

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not self.is_exterior:
            return np.ones(x.shape[:-1], dtype=bool)
        return np.linalg.norm(x, axis=-1) > self.hole_radius


WHOLE_SPACE = DomainSpec()


@dataclass(frozen=True)
class CutoffSpec:
    """ϑ = S((|x| - inner_radius)/transition_width) with S the quintic smoothstep."""

    inner_radius: float
    transition_width: float = 1.0

    def __post_init__(self):
        if self.inner_radius < 0 or not self.transition_width > 0:
            raise ValueError("cutoff needs inner_radius >= 0 and transition_width > 0")

    @property
    def outer_radius(self) -> float:
        return self.inner_radius + self.transition_width

    @classmethod
    def for_domain(cls, domain: DomainSpec) -> "CutoffSpec":
        return cls(domain.hole_radius, 1.0)


def smoothstep(t):
    t = np.clip(t, 0.0, 1.0)
    return t**3 * (10.0 - 15.0 * t + 6.0 * t**2)


def smoothstep_deriv(t):
    t = np.clip(t, 0.0, 1.0)
    return 30.0 * t**2 * (1.0 - t) ** 2


def cutoff_value(spec: Optional[CutoffSpec], x):
    """ϑ(x) for points of shape (..., N); 1 everywhere when ``spec`` is None."""
    x = np.asarray(x, dtype=float)
    if spec is None:
        return np.ones(x.shape[:-1])
    r = np.linalg.norm(x, axis=-1)
    return smoothstep((r - spec.inner_radius) / spec.transition_width)


def cutoff_gradient(spec: Optional[CutoffSpec], x):
    x = np.asarray(x, dtype=float)
    if spec is None:
        return np.zeros_like(x)
    r = np.linalg.norm(x, axis=-1)
    s = smoothstep_deriv((r - spec.inner_radius) / spec.transition_width) / spec.transition_width
    safe = np.where(r > 0, r, 1.0)
    return (s / safe)[..., None] * x


@dataclass(frozen=True, eq=False)
class BumpTerm:
    profile: RadialProfile
    center: tuple
    coeff: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if len(self.center) != self.profile.N:
            raise ValueError(f"center has {len(self.center)} components, profile lives in R^{self.profile.N}")
        if self.coeff < 0:
            raise ValueError("coefficients must be nonnegative")


@dataclass(frozen=True, eq=False)
class BumpField:
    terms: tuple
    domain: DomainSpec = WHOLE_SPACE
    cutoff: Optional[CutoffSpec] = None

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.terms:
            params = self.terms[0].profile.params
            if any(t.profile.params != params for t in self.terms):
                raise ValueError("all terms must share the same problem parameters")
        if self.domain.is_exterior:
            if self.cutoff is None:
                raise ValueError("a field on an exterior domain needs a cutoff")
            if self.cutoff.inner_radius < self.domain.hole_radius:
                raise ValueError("the cutoff must vanish on the hole")

    @classmethod
    def single(cls, profile, center=None, coeff=1.0, domain=WHOLE_SPACE, cutoff=None):
        center = np.zeros(profile.N) if center is None else center
        return cls((BumpTerm(profile, center, coeff),), domain, cutoff)

    @property
    def N(self) -> int:
        return self.terms[0].profile.N

    @property
    def params(self):
        return self.terms[0].profile.params

    @property
    def active(self) -> tuple:
        return tuple(t for t in self.terms if t.coeff > 0)

    def translated(self, shift) -> "BumpField":
        shift = np.asarray(shift, dtype=float)
        terms = tuple(replace(t, center=tuple(np.asarray(t.center) + shift)) for t in self.terms)
        return replace(self, terms=terms)

    def with_coeffs(self, coeffs) -> "BumpField":
        terms = tuple(replace(t, coeff=float(c)) for t, c in zip(self.terms, coeffs, strict=True))
        return replace(self, terms=terms)

    def scaled(self, lam: float) -> "BumpField":
        return self.with_coeffs([lam * t.coeff for t in self.terms])

    def __call__(self, x):
        """Field values at points of shape (..., N)."""
        x = np.asarray(x, dtype=float)
        total = np.zeros(x.shape[:-1])
        for t in self.active:
            r = np.linalg.norm(x - np.asarray(t.center), axis=-1)
            total += t.coeff * t.profile(r)
        return cutoff_value(self.cutoff, x) * total


# ------------------------------------------------------------ single bumps

def single_power(profile: RadialProfile, q: float) -> float:
    """|w|_q^q by the radial rule, cached on the profile."""
    norms = profile_norms(profile)
    if q == 2:
        return norms["l2"]
    if q == profile.params.p:
        return norms["lp"]
    if q == profile.params.crit_exp:
        return norms["lcrit"]
    key = ("lq", float(q))
    if key not in profile.cache:
        profile.cache[key] = radial_integral(profile, lambda u, du, r: np.abs(u) ** q)
    return profile.cache[key]


# ------------------------------------------------------------ two centers

def _q_power_excess(a, b, q):
    """(a + b)^q - a^q - b^q for a, b >= 0 without cancellation."""
    M = np.maximum(a, b)
    m = np.minimum(a, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = M**q * np.expm1(q * np.log1p(m / M)) - m**q
    return np.where(M > 0, out, 0.0)


def pair_breaks(d: float):
    """Panel breaks (axial, radial) for functions centered at 0 and d e_1.

    Panels are fine near each center and reach 24 units past both; the
    radial range grows with d so the overlap region between the centers fits.
    """
    zb = set()
    for c in (0.0, d):
        zb.update(c + s * o for o in PAIR_OFFSETS for s in (-1.0, 1.0))
    zb.update(np.arange(0.0, d, 1.0))
    lo, hi = -PAIR_OFFSETS[-1], d + PAIR_OFFSETS[-1]
    z_breaks = np.array(sorted(z for z in zb if lo <= z <= hi))
    q_breaks = np.array(PAIR_OFFSETS + (PAIR_OFFSETS[-1] + 0.5 * d,))
    return z_breaks, q_breaks


class _PairData:
    """Node values of two profiles centered at 0 and d e_1 in cylinder coordinates."""

    def __init__(self, prof1: RadialProfile, prof2: RadialProfile, d: float):
        self.p1, self.p2, self.d = prof1, prof2, float(d)
        self.N = prof1.N
        self.z_breaks, self.q_breaks = pair_breaks(self.d)
        self.levels = {}
        self.good_level = 0

    def nodes(self, level):
        if level not in self.levels:
            Z, Q, W = quad.axisymmetric_nodes(self.z_breaks, self.q_breaks, PAIR_ORDER, level, self.N)
            r1 = np.hypot(Z, Q)
            r2 = np.hypot(Z - self.d, Q)
            u1, du1 = self.p1.evaluate(r1)
            u2, du2 = self.p2.evaluate(r2)
            cosang = (Z * (Z - self.d) + Q**2) / (r1 * r2)
            self.levels[level] = {
                "W": W.ravel(), "u1": np.maximum(u1, 0.0).ravel(), "u2": np.maximum(u2, 0.0).ravel(),
                "grad": (du1 * du2 * cosang).ravel(),
            }
        return self.levels[level]

    def integrate(self, kernel, rtol=quad.RTOL, atol=0.0):
        """Refine ``Σ W kernel(nodes)`` starting one level below the last converged one."""
        start = max(self.good_level - 1, 0)
        prev = None
        for level in range(start, MAX_LEVELS + 1):
            n = self.nodes(level)
            cur = float(np.dot(n["W"], kernel(n)))
            if prev is not None and abs(cur - prev) <= rtol * abs(cur) + atol:
                self.good_level = max(self.good_level, level)
                return cur
            prev_change = None if prev is None else abs(cur - prev)
            prev = cur
        if prev_change is not None and prev_change > quad.FAIL_TOL * abs(cur) + atol:
            raise QuadratureNotConverged(
                f"two-center integral at d={self.d}: levels differ by {prev_change:.3e} of {cur:.6e}")
        return cur

    def cross(self, e1, e2):
        return self.integrate(lambda n: n["u1"] ** e1 * n["u2"] ** e2)

    def h1_cross(self):
        return self.integrate(lambda n: n["grad"] + n["u1"] * n["u2"])

    def excess(self, c1, c2, q):
        return self.integrate(lambda n: _q_power_excess(c1 * n["u1"], c2 * n["u2"], q))


def _pair(prof1, prof2, d) -> _PairData:
    key = ("pair", prof2, float(d))
    if key not in prof1.cache:
        prof1.cache[key] = _PairData(prof1, prof2, d)
    return prof1.cache[key]


def cross_term(profile: RadialProfile, exp1: float, exp2: float, center1, center2,
               profile2: Optional[RadialProfile] = None) -> float:
    """∫ w^exp1(x - z_1) w^exp2(x - z_2) dx."""
    if exp1 < 1 or exp2 < 1:
        raise ValueError("exponents must be >= 1")
    profile2 = profile if profile2 is None else profile2
    d = float(np.linalg.norm(np.asarray(center1, dtype=float) - np.asarray(center2, dtype=float)))
    if d == 0.0 and profile2 is profile:
        return single_power(profile, exp1 + exp2)
    return _pair(profile, profile2, d).cross(exp1, exp2)


def h1_cross_term(profile: RadialProfile, center1, center2,
                  profile2: Optional[RadialProfile] = None) -> float:
    """∫ ∇w_1·∇w_2 + w_1 w_2 for the translates w(· - z_1), w(· - z_2)."""
    profile2 = profile if profile2 is None else profile2
    d = float(np.linalg.norm(np.asarray(center1, dtype=float) - np.asarray(center2, dtype=float)))
    if d == 0.0 and profile2 is profile:
        return profile_norms(profile)["h1"]
    return _pair(profile, profile2, d).h1_cross()


# ------------------------------------------------------------ ball corrections

def _axis_frame(centers):
    """Unit vector e with every center a multiple of e, or None."""
    e = None
    for z in centers:
        n = np.linalg.norm(z)
        if n == 0:
            continue
        if e is None:
            e = z / n
        elif np.linalg.norm(z - np.dot(z, e) * e) > 1e-12 * (1.0 + n):
            return None, False
    return e, True


class _BallData:
    """Node values of the cutoff, the potential and each term inside the correction ball."""

    def __init__(self, terms, cutoff, potential, N):
        self.profiles = [t.profile for t in terms]
        self.cutoff, self.potential, self.N = cutoff, potential, N
        centers = [np.asarray(t.center) for t in terms]
        e, collinear = _axis_frame(centers)
        self.axisymmetric = collinear
        if collinear:
            pos = [0.0 if e is None else float(np.dot(z, e)) for z in centers]
            self.centers = [np.eye(N)[0] * s for s in pos]
        else:
            self.centers = centers
        radius = potential.support_radius
        breaks = list(potential.breakpoints())
        if cutoff is not None:
            radius = max(radius, cutoff.outer_radius)
            breaks += [cutoff.inner_radius, cutoff.outer_radius]
        self.radius, self.breaks = radius, breaks
        self.levels = {}
        self.good_level = 0

    def nodes(self, level):
        if level not in self.levels:
            X, W = quad.ball_nodes(self.radius, self.breaks, BALL_ORDER, level, self.axisymmetric, 16, self.N)
            X = X.reshape(-1, self.N)
            W = W.ravel()
            theta = cutoff_value(self.cutoff, X)
            gtheta = cutoff_gradient(self.cutoff, X)
            a = self.potential(np.linalg.norm(X, axis=1))
            vals, grads = [], []
            for prof, z in zip(self.profiles, self.centers):
                diff = X - z
                r = np.linalg.norm(diff, axis=1)
                u, du = prof.evaluate(r)
                vals.append(np.maximum(u, 0.0))
                grads.append((du / np.where(r > 0, r, 1.0))[:, None] * diff)
            k = len(vals)
            h1 = np.zeros((k, k))
            l2 = np.zeros((k, k))
            for i in range(k):
                gi = theta[:, None] * grads[i] + vals[i][:, None] * gtheta
                for j in range(i, k):
                    gj = theta[:, None] * grads[j] + vals[j][:, None] * gtheta
                    cut = np.sum(gi * gj, axis=1) + a * theta**2 * vals[i] * vals[j]
                    free = np.sum(grads[i] * grads[j], axis=1) + vals[i] * vals[j]
                    h1[i, j] = h1[j, i] = np.dot(W, cut - free)
                    l2[i, j] = l2[j, i] = np.dot(W, (theta**2 - 1.0) * vals[i] * vals[j])
            self.levels[level] = {"W": W, "theta": theta, "vals": np.array(vals), "h1": h1, "l2": l2}
        return self.levels[level]

    def integrate(self, fn, scale):
        """Refine until the correction itself settles to RTOL (floor 1e-14 of ``scale``)."""
        start = max(self.good_level - 1, 0)
        prev, change = None, None
        for level in range(start, MAX_LEVELS + 1):
            cur = fn(self.nodes(level))
            if prev is not None:
                change = abs(cur - prev)
                if change <= quad.RTOL * abs(cur) + BALL_FLOOR * scale:
                    self.good_level = max(self.good_level, level)
                    return cur
            prev = cur
        if change is not None and change > quad.FAIL_TOL * abs(cur) + BALL_FLOOR * scale:
            raise QuadratureNotConverged(f"ball correction: levels differ by {change:.3e} of {cur:.6e}")
        return cur

    def quadratic(self, c, which, scale):
        return self.integrate(lambda n: float(c @ n[which] @ c), scale)

    def power(self, c, q, scale):
        def fn(n):
            v = c @ n["vals"]
            return float(np.dot(n["W"], (n["theta"] ** q - 1.0) * v**q))
        return self.integrate(fn, scale)


def _ball(field: BumpField, potential: PotentialSpec, terms) -> Optional[_BallData]:
    if field.cutoff is None and potential.is_trivial:
        return None
    first = terms[0].profile
    key = ("ball", tuple((t.profile, t.center) for t in terms), field.cutoff, potential)
    if key not in first.cache:
        first.cache[key] = _BallData(terms, field.cutoff, potential, field.N)
    return first.cache[key]


# ------------------------------------------------------------ field norms

def _check_terms(field: BumpField):
    terms = field.active
    if len(terms) > 2:
        raise NotImplementedError("fields with more than two active terms are not supported")
    return terms


def _free_quadratic(terms):
    c = [t.coeff for t in terms]
    total = sum(ci**2 * profile_norms(t.profile)["h1"] for ci, t in zip(c, terms))
    if len(terms) == 2:
        t1, t2 = terms
        total += 2.0 * c[0] * c[1] * h1_cross_term(t1.profile, t1.center, t2.center, t2.profile)
    return total


def _free_power(terms, q):
    total = sum(t.coeff**q * single_power(t.profile, q) for t in terms)
    if len(terms) == 2:
        t1, t2 = terms
        d = float(np.linalg.norm(np.subtract(t1.center, t2.center)))
        if d == 0.0:
            # same center: the sum is a single radial function
            if t1.profile is t2.profile:
                return (t1.coeff + t2.coeff) ** q * single_power(t1.profile, q)
            return radial_integral(t1.profile, lambda u, du, r: (t1.coeff * u + t2.coeff * t2.profile(r)) ** q)
        total += _pair(t1.profile, t2.profile, d).excess(t1.coeff, t2.coeff, q)
    return total


def norm_a_squared(field: BumpField, potential: PotentialSpec = CONSTANT) -> float:
    """∫ |∇u|² + a(x) u² over the field's domain."""
    terms = _check_terms(field)
    if not terms:
        return 0.0
    free = _free_quadratic(terms)
    ball = _ball(field, potential, terms)
    if ball is None:
        return free
    c = np.array([t.coeff for t in terms])
    return free + ball.quadratic(c, "h1", free)


def lebesgue_power(field: BumpField, q: float) -> float:
    """|u|_q^q."""
    terms = _check_terms(field)
    if not terms:
        return 0.0
    free = _free_power(terms, q)
    ball = _ball(field, CONSTANT, terms) if field.cutoff is not None else None
    if ball is None:
        return free
    c = np.array([t.coeff for t in terms])
    return free + ball.power(c, q, free)


def lebesgue_norm(field: BumpField, q: float) -> float:
    """|u|_q."""
    return max(lebesgue_power(field, q), 0.0) ** (1.0 / q)


def field_bundle(field: BumpField, potential: PotentialSpec = CONSTANT) -> NormBundle:
    """All integrals entering the energy functionals."""
    prm = field.params
    return NormBundle(
        norm_a_sq=norm_a_squared(field, potential),
        lp_p=lebesgue_power(field, prm.p),
        lcrit=lebesgue_power(field, prm.crit_exp),
        p=prm.p,
        crit=prm.crit_exp,
        l2=lebesgue_power(field, 2.0),
    )


# ------------------------------------------------------------ manifests

def write_manifest(field: BumpField, path) -> Path:
    """Text manifest: domain and cutoff lines, then one ``profile center coeff`` row per term.

    Each distinct profile is saved next to the manifest as ``<stem>_profile<k>.csv``.
    """
    path = Path(path)
    names = {}
    for t in field.terms:
        if id(t.profile) not in names:
            fname = f"{path.stem}_profile{len(names)}.csv"
            save_profile(t.profile, path.parent / fname)
            names[id(t.profile)] = fname
    lines = [f"domain {field.domain.kind} {field.domain.hole_radius!r}"]
    if field.cutoff is not None:
        lines.append(f"cutoff {field.cutoff.inner_radius!r} {field.cutoff.transition_width!r}")
    for t in field.terms:
        center = " ".join(repr(c) for c in t.center)
        lines.append(f"term {names[id(t.profile)]} {center} {t.coeff!r}")
    path.write_text("\n".join(lines) + "\n")
    return path


def read_manifest(path) -> BumpField:
    path = Path(path)
    domain, cutoff, terms, loaded = WHOLE_SPACE, None, [], {}
    for line in path.read_text().splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "domain":
            domain = DomainSpec(parts[1], float(parts[2]))
        elif parts[0] == "cutoff":
            cutoff = CutoffSpec(float(parts[1]), float(parts[2]))
        elif parts[0] == "term":
            if parts[1] not in loaded:
                loaded[parts[1]] = load_profile(path.parent / parts[1])
            prof = loaded[parts[1]]
            terms.append(BumpTerm(prof, tuple(float(v) for v in parts[2:-1]), float(parts[-1])))
        else:
            raise ValueError(f"unrecognised manifest line: {line!r}")
    return BumpField(tuple(terms), domain, cutoff)


def psi_field(profile: RadialProfile, rho: float, s: float, y, domain: DomainSpec = WHOLE_SPACE,
              cutoff: Optional[CutoffSpec] = None) -> BumpField:
    """ϑ[(1-s) w(· - ρ e_1) + s w(· - ρ y)]."""
    N = profile.N
    e1 = np.eye(N)[0]
    y = np.asarray(y, dtype=float)
    if cutoff is None and domain.is_exterior:
        cutoff = CutoffSpec.for_domain(domain)
    return BumpField((BumpTerm(profile, rho * e1, 1.0 - s), BumpTerm(profile, rho * y, s)), domain, cutoff)


"""Composite Gauss-Legendre rules on cylinder and ball coordinates.

Both drivers split every panel in two until successive levels agree to
``rtol``; a final disagreement above ``fail_tol`` raises
:class:`QuadratureNotConverged`.
"""
from __future__ import annotations

import functools
import math

import numpy as np
from scipy.special import roots_legendre

from .errors import QuadratureNotConverged
from .params import sphere_area

RTOL = 1e-6
FAIL_TOL = 1e-4
MAX_LEVELS = 4


@functools.lru_cache(maxsize=None)
def _gl(order):
    return roots_legendre(order)


def composite_gl(breaks, order=10):
    """Nodes and weights of the order-``order`` rule on each [b_i, b_{i+1}]."""
    b = np.asarray(breaks, dtype=float)
    x, w = _gl(order)
    a, c = b[:-1], b[1:]
    h = 0.5 * (c - a)
    nodes = (0.5 * (a + c))[:, None] + h[:, None] * x[None, :]
    weights = h[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


def split(breaks):
    b = np.asarray(breaks, dtype=float)
    mid = 0.5 * (b[:-1] + b[1:])
    out = np.empty(2 * len(b) - 1)
    out[0::2] = b
    out[1::2] = mid
    return out


def _refine_loop(evaluate, rtol, fail_tol, atol, max_levels):
    prev = evaluate(0)
    for level in range(1, max_levels + 1):
        cur = evaluate(level)
        change = abs(cur - prev)
        if change <= rtol * abs(cur) + atol:
            return cur
        prev = cur
    if change > fail_tol * abs(cur) + atol:
        raise QuadratureNotConverged(
            f"refinement levels disagree: {prev!r} vs {cur!r} (rel {change / max(abs(cur), 1e-300):.2e})")
    return cur


def refine_loop(evaluate, rtol=RTOL, fail_tol=FAIL_TOL, atol=0.0, max_levels=MAX_LEVELS):
    """Public wrapper: ``evaluate(level)`` until two levels agree."""
    return _refine_loop(evaluate, rtol, fail_tol, atol, max_levels)


def axisymmetric_nodes(z_breaks, q_breaks, order=10, level=0, N=3):
    """Nodes (Z, Q) and weights of ∫∫ f ω_{N-1} q^(N-2) dq dz at a refinement level."""
    zb, qb = z_breaks, q_breaks
    for _ in range(level):
        zb, qb = split(zb), split(qb)
    z, wz = composite_gl(zb, order)
    q, wq = composite_gl(qb, order)
    Z, Q = np.meshgrid(z, q, indexing="ij")
    W = wz[:, None] * (wq * sphere_area(N - 1) * q ** (N - 2))[None, :]
    return Z, Q, W


def axisymmetric_integral(fn, z_breaks, q_breaks, order=10, rtol=RTOL, fail_tol=FAIL_TOL,
                          atol=0.0, max_levels=MAX_LEVELS, N=3):
    """∫ fn(z, q) dx over the cylinder [z_breaks] x [q_breaks] for fn invariant about the z axis."""

    def evaluate(level):
        Z, Q, W = axisymmetric_nodes(z_breaks, q_breaks, order, level, N)
        return float(np.sum(fn(Z, Q) * W))

    return _refine_loop(evaluate, rtol, fail_tol, atol, max_levels)


def _unit_panels(radius, r_breaks):
    rb = sorted({0.0, float(radius), *[float(b) for b in r_breaks if 0.0 < b < radius]})
    fine = [rb[0]]
    for a, b in zip(rb[:-1], rb[1:]):
        n = max(1, int(math.ceil(b - a)))
        fine.extend(np.linspace(a, b, n + 1)[1:])
    return np.asarray(fine)


def ball_nodes(radius, r_breaks=(), order=8, level=0, axisymmetric=False, n_phi=16, N=3):
    """Points X (..., N) and weights for ∫_{B_radius(0)} in spherical coordinates about x1.

    With ``axisymmetric`` the integrand must be invariant under rotations
    fixing the x1 axis and any N >= 3 is allowed; otherwise N must be 3.
    """
    if not axisymmetric and N != 3:
        raise NotImplementedError("non-axisymmetric ball quadrature is implemented for N = 3")
    r_b, t_b = _unit_panels(radius, r_breaks), np.linspace(0.0, math.pi, 5)
    for _ in range(level):
        r_b, t_b = split(r_b), split(t_b)
    r, wr = composite_gl(r_b, order)
    t, wt = composite_gl(t_b, order)
    if axisymmetric:
        R, T = np.meshgrid(r, t, indexing="ij")
        X = np.zeros(R.shape + (N,))
        X[..., 0] = R * np.cos(T)
        X[..., 1] = R * np.sin(T)
        W = (wr * r ** (N - 1))[:, None] * (wt * np.sin(t) ** (N - 2) * sphere_area(N - 1))[None, :]
        return X, W
    m = n_phi * 2**level
    phi = 2.0 * math.pi * np.arange(m) / m
    wphi = np.full(m, 2.0 * math.pi / m)
    R, T, P = np.meshgrid(r, t, phi, indexing="ij")
    X = np.stack([R * np.cos(T), R * np.sin(T) * np.cos(P), R * np.sin(T) * np.sin(P)], axis=-1)
    W = (wr * r**2)[:, None, None] * (wt * np.sin(t))[None, :, None] * wphi[None, None, :]
    return X, W


def ball_integral(fn, radius, r_breaks=(), order=8, axisymmetric=False, n_phi=16, rtol=RTOL,
                  fail_tol=FAIL_TOL, atol=0.0, max_levels=MAX_LEVELS, N=3):
    """∫_{B_radius(0)} fn(X) dx; ``fn`` receives points of shape (..., N)."""

    def evaluate(level):
        X, W = ball_nodes(radius, r_breaks, order, level, axisymmetric, n_phi, N)
        return float(np.sum(fn(X) * W))

    return _refine_loop(evaluate, rtol, fail_tol, atol, max_levels)

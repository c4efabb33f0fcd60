"""Barycenter of a bump field from thresholded unit-ball averages.

μ(u)(x) is the average of |u| over B_1(x), û = [μ - max μ / 2]⁺, and
β(u) = ∫ û x dx / ∫ û dx. μ is evaluated on a cubic lattice by FFT
convolution with a voxel-fraction ball kernel. The lattice is centered at the
mean of the term centers, so translating every center translates the lattice
with it.
"""
from __future__ import annotations

import functools
import math

import numpy as np
from scipy.signal import fftconvolve

from .errors import DegenerateField
from .fields import BumpField, cutoff_value

SPACING = 0.25
PAD = 12.0
MU_FLOOR = 1e-14
SUBSAMPLES = 6
LOCAL = 4.0


@functools.lru_cache(maxsize=8)
def ball_kernel(spacing: float, N: int = 3, sub: int = SUBSAMPLES) -> np.ndarray:
    """Weights w_k ≈ |B_1 ∩ voxel_k| / |B_1| on a (2K+1)^N stencil, normalized to sum 1."""
    K = int(math.ceil(1.0 / spacing))
    offs = (np.arange(sub) + 0.5) / sub - 0.5
    idx = np.arange(-K, K + 1)
    grids = np.meshgrid(*([idx] * N), indexing="ij")
    frac = np.zeros(grids[0].shape)
    # fraction of each voxel inside the unit ball, by midpoint subsampling
    sub_grids = np.meshgrid(*([offs] * N), indexing="ij")
    for point in zip(*[g.ravel() for g in sub_grids]):
        r2 = sum((spacing * (g + o)) ** 2 for g, o in zip(grids, point))
        frac += r2 <= 1.0
    frac /= sub**N
    return frac / frac.sum()


class BarycenterLattice:
    """Per-term ball averages μ_i on one lattice; μ(Σ c_i u_i) = Σ c_i μ_i for c_i >= 0.

    μ is first evaluated only on boxes of half-width ``local`` around each
    center. Off those boxes every term is bounded by its profile at a known
    distance, and when that bound lies below half the maximum the boxes hold
    the whole support of û, so the result equals the full-lattice one. If the
    bound fails, the full lattice is built.
    """

    def __init__(self, field: BumpField, spacing: float = SPACING, pad: float = PAD,
                 local: float = LOCAL):
        if field.N != 3:
            raise NotImplementedError("the barycenter lattice is implemented for N = 3")
        centers = np.array([t.center for t in field.terms])
        self.anchor = centers.mean(axis=0)
        half = np.max(np.abs(centers - self.anchor), axis=0) + pad
        self.n_half = np.ceil(half / spacing).astype(int)
        self.spacing, self.field = spacing, field
        self.kern = ball_kernel(spacing)
        self.K = (self.kern.shape[0] - 1) // 2
        self._full = None
        hn = int(math.ceil(local / spacing))
        boxes = []
        for z in centers:
            k = np.rint((z - self.anchor) / spacing).astype(int)
            lo = np.maximum(k - hn, -self.n_half)
            hi = np.minimum(k + hn, self.n_half)
            boxes.append((lo, hi))
        self.boxes = _merge_boxes(boxes)
        # nearest distance from a point off the boxes to any field value its average sees
        reach = 1.0 + spacing * math.sqrt(3) / 2
        d_min = max(spacing * (hn + 0.5) - reach, 0.0)
        self.tail = [float(abs(t.profile(np.array([d_min]))[0])) for t in field.terms]
        self.local = [self._box_mu(lo, hi) for lo, hi in self.boxes]

    def _coords(self, lo, hi):
        return [self.anchor[k] + self.spacing * np.arange(lo[k], hi[k] + 1) for k in range(3)]

    def _box_mu(self, lo, hi):
        K = self.K
        ext = self._coords(lo - K, hi + K)
        X = np.stack(np.meshgrid(*ext, indexing="ij"), axis=-1)
        inside = np.ones(X.shape[:-1], dtype=bool)
        for k in range(3):
            idx = np.arange(lo[k] - K, hi[k] + K + 1)
            shape = [1, 1, 1]
            shape[k] = -1
            inside &= (np.abs(idx) <= self.n_half[k]).reshape(shape)
        theta = cutoff_value(self.field.cutoff, X) * inside
        mus = []
        for t in self.field.terms:
            r = np.linalg.norm(X - np.asarray(t.center), axis=-1)
            mus.append(fftconvolve(theta * np.abs(t.profile(r)), self.kern, mode="valid"))
        return self._coords(lo, hi), mus

    def _full_lattice(self):
        if self._full is None:
            self._full = [self._box_mu(-self.n_half, self.n_half)]
        return self._full

    @staticmethod
    def _moments(parts, coeffs):
        mus = []
        for axes, per_term in parts:
            mu = sum(abs(c) * m for c, m in zip(coeffs, per_term) if c != 0)
            if np.isscalar(mu):
                raise DegenerateField("all coefficients vanish")
            mus.append((axes, mu))
        top = max(float(mu.max()) for _, mu in mus)
        if top < MU_FLOOR:
            raise DegenerateField(f"max of the ball average is {top:.3e}")
        mass, first = 0.0, np.zeros(3)
        for axes, mu in mus:
            hat = np.maximum(mu - 0.5 * top, 0.0)
            mass += hat.sum()
            for k in range(3):
                other = tuple(j for j in range(3) if j != k)
                first[k] += float(np.dot(hat.sum(axis=other), axes[k]))
        return top, first / mass

    def beta(self, coeffs=None) -> np.ndarray:
        coeffs = [t.coeff for t in self.field.terms] if coeffs is None else coeffs
        top, out = self._moments(self.local, coeffs)
        if sum(abs(c) * b for c, b in zip(coeffs, self.tail)) < 0.5 * top:
            return out
        return self._moments(self._full_lattice(), coeffs)[1]


def _merge_boxes(boxes):
    boxes = [(np.array(lo), np.array(hi)) for lo, hi in boxes]
    merged = True
    while merged:
        merged = False
        for i in range(len(boxes)):
            for j in range(i + 1, len(boxes)):
                (a_lo, a_hi), (b_lo, b_hi) = boxes[i], boxes[j]
                if np.all(a_lo <= b_hi + 1) and np.all(b_lo <= a_hi + 1):
                    boxes[i] = (np.minimum(a_lo, b_lo), np.maximum(a_hi, b_hi))
                    del boxes[j]
                    merged = True
                    break
            if merged:
                break
    return boxes


def barycenter(field: BumpField, spacing: float = SPACING, pad: float = PAD) -> np.ndarray:
    """β(u) for a bump field in R^3."""
    if not field.active:
        raise DegenerateField("the field has no active terms")
    return BarycenterLattice(field, spacing, pad).beta()

"""Radial potentials a(x) = 1 + perturbation(|x|) with a(x) -> 1 at infinity."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import quad

from .params import sphere_area

KINDS = ("none", "gaussian", "compact", "tabulated")
NEGLIGIBLE = 1e-16


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    """``kind`` selects the perturbation; ``amplitude`` may be negative.

    gaussian:  amplitude * exp(-r²/width²)
    compact:   amplitude * exp(1 - 1/(1 - (r/width)²)) for r < width
    tabulated: linear interpolation of ``table_r``/``table_a``, 1 beyond the table
    """

    kind: str = "none"
    amplitude: float = 0.0
    width: float = 1.0
    table_r: Optional[tuple] = field(default=None, repr=False)
    table_a: Optional[tuple] = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}; choose from {KINDS}")
        if self.kind in ("gaussian", "compact") and self.width <= 0:
            raise ValueError("width must be positive")
        if self.kind == "tabulated":
            if self.table_r is None or self.table_a is None or len(self.table_r) != len(self.table_a):
                raise ValueError("tabulated potential needs table_r and table_a of equal length")
            if np.any(np.diff(self.table_r) <= 0):
                raise ValueError("table_r must be strictly increasing")
        if self.a0 <= 0:
            raise ValueError(f"potential must stay positive, min a = {self.a0}")

    def perturbation(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "none" or (self.kind != "tabulated" and self.amplitude == 0):
            return np.zeros_like(r)
        if self.kind == "gaussian":
            return self.amplitude * np.exp(-((r / self.width) ** 2))
        if self.kind == "compact":
            x = np.minimum(r / self.width, 1.0)
            out = np.zeros_like(r)
            inside = x < 1.0
            out[inside] = self.amplitude * np.exp(1.0 - 1.0 / (1.0 - x[inside] ** 2))
            return out
        tr, ta = np.asarray(self.table_r), np.asarray(self.table_a)
        return np.interp(r, tr, ta - 1.0, right=0.0)

    def __call__(self, r):
        return 1.0 + self.perturbation(r)

    @property
    def is_trivial(self) -> bool:
        return self.support_radius == 0.0

    @property
    def support_radius(self) -> float:
        """Radius beyond which |a - 1| < 1e-16."""
        if self.kind == "none" or (self.kind != "tabulated" and self.amplitude == 0):
            return 0.0
        if self.kind == "gaussian":
            return self.width * math.sqrt(max(math.log(abs(self.amplitude) / NEGLIGIBLE), 0.0))
        if self.kind == "compact":
            return self.width
        ta = np.asarray(self.table_a)
        nz = np.nonzero(np.abs(ta - 1.0) > NEGLIGIBLE)[0]
        if nz.size == 0:
            return 0.0
        return float(self.table_r[min(nz[-1] + 1, len(ta) - 1)])

    def breakpoints(self) -> list:
        if self.kind == "tabulated":
            return [float(r) for r in self.table_r]
        return [self.support_radius] if self.support_radius > 0 else []

    @property
    def a0(self) -> float:
        """Essential infimum of a over R^N (sampled)."""
        if self.kind == "none":
            return 1.0
        if self.kind == "tabulated":
            return float(min(1.0, np.min(self.table_a)))
        return 1.0 + min(0.0, self.amplitude)

    @property
    def sign_class(self) -> str:
        r = np.linspace(0.0, max(self.support_radius, 1.0), 2001)
        d = self.perturbation(r)
        if np.all(d <= 0):
            return "below" if np.any(d < 0) else "none"
        if np.all(d >= 0):
            return "above"
        return "mixed"

    def weighted_tail_integral(self, N: int = 3) -> float:
        """∫ (a - 1) |x|^(N-1) e^(2|x|) dx over the support, checked finite."""
        R = self.support_radius
        if R == 0.0:
            return 0.0
        val, _ = quad(lambda r: float(self.perturbation(r)) * r ** (2 * N - 2) * math.exp(2 * r),
                      0.0, R, limit=200, points=[p for p in self.breakpoints() if p < R])
        return sphere_area(N) * val

    def satisfies_above_hypothesis(self, N: int = 3) -> bool:
        return self.sign_class in ("above", "none") and math.isfinite(self.weighted_tail_integral(N))


CONSTANT = PotentialSpec()

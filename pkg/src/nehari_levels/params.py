"""Scalar problem data for -Δu + a(x)u = u^(p-1) + ε u^(2*-1)."""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ProblemParams:
    """Dimension ``N``, subcritical exponent ``p``, perturbation ``eps``.

    The limit potential is normalized to ``a_infty = 1``; use
    :func:`rescale_to_unit_potential` to reduce other values first.
    """

    N: int = 3
    p: float = 4.0
    eps: float = 0.0
    a_infty: float = 1.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 3:
            raise ValueError(f"N must be an integer >= 3, got {self.N}")
        if not 2.0 < self.p < self.crit_exp:
            raise ValueError(f"need 2 < p < 2* = {self.crit_exp}, got p={self.p}")
        if self.eps < 0:
            raise ValueError(f"eps must be >= 0, got {self.eps}")
        if self.a_infty <= 0:
            raise ValueError(f"a_infty must be > 0, got {self.a_infty}")

    @property
    def crit_exp(self) -> float:
        return 2.0 * self.N / (self.N - 2)

    def with_eps(self, eps: float) -> "ProblemParams":
        return ProblemParams(self.N, self.p, eps, self.a_infty)

    def nonlinearity(self, u):
        """f(u) = |u|^(p-2)u + ε|u|^(2*-2)u."""
        import numpy as np

        a = np.abs(u)
        return a ** (self.p - 2) * u + self.eps * a ** (self.crit_exp - 2) * u


def sphere_area(N: int) -> float:
    """Surface measure of the unit sphere in R^N."""
    return 2.0 * math.pi ** (N / 2) / math.gamma(N / 2)


def ball_volume(N: int) -> float:
    return sphere_area(N) / N


def rescale_to_unit_potential(N, p, eps, a_infty):
    """Reduce a problem with limit potential ``a_infty`` to ``a_infty = 1``.

    If v solves -Δv + v = v^(p-1) + ε' v^(2*-1) then
    u(x) = λ^(1/(p-2)) v(√λ x), λ = a_infty, solves the original problem with ε.
    Returns ``(params, u_scale, x_scale, energy_scale)`` so that
    ``u(x) = u_scale * v(x_scale * x)`` and ``E[u] = energy_scale * E'[v]``.
    """
    lam = float(a_infty)
    crit = 2.0 * N / (N - 2)
    u_scale = lam ** (1.0 / (p - 2))
    x_scale = math.sqrt(lam)
    # ε u^(2*-1) = λ^{(2*-1)/(p-2)} ε v^(2*-1); match against λ^{(p-1)/(p-2)} v^(2*-1) ε'
    eps_unit = eps * lam ** ((crit - p) / (p - 2))
    energy_scale = u_scale**2 * lam * x_scale ** (-N)
    return ProblemParams(N, p, eps_unit, 1.0), u_scale, x_scale, energy_scale

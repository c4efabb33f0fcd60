import math

import numpy as np
import pytest

from nehari_levels.errors import QuadratureNotConverged
from nehari_levels.quadrature import axisymmetric_integral, ball_integral, composite_gl, refine_loop


def test_composite_rule_is_exact_for_polynomials():
    x, w = composite_gl([0.0, 1.0, 3.0], order=6)
    assert np.dot(w, x**11) == pytest.approx(3**12 / 12, rel=1e-13)


def test_gaussian_over_space():
    # ∫ e^(-|x|^2) dx = π^(3/2)
    val = axisymmetric_integral(lambda Z, Q: np.exp(-(Z**2 + Q**2)), [-8, -2, 0, 2, 8], [0, 2, 8])
    assert val == pytest.approx(math.pi**1.5, rel=1e-10)


def test_ball_volume_and_offset_moment():
    assert ball_integral(lambda X: np.ones(X.shape[:-1]), 2.0) == pytest.approx(32 * math.pi / 3, rel=1e-12)
    # ∫_{B_1} x_k^2 dx = 4π/15 for every k; the axisymmetric rule needs k = 1
    assert ball_integral(lambda X: X[..., 0] ** 2, 1.0, axisymmetric=True) == pytest.approx(4 * math.pi / 15, rel=1e-12)
    assert ball_integral(lambda X: X[..., 2] ** 2, 1.0) == pytest.approx(4 * math.pi / 15, rel=1e-12)


def test_refinement_failure_is_reported():
    vals = iter([1.0, 2.0, 4.0, 8.0, 16.0, 32.0])
    with pytest.raises(QuadratureNotConverged):
        refine_loop(lambda level: next(vals), max_levels=4)

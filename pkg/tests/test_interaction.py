import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from nehari_levels.errors import PlateauNotReached
from nehari_levels.interaction import (bl_limit_check, c1_oracle, delta_rho, estimate_c1, gamma_function,
                                       power_inequality, power_inequality_slack, two_bump_expansion_check)
from nehari_levels.radial import profile_norms

C1_REF = oracles.interaction_limit()


def test_delta_rho_values():
    assert delta_rho(6.0, 3) == pytest.approx(1 / (6 * math.exp(12)), rel=1e-15)
    assert delta_rho(1.0, 5) == pytest.approx(math.exp(-2), rel=1e-15)
    with pytest.raises(ValueError):
        delta_rho(0.0, 3)


def test_c1_oracle_matches_independent_limit(w):
    assert c1_oracle(w) == pytest.approx(C1_REF, rel=1e-5)


def test_c1_oracle_is_symmetric_in_exponents(w):
    assert c1_oracle(w, (1.0, 3.0)) == pytest.approx(c1_oracle(w, (3.0, 1.0)), rel=1e-12)
    with pytest.raises(ValueError):
        c1_oracle(w, (2.0, 2.0))


def test_normalized_cross_integral_plateaus(params):
    rep = estimate_c1(params, [4.0, 5.0, 6.0])
    assert rep.plateau_drift < 1e-6
    assert rep.c1_estimate == pytest.approx(C1_REF, rel=1e-5)


def test_equal_exponents_do_not_plateau(params):
    # u^2 u^2 decays like e^(-4ρ)·poly, so the δ_ρ normalization runs to zero
    with pytest.raises(PlateauNotReached):
        estimate_c1(params, [3.0, 4.0, 5.0], exps=(2.0, 2.0))


def test_bl_limit_with_the_profile_itself(w):
    c = w.decay_c
    g = lambda r: w.evaluate(r)[0]
    h = lambda r: w.evaluate(r)[0] ** 3
    rep = bl_limit_check(g, (1.0, 1.0, c), h, (1.0, 0, 0), [8.0, 10.0, 12.0])
    assert rep.gap < 1e-6


x01 = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
pp = st.floats(min_value=2.0, max_value=8.0, allow_nan=False)
ab = st.floats(min_value=0.0, max_value=1e3, allow_nan=False)


@given(ab, ab, pp)
def test_power_inequality_holds(a, b, p):
    assert power_inequality_slack(a, b, p) >= -1e-12
    assert power_inequality(a, b, p)


@given(st.floats(min_value=0.01, max_value=10), st.floats(min_value=0.01, max_value=10))
def test_power_inequality_equality_at_p2_and_cubic_identity(a, b):
    assert abs(power_inequality_slack(a, b, 2.0)) < 1e-12
    direct = (a + b) ** 3 - a**3 - b**3 - 2 * (a * a * b + a * b * b)
    assert power_inequality_slack(a, b, 3.0) * (a + b) ** 3 == pytest.approx(direct, rel=1e-9, abs=1e-12)


def test_power_inequality_rejects_bad_input():
    with pytest.raises(ValueError):
        power_inequality(-1.0, 1.0, 3.0)
    with pytest.raises(ValueError):
        power_inequality(1.0, 1.0, 1.5)


@given(x01, pp)
def test_gamma_is_symmetric(s, p):
    assert gamma_function(s, 2.0, 1.3, p) == pytest.approx(gamma_function(1 - s, 2.0, 1.3, p), rel=1e-10, abs=1e-14)


@given(x01)
def test_gamma_vanishes_for_quadratic_power(s):
    assert abs(gamma_function(s, 2.0, 1.3, 2.0)) < 1e-12


def test_gamma_half_for_cubic_nonlinearity(w):
    lp = profile_norms(w)["lp"] ** 0.25
    # at s = 1/2 and p = 4 the bracket equals -1/2, so γ = -c1 √8 / (4 |w|_4^2)
    expected = -C1_REF * math.sqrt(8) / (4 * lp**2)
    assert gamma_function(0.5, C1_REF, lp, 4.0) == pytest.approx(expected, rel=1e-10)
    assert expected < 0


def test_two_bump_expansion_brackets(params, w):
    rows = two_bump_expansion_check(params, 5.0, [0.25, 0.5], profile=w)
    for r in rows:
        assert r.in_norm_bracket()
        assert r.lp_lower_bound()
    half = rows[1]
    assert abs(half.norm_residual) < 1e-3

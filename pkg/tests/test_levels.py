import math

import numpy as np
import pytest

import oracles
from nehari_levels.levels import (EnergyLedger, bubble_constant, bubble_profile, compute_m, compute_m_eps,
                                  critical_level, limit_chain_gap, rayleigh_quotient, sobolev_constant,
                                  verify_level_ordering)
from nehari_levels.params import ProblemParams


def test_sobolev_constant_n3_matches_closed_form():
    # the bubble tail is cut at r = 1e6, which leaves a relative error near 2e-6
    assert sobolev_constant(3) == pytest.approx(oracles.sobolev_closed_form(3), rel=1e-5)


def test_sobolev_constant_n3_matches_two_parameter_minimum():
    assert sobolev_constant(3) == pytest.approx(oracles.sobolev_two_parameter(3), rel=1e-4)


def test_sobolev_constant_n4():
    assert sobolev_constant(4) == pytest.approx(8 * math.pi / math.sqrt(6), rel=1e-5)


def test_bubble_constant():
    assert bubble_constant(3) == pytest.approx(3**0.25)
    assert bubble_constant(4) == pytest.approx(8**0.5)


@pytest.mark.parametrize("lam", [0.5, 0.9, 2.0])
def test_quotient_is_dilation_invariant(lam):
    assert rayleigh_quotient(bubble_profile(3, lam)) == pytest.approx(sobolev_constant(3), rel=1e-5)


def test_critical_level_formula():
    S = oracles.sobolev_closed_form(3)
    assert critical_level(3, 0.05) == pytest.approx(S**1.5 / 3 / math.sqrt(0.05), rel=1e-5)
    assert critical_level(3, 0.2) * 2 == pytest.approx(critical_level(3, 0.05), rel=1e-12)


def test_critical_level_rejects_inconsistent_constant():
    # the second route recomputes S from the bubble and must agree to 1e-8
    with pytest.raises(ArithmeticError):
        critical_level(3, 0.05, 1.01 * sobolev_constant(3))


def test_critical_level_rejects_nonpositive_eps():
    with pytest.raises(ValueError):
        critical_level(3, 0.0)


def test_m_matches_oracle():
    assert compute_m(ProblemParams(N=3, p=4.0)) == pytest.approx(oracles.level(), rel=1e-8)


def test_m_eps_matches_oracle():
    assert compute_m_eps(ProblemParams(N=3, p=4.0, eps=0.05)) == pytest.approx(oracles.level(eps=0.05), rel=1e-7)


def test_limit_chain_is_exact_at_eps_zero():
    assert abs(limit_chain_gap(ProblemParams(N=3, p=4.0))) < 1e-10


def test_single_eps_skips_extrapolation():
    led = verify_level_ordering(ProblemParams(N=3, p=4.0), [0.05])
    chk = led.check("linear extrapolation to eps=0 hits m")
    assert chk.passed is None
    assert led.all_passed


def test_ledger_csv(tmp_path):
    led = EnergyLedger(m=1.0, S=2.0)
    led.add("a < b", 1.0, 2.0, 1.0, True)
    led.add("skip", np.nan, 1.0, np.nan, None)
    text = led.write_csv(tmp_path / "x.csv").read_text().splitlines()
    assert text[0] == "check,lhs,rhs,margin,pass"
    assert text[1].endswith("true") and text[2].endswith("skipped")
    assert "[SKIP] skip" in led.report()

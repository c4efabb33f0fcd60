import numpy as np
import pytest

import oracles
from nehari_levels.fields import WHOLE_SPACE, DomainSpec
from nehari_levels.params import ProblemParams
from nehari_levels.potentials import CONSTANT, PotentialSpec
from nehari_levels.radial import shoot_ground_state
from nehari_levels.solver import (check_condition_18_24, default_disc, finite_difference_check,
                                  minimize_on_nehari_radial, nonexistence_diagnostic)

P_EPS = ProblemParams(N=3, p=4.0, eps=0.05)


@pytest.fixture(scope="module")
def w_eps():
    return shoot_ground_state(P_EPS)


@pytest.fixture(scope="module")
def reference_run(w_eps):
    return minimize_on_nehari_radial(CONSTANT, WHOLE_SPACE, P_EPS, w_eps)


def test_gradient_matches_central_differences(w_eps):
    disc = default_disc(P_EPS)
    u = 1.2 * disc.sample(w_eps) + 0.3 * np.exp(-(disc.r - 2.0) ** 2)
    assert finite_difference_check(disc, u, n_dirs=10) < 1e-5


def test_constant_potential_recovers_m_eps(reference_run):
    assert reference_run.converged
    assert reference_run.energy == pytest.approx(oracles.level(eps=0.05), rel=1e-4)
    assert reference_run.max_increase <= 1e-12


def test_below_class_lowers_the_level(reference_run, w_eps):
    run = minimize_on_nehari_radial(PotentialSpec("gaussian", -0.3, 1.0), WHOLE_SPACE, P_EPS, w_eps)
    assert run.converged and run.max_increase <= 1e-12
    assert run.energy < reference_run.energy


def test_above_class_raises_the_level(reference_run, w_eps):
    run = minimize_on_nehari_radial(PotentialSpec("compact", 0.3, 2.0), WHOLE_SPACE, P_EPS, w_eps)
    assert run.energy > reference_run.energy


def test_log_columns(reference_run, tmp_path):
    lines = reference_run.write_log(tmp_path / "log.csv").read_text().splitlines()
    assert lines[0] == "iter,energy,grad_norm,t"
    energies = [float(l.split(",")[1]) for l in lines[1:]]
    assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:]))


def test_condition_regimes(params):
    eq = check_condition_18_24(CONSTANT, WHOLE_SPACE, params, [(0, 0, 0), (4.0, 4.0, 0)])
    assert all(abs(r.lhs - r.rhs) / r.rhs < 1e-4 for r in eq)
    below = check_condition_18_24(PotentialSpec("gaussian", -0.3, 3.0), WHOLE_SPACE, params, [(0, 0, 0)])
    assert below[0].satisfied and below[0].energy_sw < below[0].m
    hole = check_condition_18_24(CONSTANT, DomainSpec.exterior(1.0), params, [(3.0, 0, 0), (0, 5.0, 0)])
    assert all(r.lhs > r.rhs and r.energy_sw > r.m for r in hole)


@pytest.mark.slow
def test_nonexistence_sequence_descends_to_m_eps():
    vals = nonexistence_diagnostic(CONSTANT, DomainSpec.exterior(1.0), P_EPS, [4, 6, 8, 10])
    m_eps = oracles.level(eps=0.05)
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert min(vals) > m_eps * (1 - 1e-8)
    assert vals[-1] - m_eps < 1e-3


def test_potential_classes():
    assert CONSTANT.is_trivial and CONSTANT.sign_class == "none"
    assert PotentialSpec("gaussian", -0.3, 1.0).sign_class == "below"
    assert PotentialSpec("compact", 0.3, 2.0).satisfies_above_hypothesis()
    assert PotentialSpec("compact", 0.3, 2.0).support_radius == 2.0
    with pytest.raises(ValueError):
        PotentialSpec("gaussian", -1.5, 1.0)
    with pytest.raises(ValueError):
        PotentialSpec("spline", 0.1, 1.0)

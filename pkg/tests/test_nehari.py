import math

import pytest
from hypothesis import given, settings, strategies as st

from nehari_levels.errors import DegenerateFunction
from nehari_levels.nehari import (NormBundle, bracket_sign_changes, energy, energy_along_ray,
                                  energy_on_nehari, nehari_residual, project_to_nehari, verify_max_along_ray)

pos = st.floats(min_value=1e-2, max_value=1e3, allow_nan=False)
eps_st = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
p_st = st.floats(min_value=2.2, max_value=5.8)


def bundle(A, P, C, p=4.0):
    return NormBundle(A, P, C, p, 6.0)


def test_closed_form_at_eps_zero():
    b = bundle(10.0, 5.0, 3.0)
    pr = project_to_nehari(b, 0.0)
    assert pr.t == pytest.approx(math.sqrt(2.0))
    assert pr.energy_at_t == pytest.approx(0.25 * 10.0 * 2.0)


def test_pure_critical_ray():
    # P = 0: t^4 ε C = A, level (1/3) A^(3/2) / (εC)^(1/2)
    b = bundle(3.0, 0.0, 2.0)
    pr = project_to_nehari(b, 0.5)
    assert pr.t == pytest.approx(3.0**0.25)
    assert pr.energy_at_t == pytest.approx(3.0**1.5 / 3.0)


def test_degenerate_inputs():
    with pytest.raises(DegenerateFunction):
        project_to_nehari(bundle(1.0, 0.0, 0.0), 0.1)
    with pytest.raises(DegenerateFunction):
        project_to_nehari(bundle(1.0, 0.0, 5.0), 0.0)
    with pytest.raises(DegenerateFunction):
        project_to_nehari(bundle(0.0, 1.0, 1.0), 0.1)


@given(pos, pos, pos, eps_st, p_st)
def test_projection_lands_on_the_manifold(A, P, C, eps, p):
    b = NormBundle(A, P, C, p, 6.0)
    pr = project_to_nehari(b, eps)
    assert abs(nehari_residual(b, eps, pr.t)) <= 1e-10 * A
    assert pr.energy_at_t == pytest.approx(energy_on_nehari(b.scaled(pr.t), eps), rel=1e-8)


@given(pos, pos, pos, eps_st, st.floats(min_value=0.1, max_value=10.0))
def test_projection_is_scale_invariant(A, P, C, eps, lam):
    b = bundle(A, P, C)
    t1 = project_to_nehari(b, eps).t
    t2 = project_to_nehari(b.scaled(lam), eps).t
    assert t2 * lam == pytest.approx(t1, rel=1e-9)


@given(pos, pos, pos, eps_st)
def test_the_ray_maximum_is_at_the_projection(A, P, C, eps):
    b = bundle(A, P, C)
    pr = project_to_nehari(b, eps)
    assert verify_max_along_ray(b, eps, pr.t)
    assert bracket_sign_changes(b, eps, pr.t) == 1


@given(pos, pos, pos, eps_st, st.floats(min_value=1e-3, max_value=0.5))
@settings(max_examples=60)
def test_level_decreases_in_eps(A, P, C, eps, d):
    b = bundle(A, P, C)
    assert project_to_nehari(b, eps + d).energy_at_t < project_to_nehari(b, eps).energy_at_t


def test_energy_matches_definition():
    b = NormBundle(4.0, 2.0, 1.0, 4.0, 6.0)
    assert energy(b, 0.3) == pytest.approx(2.0 - 0.5 - 0.05)
    assert energy_along_ray(b, 0.3, 1.0) == pytest.approx(energy(b, 0.3))

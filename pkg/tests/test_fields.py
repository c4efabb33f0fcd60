from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from nehari_levels.fields import (BumpField, BumpTerm, CutoffSpec, DomainSpec, cross_term, cutoff_gradient,
                                  cutoff_value, field_bundle, h1_cross_term, lebesgue_power, norm_a_squared,
                                  psi_field, read_manifest, smoothstep, write_manifest)
from nehari_levels.potentials import PotentialSpec
from nehari_levels.radial import profile_norms


def test_smoothstep_endpoints():
    assert smoothstep(0.0) == 0.0 and smoothstep(1.0) == 1.0
    assert smoothstep(0.5) == pytest.approx(0.5)


def test_cutoff_profile():
    spec = CutoffSpec.for_domain(DomainSpec.exterior(1.0))
    x = np.array([[0.5, 0, 0], [1.0, 0, 0], [1.5, 0, 0], [2.0, 0, 0], [0, 7.0, 0]])
    assert np.allclose(cutoff_value(spec, x), [0, 0, 0.5, 1, 1])


def test_cutoff_gradient_matches_differences():
    spec = CutoffSpec(1.0, 1.0)
    x = np.array([0.9, 1.1, 0.4])
    h = 1e-6
    fd = [(cutoff_value(spec, x + h * e) - cutoff_value(spec, x - h * e)) / (2 * h) for e in np.eye(3)]
    assert np.allclose(cutoff_gradient(spec, x), fd, atol=1e-8)


def test_exterior_field_needs_cutoff(w):
    with pytest.raises(ValueError):
        BumpField((BumpTerm(w, (5.0, 0, 0)),), DomainSpec.exterior(1.0), None)


def test_negative_coefficient_rejected(w):
    with pytest.raises(ValueError):
        BumpTerm(w, (0, 0, 0), -1.0)


def test_single_bump_norms(w):
    n = profile_norms(w)
    f = BumpField.single(w, (3.0, -1.0, 2.0))
    assert norm_a_squared(f) == pytest.approx(n["h1"], rel=1e-12)
    assert lebesgue_power(f, 4.0) == pytest.approx(n["lp"], rel=1e-12)


@pytest.mark.parametrize("k1,k2,d", [(3, 1, 4.0), (2, 2, 3.0), (1, 1, 6.0)])
def test_cross_terms_match_bipolar_oracle(w, k1, k2, d):
    got = cross_term(w, k1, k2, (0, 0, 0), (0, 0, d))
    assert got == pytest.approx(oracles.bipolar_cross(k1, k2, d), rel=1e-7)


def test_h1_cross_equals_cubic_cross(w):
    # -Δw + w = w^3 gives ∫∇w1·∇w2 + w1 w2 = ∫ w1^3 w2
    a = h1_cross_term(w, (0, 0, 0), (5.0, 0, 0))
    b = cross_term(w, 3, 1, (0, 0, 0), (5.0, 0, 0))
    assert a == pytest.approx(b, rel=1e-8)


def test_quartic_power_matches_binomial_oracle(w):
    d, a, b = 4.0, 0.7, 0.4
    f = BumpField((BumpTerm(w, (0, 0, 0), a), BumpTerm(w, (d, 0, 0), b)))
    ref = sum(comb(4, k) * a**k * b ** (4 - k) * oracles.bipolar_cross(k, 4 - k, d) for k in range(1, 4))
    ref += (a**4 + b**4) * oracles.ground_norms()[1]
    assert lebesgue_power(f, 4.0) == pytest.approx(ref, rel=1e-7)


def test_two_bump_norm_decomposition(w):
    f = psi_field(w, 5.0, 0.3, (-1.0, 0, 0))
    n = profile_norms(w)["h1"]
    cross = h1_cross_term(w, (5.0, 0, 0), (-5.0, 0, 0))
    assert norm_a_squared(f) == pytest.approx((0.7**2 + 0.3**2) * n + 2 * 0.21 * cross, rel=1e-12)


vec = st.floats(min_value=-5, max_value=5, allow_nan=False)


@given(vec, vec, vec)
@settings(max_examples=15, deadline=None)
def test_whole_space_norms_are_translation_invariant(w, zx, zy, zz):
    f = psi_field(w, 4.0, 0.35, (1.0, 2.0, 0.0))
    g = f.translated(np.array([zx, zy, zz]))
    a, b = field_bundle(f), field_bundle(g)
    assert b.norm_a_sq == pytest.approx(a.norm_a_sq, rel=1e-10)
    assert b.lp_p == pytest.approx(a.lp_p, rel=1e-10)
    assert b.lcrit == pytest.approx(a.lcrit, rel=1e-10)


def test_cutoff_lowers_norm_near_hole(w):
    dom = DomainSpec.exterior(1.0)
    far = BumpField.single(w, (20.0, 0, 0), domain=dom, cutoff=CutoffSpec.for_domain(dom))
    near = BumpField.single(w, (2.0, 0, 0), domain=dom, cutoff=CutoffSpec.for_domain(dom))
    n = profile_norms(w)
    assert field_bundle(far).lp_p == pytest.approx(n["lp"], rel=1e-9)
    assert field_bundle(near).lp_p < n["lp"]


def test_potential_enters_the_norm(w):
    pot = PotentialSpec("gaussian", 0.5, 1.0)
    f = BumpField.single(w)
    assert norm_a_squared(f, pot) > norm_a_squared(f)


def test_manifest_roundtrip(w, tmp_path):
    dom = DomainSpec.exterior(1.0)
    f = psi_field(w, 6.0, 0.25, (0.0, 1.0, 0.0), dom)
    back = read_manifest(write_manifest(f, tmp_path / "field.txt"))
    assert back.domain == f.domain and back.cutoff == f.cutoff
    x = np.array([[6.0, 0.3, 0], [0, 6.2, 1.0], [1.6, 0, 0]])
    assert np.allclose(back(x), f(x), atol=1e-12)

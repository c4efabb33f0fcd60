import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from nehari_levels.fields import DomainSpec
from nehari_levels.levels import compute_m
from nehari_levels.minmax import (AXIS_POINT, SigmaPoint, find_beta_zero, inequality_chain_report, make_psi,
                                  scan_levels, sigma_grid)
from nehari_levels.params import ProblemParams


@pytest.fixture(scope="module")
def small_scan():
    sigma = [AXIS_POINT, SigmaPoint.from_chart(0.0, math.pi / 2), SigmaPoint.from_chart(0.0, 0.0)]
    return scan_levels(6.0, 0.05, s_count=11, sigma=sigma)


def test_sigma_grid_lies_on_the_sphere():
    pts = sigma_grid(16, 8)
    assert len(pts) == 130
    for p in pts:
        assert np.linalg.norm(p.vector - np.array([1.0, 0, 0])) == pytest.approx(2.0, abs=1e-12)
    assert pts[0].y == (3.0, 0.0, 0.0) and pts[-1].y == (-1.0, 0.0, 0.0)


def test_make_psi_examples(w):
    f0 = make_psi(0.0, AXIS_POINT, 5.0, profile=w)
    assert [t.coeff for t in f0.terms] == [1.0, 0.0]
    f1 = make_psi(1.0, AXIS_POINT, 5.0, profile=w)
    assert f1.terms[1].center == (-5.0, 0.0, 0.0) and f1.terms[1].coeff == 1.0
    fh = make_psi(0.5, AXIS_POINT, 5.0, profile=w)
    assert fh.terms[0].center == (5.0, 0.0, 0.0) and fh.terms[0].coeff == fh.terms[1].coeff == 0.5
    ext = make_psi(0.5, AXIS_POINT, 5.0, DomainSpec.exterior(1.0), profile=w)
    assert ext.cutoff is not None
    with pytest.raises(ValueError):
        make_psi(1.5, AXIS_POINT, 5.0, profile=w)


def test_scan_basic_relations(small_scan):
    m = compute_m(ProblemParams(N=3))
    assert small_scan.B <= small_scan.A
    assert m < small_scan.A < 2 * m
    assert max(abs(p.residual) for p in small_scan.points) < 1e-10


def test_scan_maximum_sits_at_half(small_scan):
    # oracle: the leading coefficient ((1-s)^2+s^2)/((1-s)^p+s^p)^(2/p) peaks at s = 1/2
    lead = lambda s: -((1 - s) ** 2 + s**2) / ((1 - s) ** 4 + s**4) ** 0.5
    s_ref = minimize_scalar(lead, bounds=(0.05, 0.95), method="bounded", options={"xatol": 1e-10}).x
    assert small_scan.argmax[0] == pytest.approx(s_ref, abs=1e-4)


def test_scan_energy_symmetry(small_scan):
    axis = {round(p.s, 6): p.energy for p in small_scan.points if p.y == AXIS_POINT}
    for s, e in axis.items():
        assert e == pytest.approx(axis[round(1 - s, 6)], rel=1e-8)


def test_scan_csv_columns(small_scan, tmp_path):
    head = small_scan.write_csv(tmp_path / "scan.csv").read_text().splitlines()
    assert head[0] == "s,azimuth,polar,t,energy,beta_x,beta_y,beta_z"
    assert len(head) == 1 + len(small_scan.points)


def test_beta_zero_on_symmetric_setups():
    m = compute_m(ProblemParams(N=3))
    for dom in (DomainSpec(), DomainSpec.exterior(1.0)):
        cert = find_beta_zero(6.0, 0.05, dom)
        assert cert.s_star == pytest.approx(0.5, abs=1e-9)
        assert all(v > 0 for _, v in cert.precondition)
        assert cert.energy > m


def test_chain_at_eps_zero_uses_subcritical_label(small_scan):
    scan0 = scan_levels(6.0, 0.0, s_count=11, sigma=[AXIS_POINT])
    led = inequality_chain_report(6.0, 0.0, scan=scan0)
    names = [c.name for c in led.checks]
    assert "A < 2 m" in names and "A < 2 m_eps" not in names
    assert led.all_passed

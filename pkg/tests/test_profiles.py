import math

import numpy as np
import pytest

from equiwave.profiles import (arclength_coordinate, bumpy_surface,
                               flat_surface, round_surface, round_target,
                               tabulated_surface, validate_profile)


def test_round_jet_at_equator():
    rs = round_surface()
    assert rs.jet(math.pi / 2) == pytest.approx((1.0, 0.0, -1.0, 1.0))


def test_pole_expansion_round():
    rs = round_surface()
    r = np.array([0.1, 0.05, 0.025, 0.0125])
    resid = np.abs(rs.f(r) - (r - r**3 / 6.0)) / r**3
    assert np.all(np.diff(resid) < 0)
    assert resid[-1] < 1e-5


def test_bumpy_jet_at_origin():
    bs = bumpy_surface(0.1)
    f, df, d2f, k = bs.jet(0.0)
    assert f == pytest.approx(0.0, abs=1e-14)
    assert df == pytest.approx(1.0)
    assert d2f == pytest.approx(0.0, abs=1e-14)
    assert k == pytest.approx(1.0 - 0.6)
    assert k > 0


def test_jet_rejects_out_of_range():
    rs = round_surface()
    with pytest.raises(ValueError):
        rs.jet(-0.1)
    with pytest.raises(ValueError):
        rs.jet(4.0)


def test_validate_round_passes():
    report = validate_profile(round_surface())
    assert report.passed
    assert all(c.passed for c in report.checks)


def test_validate_open_profile_fails():
    # f = r never closes up at r = R
    report = validate_profile(flat_surface(R=1.0))
    names = {c.name: c.passed for c in report.checks}
    assert not names["f(R)=0"]
    assert not report.passed


def test_validate_bumpy_passes():
    report = validate_profile(bumpy_surface(0.05))
    assert report.passed


def test_curvature_positive_margin_bumpy():
    bs = bumpy_surface(0.05)
    r = np.linspace(1e-4, bs.pole_margin, 200)
    assert np.all(bs.k(r) > 0)


def test_arclength_midpoint_zero():
    rs = round_surface()
    assert arclength_coordinate(rs, rs.R / 2) == pytest.approx(0.0, abs=1e-12)


def test_arclength_round_closed_form():
    rs = round_surface()
    for r in [0.5, 1.0, 2.0, 2.8]:
        assert arclength_coordinate(rs, r) == pytest.approx(
            math.log(math.tan(r / 2.0)), abs=1e-9)


def test_arclength_monotone_to_minus_infinity():
    rs = round_surface()
    rvals = [0.5, 0.1, 0.02, 0.004]
    svals = [arclength_coordinate(rs, r) for r in rvals]
    assert all(b < a for a, b in zip(svals, svals[1:]))
    assert svals[-1] < -5.0


def test_arclength_rejects_poles():
    rs = round_surface()
    with pytest.raises(ValueError):
        arclength_coordinate(rs, 0.0)
    with pytest.raises(ValueError):
        arclength_coordinate(rs, rs.R)


def test_round_target_volume():
    rt = round_target()
    assert rt.vol == pytest.approx(4.0 * math.pi)
    assert rt.H == math.pi


def test_tabulated_round_trip(tmp_path):
    r = np.linspace(0.0, math.pi, 400)
    path = tmp_path / "profile.csv"
    with open(path, "w") as fh:
        fh.write("r,f\n")
        for ri in r:
            fh.write(f"{ri:.16g},{math.sin(ri):.16g}\n")
    prof = tabulated_surface(str(path))
    assert prof.R == pytest.approx(math.pi)
    sample = np.linspace(0.3, 2.8, 40)
    assert np.max(np.abs(prof.f(sample) - np.sin(sample))) < 1e-8
    assert np.max(np.abs(prof.df(sample) - np.cos(sample))) < 1e-5
    assert validate_profile(prof).passed


def test_tabulated_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("radius,value\n0,0\n1,1\n")
    with pytest.raises(ValueError, match="header"):
        tabulated_surface(str(path))


def test_tabulated_rejects_non_increasing(tmp_path):
    path = tmp_path / "bad.csv"
    rows = "\n".join(f"{x},{x}" for x in [0.0, 0.1, 0.1, 0.3, 0.4, 0.5, 0.6, 0.7])
    path.write_text("r,f\n" + rows + "\n")
    with pytest.raises(ValueError, match="increasing"):
        tabulated_surface(str(path))

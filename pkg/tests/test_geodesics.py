import math

import numpy as np
import pytest

from equiwave import geodesics as gd
from equiwave.profiles import bumpy_surface, round_surface


@pytest.fixture(scope="module")
def rs():
    return round_surface()


@pytest.fixture(scope="module")
def bs():
    return bumpy_surface(0.05)


def test_trace_meridian(rs):
    path = gd.geodesic_trace(rs, (0.5, 0.3), 0.0, 1.0, step=1e-3)
    assert np.max(np.abs(path.theta - 0.3)) < 1e-12
    assert path.r[-1] == pytest.approx(1.5, abs=1e-10)


def test_trace_equator(rs):
    path = gd.geodesic_trace(rs, (math.pi / 2, 0.0), math.pi / 2, 2.0,
                             step=1e-3)
    assert np.max(np.abs(path.r - math.pi / 2)) < 1e-10
    assert path.theta[-1] == pytest.approx(2.0, abs=1e-8)


def test_trace_unit_speed(bs):
    path = gd.geodesic_trace(bs, (0.8, 0.0), 1.1, 1.0, step=1e-3)
    assert np.max(np.abs(path.speed(bs) - 1.0)) < 1e-8


def test_clairaut_drift_bumpy(bs):
    path = gd.geodesic_trace(bs, (0.8, 0.0), 1.1, 1.0, step=1e-4)
    c = path.clairaut(bs)
    assert np.max(np.abs(c - c[0])) / abs(c[0]) < 1e-8


def test_trace_pole_crossing(rs):
    with pytest.raises(gd.PoleCrossingError) as exc:
        gd.geodesic_trace(rs, (0.3, 0.0), math.pi, 1.0, step=1e-3)
    assert len(exc.value.path.r) > 1


def test_distance_meridian(rs):
    tri = gd.geodesic_distance(rs, 0.7, 0.2, 0.0)
    assert tri.d == pytest.approx(0.5)
    assert tri.alpha in (0.0, math.pi)


def test_distance_round_law_of_cosines(rs):
    tri = gd.geodesic_distance(rs, 0.2, 0.3, math.pi / 2)
    assert tri.d == pytest.approx(math.acos(math.cos(0.2) * math.cos(0.3)),
                                  abs=1e-8)


def test_distance_symmetry(rs):
    d1 = gd.geodesic_distance(rs, 0.2, 0.3, math.pi / 2).d
    d2 = gd.geodesic_distance(rs, 0.3, 0.2, math.pi / 2).d
    assert abs(d1 - d2) < 1e-10


def test_sine_transfer_identity(bs):
    tri = gd.geodesic_distance(bs, 0.25, 0.4, 0.9)
    lhs = float(bs.f(tri.r)) * math.sin(tri.beta)
    rhs = float(bs.f(tri.rp)) * math.sin(tri.alpha)
    assert abs(lhs - rhs) < 1e-8


def test_comparison_distances_flat():
    d0, _ = gd.comparison_distances(0.3, 0.4, math.pi / 3, K=1.0)
    assert d0 == pytest.approx(math.sqrt(0.13))


def test_comparison_small_curvature_limit():
    d0, dK = gd.comparison_distances(0.3, 0.4, 1.0, K=1e-6)
    assert abs(dK - d0) < 1e-6


def test_comparison_bracket_bumpy(bs):
    K = 1.05 * float(np.max(bs.k(np.linspace(0.0, bs.R, 512))))
    rng = np.random.default_rng(7)
    for _ in range(25):
        r, rp = rng.uniform(0.05, 0.5, 2)
        tp = rng.uniform(0.1, 2.0)
        tri = gd.fill_comparisons(bs, gd.geodesic_distance(bs, r, rp, tp), K)
        assert tri.dK <= tri.d + 1e-12
        assert tri.d <= tri.d0 + 1e-12


def test_comparison_angles_formula():
    a0, _, _, _ = gd.comparison_angles(0.3, 0.4, 0.5, K=1.0)
    assert math.cos(a0) == pytest.approx(0.8)


def test_comparison_angles_degenerate():
    a0, aK, b0, bK = gd.comparison_angles(0.3, 0.4, 0.7, K=1.0)
    assert a0 == pytest.approx(0.0, abs=1e-6)


def test_comparison_angles_small_scale():
    a0, aK, _, _ = gd.comparison_angles(0.003, 0.004, 0.005, K=1.0)
    assert abs(aK - a0) < 1e-4


def test_comparison_angles_rejects_bad_triangle():
    with pytest.raises(ValueError):
        gd.comparison_angles(0.1, 0.1, 0.5, K=1.0)


def test_true_angle_between_comparisons(rs):
    tri = gd.fill_comparisons(rs, gd.geodesic_distance(rs, 0.3, 0.4, 1.0),
                              K=1.0)
    assert tri.alpha0 - 1e-9 <= tri.alpha <= tri.alphaK + 1e-9


def test_eikonal_meridian(rs):
    assert gd.eikonal_residual(rs, 0.4, 0.6, 0.0) < 1e-8


def test_eikonal_round(rs):
    assert gd.eikonal_residual(rs, 0.3, 0.4, 0.8, h=1e-4) < 1e-6


def test_eikonal_second_order(bs):
    r1 = gd.eikonal_residual(bs, 0.3, 0.4, 0.8, h=2e-3)
    r2 = gd.eikonal_residual(bs, 0.3, 0.4, 0.8, h=1e-3)
    assert r2 < r1 / 2.5


def test_angle_identities_octant(rs):
    tri = gd.geodesic_distance(rs, math.pi / 2, math.pi / 2, math.pi / 2)
    assert tri.alpha == pytest.approx(math.pi / 2, abs=1e-9)
    assert tri.beta == pytest.approx(math.pi / 2, abs=1e-9)
    assert gd.gauss_bonnet_residual(rs, tri) < 1e-6


def test_angle_identities_report(rs):
    tri = gd.geodesic_distance(rs, 0.3, 0.4, 1.0)
    rep = gd.angle_identities_check(rs, tri, K=1.0)
    assert rep["dy_drp_residual"] < 1e-4
    assert rep["gauss_bonnet_residual"] < 1e-5
    lo, hi = rep["ratio_m"]
    assert 0.0 < lo <= hi < math.inf
    assert rep["angle_derivative_brackets"]["ok"]
    for ratio in rep["law_of_sines_ratios"]:
        assert 0.5 < ratio < 2.0


def test_lightcone_empty_region(rs):
    assert gd.lightcone_kernel_integral(rs, 0.4, 0.5, 0.05) == 0.0


def test_lightcone_finite_near_limit(rs):
    val = gd.lightcone_kernel_integral(rs, 0.4, 0.5, 0.1 + 1e-4)
    assert 0.0 < val < math.inf


def test_lightcone_sqrt_scaling(rs):
    # near the tip the value scales like sqrt(r'/r): quadrupling r'
    # doubles it (small radii so the surface is nearly flat)
    r = 0.01
    v1 = gd.lightcone_kernel_integral(rs, r, 0.04, 0.03 + 1e-5)
    v2 = gd.lightcone_kernel_integral(rs, r, 0.16, 0.15 + 1e-5)
    assert v2 / v1 == pytest.approx(2.0, rel=0.1)


def test_lightcone_bounded_family(rs):
    for rp in (0.2, 0.4, 0.6):
        v = gd.lightcone_kernel_integral(rs, 0.1, rp, abs(0.1 - rp) + 1e-4)
        assert v / math.sqrt(rp / 0.1) < 10.0

import math

import numpy as np
import pytest

from equiwave import stationary as st
from equiwave.profiles import bumpy_surface, round_surface, round_target


@pytest.fixture(scope="module")
def rs():
    return round_surface()


@pytest.fixture(scope="module")
def rt():
    return round_target()


def _grid(n):
    return np.linspace(0.0, math.pi, n + 1)


def test_action_identity_map(rs, rt):
    r = _grid(2000)
    assert st.reduced_action(rs, rt, r, 1, 0.0) == pytest.approx(
        4.0 * math.pi, rel=1e-6)


def test_action_identity_map_rotating(rs, rt):
    r = _grid(2000)
    assert st.reduced_action(rs, rt, r, 1, 0.5) == pytest.approx(
        4.0 * math.pi - math.pi / 3.0, rel=1e-6)


def test_action_zero_profile(rs, rt):
    assert st.reduced_action(rs, rt, np.zeros(501), 1, 0.0) == 0.0


def test_gradient_matches_finite_differences(rs, rt):
    rng = np.random.default_rng(1)
    phi = st.default_init(rs, rt, 150)
    dphi = np.zeros(151)
    dphi[1:-1] = rng.standard_normal(149)
    g = st.reduced_action_gradient(rs, rt, phi, 2, 0.3)
    errs = []
    for eps in (1e-3, 1e-4):
        fd = (st.reduced_action(rs, rt, phi + eps * dphi, 2, 0.3)
              - st.reduced_action(rs, rt, phi - eps * dphi, 2, 0.3)) / (2 * eps)
        errs.append(abs(fd - float(g @ dphi[1:-1])))
    # second order in the FD step
    assert errs[1] < errs[0] / 50.0


def test_gradient_vanishes_on_harmonic_map(rs, rt):
    r = _grid(2000)
    g = st.reduced_action_gradient(rs, rt, r, 1, 0.0)
    assert np.max(np.abs(g)) < 1e-8 * 2000


def test_el_residual_identity_map(rs, rt):
    r = _grid(1000)
    res = st.el_residual(rs, rt, r, 1, 0.0)
    assert np.max(np.abs(res)) < 1e-8


def test_el_residual_bogomolny_l2(rs, rt):
    sups = []
    for n in (500, 1000):
        r = _grid(n)
        phi = 2.0 * np.arctan(np.tan(r / 2.0) ** 2)
        phi[-1] = math.pi
        res = st.el_residual(rs, rt, phi, 2, 0.0)
        # the pole cells amplify rounding through l^2/f^2; check the bulk
        inner = res[5:-5]
        sups.append(float(np.max(np.abs(inner))))
    assert sups[1] < sups[0] / 3.0


def test_el_residual_flags_non_solution(rt):
    bs = bumpy_surface(0.05)
    r = np.linspace(0.0, bs.R, 501)
    res = st.el_residual(bs, rt, math.pi * r / bs.R, 1, 0.0)
    assert np.max(np.abs(res)) > 1e-2


@pytest.mark.parametrize("l", [1, 2, 3])
def test_solver_matches_harmonic_oracle(rs, rt, l):
    sol = st.solve_stationary(rs, rt, l, 0.0)
    assert sol.converged
    oracle = 2.0 * np.arctan(np.tan(sol.r / 2.0) ** l)
    oracle[-1] = math.pi
    assert np.max(np.abs(sol.phi - oracle)) < 1e-3
    assert sol.action == pytest.approx(4.0 * math.pi * l, rel=1e-3)


def test_solver_rotating_below_competitor(rs, rt):
    sol = st.solve_stationary(rs, rt, 1, 0.5)
    assert sol.converged
    assert sol.action <= 4.0 * math.pi - math.pi / 3.0 + 1e-3
    assert sol.action < 4.0 * math.pi


def test_solver_monotone_descent(rs, rt):
    sol = st.solve_stationary(rs, rt, 1, 0.5)
    hist = sol.action_history
    assert len(hist) > 2
    for a, b in zip(hist, hist[1:]):
        assert b <= a + 5e-12 * max(1.0, abs(a))


def test_solver_bumpy_converges(rt):
    bs = bumpy_surface(0.05)
    sol = st.solve_stationary(bs, rt, 1, 0.3,
                              options=st.SolverOptions(N=4000))
    assert sol.converged
    assert sol.residual_norm < 1e-6
    assert sol.action < 1 * rt.vol


def test_solver_grid_convergence(rs, rt):
    acts = [st.solve_stationary(rs, rt, 1, 0.5,
                                options=st.SolverOptions(N=n)).action
            for n in (250, 500, 1000)]
    lim = acts[-1]
    e1, e2 = abs(acts[0] - lim), abs(acts[1] - lim)
    assert e2 < e1 / 2.5


def test_solver_rejects_bad_init(rs, rt):
    bad = np.full(2001, 0.5)
    with pytest.raises(ValueError):
        st.solve_stationary(rs, rt, 1, 0.0, init=bad)


def test_solver_multistart_deterministic(rs, rt):
    opts = st.SolverOptions(N=250, multistart=2, seed=5)
    a1 = st.solve_stationary(rs, rt, 1, 0.5, options=opts).action
    a2 = st.solve_stationary(rs, rt, 1, 0.5, options=opts).action
    assert a1 == a2


def test_degree_values(rt):
    assert st.degree_of(rt, 0.0, math.pi, 2) == 2
    assert st.degree_of(rt, 0.0, 0.0, 3) == 0
    assert st.degree_of(rt, math.pi, 0.0, 1) == -1


def test_degree_rejects_interior_endpoint(rt):
    with pytest.raises(ValueError):
        st.degree_of(rt, 0.3, math.pi, 1)


def test_gee_omega_constant_phase(rs, rt):
    phi = st.default_init(rs, rt, 400)
    base = st.reduced_action(rs, rt, phi, 1, 0.2)
    assert st.gee_omega(rs, rt, phi, np.ones(401), 1, 0.2) == pytest.approx(
        base, abs=1e-14)
    assert st.gee_omega(rs, rt, phi, None, 1, 0.2) == base


def test_gee_omega_varying_phase_larger(rs, rt):
    phi = st.default_init(rs, rt, 400)
    r = _grid(400)
    base = st.reduced_action(rs, rt, phi, 1, 0.2)
    assert st.gee_omega(rs, rt, phi, r / math.pi, 1, 0.2) > base


def test_gee_omega_minimizer_saturates_volume(rs, rt):
    sol = st.solve_stationary(rs, rt, 1, 0.0)
    val = st.gee_omega(rs, rt, sol.phi, None, 1, 0.0)
    assert val >= 1 * rt.vol - 1e-6


def test_exponent_fit_oracle_l2(rs, rt):
    r = _grid(2000)
    phi = 2.0 * np.arctan(np.tan(r / 2.0) ** 2)
    phi[-1] = math.pi
    a_l, p_l, a_r, p_r = st.boundary_exponent_fit_arrays(r, phi, math.pi,
                                                         math.pi)
    assert 1.96 <= p_l <= 2.04
    assert 1.96 <= p_r <= 2.04


def test_exponent_fit_linear_profile(rs, rt):
    r = _grid(500)
    a_l, p_l, _, p_r = st.boundary_exponent_fit_arrays(r, r.copy(), math.pi,
                                                       math.pi)
    assert p_l == pytest.approx(1.0, abs=1e-12)
    assert a_l == pytest.approx(1.0, abs=1e-12)

"""Stationary rotating maps by minimization of the reduced radial action.

The action of an l-equivariant, frequency-omega map with profile phi on
[0, R] (phi(0) = 0, phi(R) = H) is

    H(phi) = pi * int_0^R [ phi'^2 + (l^2/f^2 - omega^2) g(phi)^2 ] f dr.

Discretization uses the midpoint rule per cell, which keeps every
evaluation of l^2/f^2 strictly inside (0, R).  Minimization is projected
gradient descent with backtracking plus a damped Newton polish on the
tridiagonal Hessian, run through a coarse-to-fine grid continuation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .profiles import SurfaceProfile, TargetProfile


@dataclass
class SolverOptions:
    N: int = 2000
    tol: float = 1e-10          # on the scaled gradient sup norm
    step_tol: float = 1e-9      # on the sup norm of the Newton correction
    max_iter: int = 2000
    gd_iters: int = 120         # descent iterations before the Newton stage
    newton_iters: int = 80
    multistart: int = 0         # extra perturbed initializations
    seed: int = 0
    continuation: bool = True


@dataclass
class StationarySolution:
    r: np.ndarray               # uniform node grid, N+1 points on [0, R]
    phi: np.ndarray
    l: int
    omega: float
    action: float
    grad_norm: float            # scaled sup norm of the discrete gradient
    residual_norm: float        # weighted L2 norm of the pointwise ODE residual
    exponents: tuple[float, float, float, float]
    converged: bool
    iterations: int
    action_history: list[float] = field(default_factory=list)


class _Discretization:
    """Midpoint-rule action with analytic gradient and tridiagonal Hessian."""

    def __init__(self, surface: SurfaceProfile, target: TargetProfile,
                 N: int, l: int, omega: float):
        self.N = N
        self.h = surface.R / N
        self.r = np.linspace(0.0, surface.R, N + 1)
        rm = self.r[:-1] + 0.5 * self.h
        self.fm = np.asarray(surface.f(rm), dtype=float)
        self.w = (l * l) / (self.fm * self.fm) - omega * omega
        self.target = target
        self.H = target.H

    def action(self, phi):
        d = np.diff(phi) / self.h
        pm = 0.5 * (phi[:-1] + phi[1:])
        g = self.target.g(pm)
        val = math.pi * self.h * float(np.sum(self.fm * (d * d + self.w * g * g)))
        if not math.isfinite(val):
            raise FloatingPointError("non-finite action integrand")
        return val

    def gradient(self, phi):
        """Derivative with respect to the interior nodes (endpoints pinned)."""
        d = np.diff(phi) / self.h
        pm = 0.5 * (phi[:-1] + phi[1:])
        gg = self.target.g(pm) * self.target.dg(pm)
        # per-cell contributions to the two adjacent nodes
        a = self.h * self.fm * (-2.0 * d / self.h + self.w * gg)
        b = self.h * self.fm * (2.0 * d / self.h + self.w * gg)
        return math.pi * (a[1:] + b[:-1])

    def hessian_banded(self, phi):
        """(3, N-1) banded form of the interior Hessian for solve_banded."""
        pm = 0.5 * (phi[:-1] + phi[1:])
        g = self.target.g(pm)
        dg = self.target.dg(pm)
        d2g = self.target.d2g(pm)
        pprime = dg * dg + g * d2g
        diag_cell = self.h * self.fm * (2.0 / self.h**2 + 0.5 * self.w * pprime)
        off_cell = self.h * self.fm * (-2.0 / self.h**2 + 0.5 * self.w * pprime)
        n = self.N - 1
        ab = np.zeros((3, n))
        ab[1] = math.pi * (diag_cell[:-1] + diag_cell[1:])
        ab[0, 1:] = math.pi * off_cell[1:-1]
        ab[2, :-1] = math.pi * off_cell[1:-1]
        return ab


def reduced_action(surface: SurfaceProfile, target: TargetProfile,
                   phi: np.ndarray, l: int, omega: float) -> float:
    """Midpoint-rule value of the radial action for a node-grid phi."""
    disc = _Discretization(surface, target, len(phi) - 1, l, omega)
    return disc.action(np.asarray(phi, dtype=float))


def reduced_action_gradient(surface: SurfaceProfile, target: TargetProfile,
                            phi: np.ndarray, l: int, omega: float) -> np.ndarray:
    """Gradient of the discrete action at the interior nodes."""
    disc = _Discretization(surface, target, len(phi) - 1, l, omega)
    return disc.gradient(np.asarray(phi, dtype=float))


def el_residual(surface: SurfaceProfile, target: TargetProfile,
                phi: np.ndarray, l: int, omega: float) -> np.ndarray:
    """Pointwise second-order residual of the profile ODE

        phi'' + (f'/f) phi' + (omega^2 - l^2/f^2) g(phi) g'(phi) = 0

    on the interior nodes of a uniform grid."""
    phi = np.asarray(phi, dtype=float)
    N = len(phi) - 1
    h = surface.R / N
    r = np.linspace(0.0, surface.R, N + 1)[1:-1]
    f = np.asarray(surface.f(r), dtype=float)
    df = np.asarray(surface.df(r), dtype=float)
    p = phi[1:-1]
    lap = (phi[2:] - 2.0 * p + phi[:-2]) / (h * h)
    dr = (phi[2:] - phi[:-2]) / (2.0 * h)
    return (lap + df / f * dr
            + (omega * omega - l * l / (f * f)) * target.g(p) * target.dg(p))


def _weighted_residual_norm(surface, target, phi, l, omega):
    res = el_residual(surface, target, phi, l, omega)
    N = len(phi) - 1
    h = surface.R / N
    r = np.linspace(0.0, surface.R, N + 1)[1:-1]
    f = np.asarray(surface.f(r), dtype=float)
    return math.sqrt(h * float(np.sum(res * res * f)) / (h * float(np.sum(f))))


def default_init(surface: SurfaceProfile, target: TargetProfile,
                 N: int) -> np.ndarray:
    """Smooth boundary-respecting initial profile, H (1 - cos(pi r/R)) / 2."""
    r = np.linspace(0.0, surface.R, N + 1)
    return target.H * 0.5 * (1.0 - np.cos(math.pi * r / surface.R))


def _minimize(disc: _Discretization, phi, opts: SolverOptions, history):
    """Monotone descent to first-order stationarity on one grid level.

    Every accepted step strictly decreases the action (Armijo); the Newton
    direction is used when it is a descent direction and falls back to a
    projected gradient step otherwise.
    """
    H = disc.H
    act = disc.action(phi)
    history.append(act)
    scale = math.pi * disc.h
    t_gd = disc.h * disc.h
    iters = 0

    def try_step(direction, t0):
        nonlocal act
        t = t0
        for _ in range(40):
            trial = phi.copy()
            trial[1:-1] = np.clip(phi[1:-1] + t * direction, 0.0, H)
            a_t = disc.action(trial)
            if math.isnan(a_t):
                raise FloatingPointError(
                    f"NaN in line search at iteration {iters}")
            if a_t < act - 1e-14 * max(1.0, abs(act)):
                phi[:] = trial
                act = a_t
                return t
            t *= 0.5
        return 0.0

    def newton_step_size(p):
        g = disc.gradient(p)
        ab = disc.hessian_banded(p)
        try:
            dn = solve_banded((1, 1), ab, -g)
        except np.linalg.LinAlgError:
            return None, g
        return dn, g

    gnorm = float("inf")
    for iters in range(1, opts.max_iter + 1):
        g = disc.gradient(phi)
        gnorm = float(np.max(np.abs(g))) / scale
        if gnorm < opts.tol:
            history.append(act)
            return phi, act, gnorm, iters, True
        stepped = try_step(-g, max(t_gd, 2.0 * t_gd))
        if stepped:
            t_gd = stepped
            history.append(act)
        if iters >= opts.gd_iters or not stepped:
            break

    # Newton polish on the stationarity system.  Step control is on the
    # sup norm of the Newton correction, which stays meaningful after the
    # action decrease drops below double-precision resolution; the action
    # is still required not to increase beyond rounding.
    slack = 1e-12 * max(1.0, abs(act))
    for _ in range(opts.newton_iters):
        iters += 1
        dn, g = newton_step_size(phi)
        gnorm = float(np.max(np.abs(g))) / scale
        if gnorm < opts.tol:
            history.append(act)
            return phi, act, gnorm, iters, True
        if dn is None:
            break
        q = float(np.max(np.abs(dn)))
        if q < opts.step_tol:
            history.append(act)
            return phi, act, gnorm, iters, True
        t, accepted = 1.0, False
        for _ in range(25):
            trial = phi.copy()
            trial[1:-1] = np.clip(phi[1:-1] + t * dn, 0.0, H)
            a_t = disc.action(trial)
            if math.isnan(a_t):
                raise FloatingPointError(
                    f"NaN in line search at iteration {iters}")
            dn_t, _ = newton_step_size(trial)
            q_t = float(np.max(np.abs(dn_t))) if dn_t is not None else math.inf
            if a_t <= act + slack and q_t <= (1.0 - 0.25 * t) * q:
                phi, act = trial, min(a_t, act)
                accepted = True
                break
            t *= 0.5
        history.append(act)
        if not accepted:
            break
    g = disc.gradient(phi)
    gnorm = float(np.max(np.abs(g))) / scale
    dn, _ = newton_step_size(phi)
    q = float(np.max(np.abs(dn))) if dn is not None else math.inf
    return phi, act, gnorm, iters, gnorm < opts.tol or q < opts.step_tol


def solve_stationary(surface: SurfaceProfile, target: TargetProfile,
                     l: int, omega: float, init: np.ndarray | None = None,
                     options: SolverOptions | None = None) -> StationarySolution:
    """Minimize the radial action over profiles with phi(0)=0, phi(R)=H.

    Grid continuation solves on N/16 and N/4 nodes first and interpolates
    up; with ``multistart`` > 0 additional randomly perturbed initial
    profiles are tried and the lowest action wins.
    """
    opts = options or SolverOptions()
    N = opts.N
    if init is not None:
        init = np.asarray(init, dtype=float)
        if len(init) != N + 1:
            raise ValueError(f"init must have N+1 = {N + 1} nodes")
        if abs(init[0]) > 1e-9 or abs(init[-1] - target.H) > 1e-9:
            raise ValueError("init must satisfy phi(0)=0, phi(R)=H")

    inits = [init if init is not None else default_init(surface, target, N)]
    if opts.multistart > 0:
        rng = np.random.default_rng(opts.seed)
        r = np.linspace(0.0, surface.R, N + 1)
        env = np.sin(math.pi * r / surface.R) ** 2
        for _ in range(opts.multistart):
            amp = 0.2 * target.H * rng.standard_normal()
            inits.append(np.clip(inits[0] + amp * env, 0.0, target.H))

    best = None
    for phi0 in inits:
        sol = _solve_single(surface, target, l, omega, phi0.copy(), opts)
        if best is None or sol.action < best.action:
            best = sol
    return best


def _solve_single(surface, target, l, omega, phi, opts):
    N = opts.N
    levels = [N]
    if opts.continuation:
        levels = sorted({max(32, N // 16), max(64, N // 4), N})
    history = []
    total_iters = 0
    r_full = np.linspace(0.0, surface.R, N + 1)
    cur_r = r_full
    for lev in levels:
        r_lev = np.linspace(0.0, surface.R, lev + 1)
        if lev != len(phi) - 1:
            phi = np.interp(r_lev, cur_r, phi)
        cur_r = r_lev
        disc = _Discretization(surface, target, lev, l, omega)
        lev_hist = []
        phi, act, gnorm, iters, ok = _minimize(disc, phi, opts, lev_hist)
        total_iters += iters
        if lev == N:
            history = lev_hist
    phi[0] = 0.0
    phi[-1] = target.H
    res_norm = _weighted_residual_norm(surface, target, phi, l, omega)
    exps = boundary_exponent_fit_arrays(r_full, phi, target.H, surface.R)
    return StationarySolution(r=r_full, phi=phi, l=l, omega=omega, action=act,
                              grad_norm=gnorm, residual_norm=res_norm,
                              exponents=exps, converged=ok,
                              iterations=total_iters, action_history=history)


def degree_of(target: TargetProfile, phi_left: float, phi_right: float,
              l: int) -> int:
    """Topological degree 2 pi l (G(phi(R)) - G(phi(0))) / vol, in {-l, 0, l}."""
    tol = 1e-6 * target.H
    for v in (phi_left, phi_right):
        if min(abs(v), abs(v - target.H)) > tol:
            raise ValueError(f"endpoint {v} is not a pole value (0 or {target.H})")
    raw = 2.0 * math.pi * l * float(target.G(phi_right)
                                    - target.G(phi_left)) / target.vol
    return int(round(raw))


def gee_omega(surface: SurfaceProfile, target: TargetProfile,
              phi: np.ndarray, zeta: np.ndarray | None, l: int,
              omega: float) -> float:
    """Action of the two-function ansatz; the phase term

        pi int (zeta')^2 g(phi)^2 f dr

    vanishes for constant zeta, where the value reduces to the radial
    action of phi alone."""
    phi = np.asarray(phi, dtype=float)
    base = reduced_action(surface, target, phi, l, omega)
    if zeta is None:
        return base
    zeta = np.asarray(zeta, dtype=float)
    N = len(phi) - 1
    h = surface.R / N
    rm = np.linspace(0.0, surface.R, N + 1)[:-1] + 0.5 * h
    fm = np.asarray(surface.f(rm), dtype=float)
    dz = np.diff(zeta) / h
    pm = 0.5 * (phi[:-1] + phi[1:])
    g = target.g(pm)
    return base + math.pi * h * float(np.sum(dz * dz * g * g * fm))


def boundary_exponent_fit_arrays(r, phi, H, R):
    """Log-log least-squares fit of the pole behavior of a profile.

    Returns (a_left, p_left, a_right, p_right) for phi ~ a_left r^p_left
    near r=0 and H - phi ~ a_right (R-r)^p_right near r=R."""
    n = len(r) - 1

    def fit(x, v):
        mask = (x > 0) & (v > 0)
        x, v = x[mask], v[mask]
        if len(x) < 4 or x.max() / x.min() < 4.0:
            raise ValueError("insufficient dynamic range for the exponent fit")
        p, loga = np.polyfit(np.log(x), np.log(v), 1)
        return math.exp(loga), float(p)

    m = max(8, n // 10)
    a_l, p_l = fit(r[1:m], phi[1:m])
    a_r, p_r = fit(R - r[-m:-1], H - phi[-m:-1])
    return (a_l, p_l, a_r, p_r)


def boundary_exponent_fit(solution: StationarySolution, H: float | None = None
                          ) -> tuple[float, float, float, float]:
    """Exponent fit for a solved profile (H defaults to phi(R))."""
    if H is None:
        H = float(solution.phi[-1])
    return boundary_exponent_fit_arrays(solution.r, solution.phi, H,
                                        float(solution.r[-1]))

"""Geodesics, distances, and comparison geometry on a surface of revolution.

Distances are computed by shooting over the initial direction with root
finding on the terminal radius at the prescribed polar angle; the minimal
connecting geodesic is selected by arclength when several brackets exist.
Comparison quantities come from the flat and constant-curvature laws of
cosines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from . import _kernels
from .profiles import SurfaceProfile

_KIND_CODES = {"round": 0, "bumpy": 1}


class GeodesicError(RuntimeError):
    pass


class PoleCrossingError(GeodesicError):
    """The traced path left (0, R); carries the partial path."""

    def __init__(self, path):
        super().__init__("geodesic reached a pole")
        self.path = path


@dataclass
class GeodesicPath:
    s: np.ndarray
    r: np.ndarray
    theta: np.ndarray
    vr: np.ndarray
    vtheta: np.ndarray

    def clairaut(self, profile: SurfaceProfile) -> np.ndarray:
        """f^2 dtheta/ds along the path; constant on exact geodesics."""
        return profile.f(self.r) ** 2 * self.vtheta

    def speed(self, profile: SurfaceProfile) -> np.ndarray:
        return np.sqrt(self.vr**2 + profile.f(self.r) ** 2 * self.vtheta**2)


@dataclass
class GeodesicTriangle:
    """Pole triangle: vertices at the pole, (r, 0) and (rp, thetap)."""

    r: float
    rp: float
    thetap: float
    d: float
    alpha: float  # angle at (rp, thetap), facing the side of length r
    beta: float   # angle at (r, 0), facing the side of length rp
    psi: float = float("nan")  # launch direction at (r, 0), from the +r axis
    d0: float = float("nan")
    dK: float = float("nan")
    alpha0: float = float("nan")
    alphaK: float = float("nan")
    beta0: float = float("nan")
    betaK: float = float("nan")

    @property
    def y(self) -> float:
        return self.d * self.d


def geodesic_trace(profile: SurfaceProfile, start: tuple[float, float],
                   direction: float, length: float,
                   step: float = 1e-3) -> GeodesicPath:
    """Trace a unit-speed geodesic as a second-order ODE in arclength.

    ``direction`` is the angle from the +r axis.  The Clairaut invariant is
    *not* enforced, so its drift measures integrator quality.
    """
    f = lambda r: float(profile.f(r))
    df = lambda r: float(profile.df(r))
    r0, th0 = start
    n = max(2, int(round(length / step)))
    ds = length / n
    state = np.array([r0, th0, math.cos(direction),
                      math.sin(direction) / f(r0)])
    out = np.empty((n + 1, 4))
    out[0] = state

    def rhs(x):
        r, _, vr, vth = x
        fv, dfv = f(r), df(r)
        return np.array([vr, vth, fv * dfv * vth * vth,
                         -2.0 * dfv / fv * vr * vth])

    margin = 1e-9 * profile.R
    for i in range(n):
        k1 = rhs(state)
        k2 = rhs(state + 0.5 * ds * k1)
        k3 = rhs(state + 0.5 * ds * k2)
        k4 = rhs(state + ds * k3)
        state = state + ds / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not margin < state[0] < profile.R - margin:
            partial = GeodesicPath(np.arange(i + 1) * ds, *out[: i + 1].T.copy())
            raise PoleCrossingError(partial)
        out[i + 1] = state
    return GeodesicPath(np.arange(n + 1) * ds, *out.T.copy())


def _shoot(profile: SurfaceProfile, r0: float, psi: float, theta_end: float,
           nsteps: int) -> tuple[float, float, float]:
    """Endpoint (rho, drho/ds, arclength) of the geodesic from (r0, 0)
    launched at angle psi, followed to polar angle theta_end."""
    code = _KIND_CODES.get(profile.kind)
    if code is not None:
        return _kernels.trace_polar(r0, psi, theta_end, nsteps, code,
                                    profile.epsilon)
    # generic profile: same integrator with Python callables
    c = float(profile.f(r0)) * math.sin(psi)
    rho, p, s = r0, math.cos(psi), 0.0
    dth = theta_end / nsteps

    def rhs(rho, p):
        fv = float(profile.f(rho))
        f2c = fv * fv / c
        return p * f2c, float(profile.df(rho)) * c / fv, f2c

    for _ in range(nsteps):
        k1 = rhs(rho, p)
        k2 = rhs(rho + 0.5 * dth * k1[0], p + 0.5 * dth * k1[1])
        k3 = rhs(rho + 0.5 * dth * k2[0], p + 0.5 * dth * k2[1])
        k4 = rhs(rho + dth * k3[0], p + dth * k3[1])
        rho += dth / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        p += dth / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        s += dth / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
    return rho, p, s


def geodesic_distance(profile: SurfaceProfile, r: float, rp: float,
                      thetap: float, nsteps: int = 256,
                      psi_margin: float = 1e-3) -> GeodesicTriangle:
    """Solve the two-point problem from (r, 0) to (rp, thetap) by shooting.

    Both points must lie in a region where the connecting minimal geodesic
    misses the poles (always true near a pole or on the round sphere for
    non-antipodal points).
    """
    thetap = float(thetap)
    if thetap < 0:
        raise ValueError("thetap must be nonnegative")
    if thetap == 0.0:
        d = abs(r - rp)
        alpha = 0.0 if rp > r else math.pi
        beta = math.pi - alpha
        return GeodesicTriangle(r, rp, 0.0, d, alpha, beta,
                                psi=math.pi if rp < r else 0.0)

    lo, hi = psi_margin, math.pi - psi_margin

    def miss(psi):
        return _shoot(profile, r, psi, thetap, nsteps)[0] - rp

    grid = np.linspace(lo, hi, 33)
    vals = np.array([miss(p) for p in grid])
    best = None
    for i in range(len(grid) - 1):
        if not (np.isfinite(vals[i]) and np.isfinite(vals[i + 1])):
            continue
        if vals[i] == 0.0 or vals[i] * vals[i + 1] < 0:
            psi = brentq(miss, grid[i], grid[i + 1], xtol=1e-13, rtol=1e-15)
            rho, p_end, s = _shoot(profile, r, psi, thetap, nsteps)
            if best is None or s < best[2]:
                best = (psi, p_end, s)
    if best is None:
        raise GeodesicError(
            f"shooting failed for (r={r}, rp={rp}, thetap={thetap}); "
            f"terminal radius mismatch range [{vals.min():.3g}, {vals.max():.3g}]")
    psi, p_end, d = best
    alpha = math.acos(min(1.0, max(-1.0, p_end)))
    beta = math.pi - psi
    return GeodesicTriangle(r, rp, thetap, d, alpha, beta, psi=psi)


def comparison_distances(r: float, rp: float, thetap: float,
                         K: float) -> tuple[float, float]:
    """Model-space distances (d0, dK) for two sides and the included angle."""
    d0 = math.sqrt(max(r * r + rp * rp - 2 * r * rp * math.cos(thetap), 0.0))
    if K <= 0.0:
        raise ValueError("comparison curvature K must be positive")
    sq = math.sqrt(K)
    if max(r, rp) >= math.pi / sq:
        raise ValueError("side exceeds the diameter of the model sphere")
    cosd = (math.cos(sq * r) * math.cos(sq * rp)
            + math.sin(sq * r) * math.sin(sq * rp) * math.cos(thetap))
    dK = math.acos(min(1.0, max(-1.0, cosd))) / sq
    return d0, dK


def comparison_angles(r: float, rp: float, d: float,
                      K: float) -> tuple[float, float, float, float]:
    """Comparison angles (alpha0, alphaK, beta0, betaK) from side lengths.

    alpha faces the side of length r.  A degenerate triangle (one side equal
    to the sum of the others) gives 0 or pi angles.
    """
    if d > r + rp + 1e-14 or d < abs(r - rp) - 1e-14:
        raise ValueError(f"triangle inequality violated: ({r}, {rp}, {d})")

    def flat(opp, a, b):
        return math.acos(min(1.0, max(-1.0, (a * a + b * b - opp * opp)
                                      / (2 * a * b))))

    sq = math.sqrt(K)

    def sph(opp, a, b):
        num = math.cos(sq * opp) - math.cos(sq * a) * math.cos(sq * b)
        den = math.sin(sq * a) * math.sin(sq * b)
        return math.acos(min(1.0, max(-1.0, num / den)))

    alpha0 = flat(r, rp, d)
    beta0 = flat(rp, r, d)
    alphaK = sph(r, rp, d)
    betaK = sph(rp, r, d)
    return alpha0, alphaK, beta0, betaK


def fill_comparisons(profile: SurfaceProfile, tri: GeodesicTriangle,
                     K: float) -> GeodesicTriangle:
    """Populate the model-space fields of a solved triangle, in place."""
    tri.d0, tri.dK = comparison_distances(tri.r, tri.rp, tri.thetap, K)
    tri.alpha0, tri.alphaK, tri.beta0, tri.betaK = comparison_angles(
        tri.r, tri.rp, tri.d, K)
    return tri


SMALL_ANGLE = 0.02


def squared_distance(profile: SurfaceProfile, r: float, rp: float,
                     thetap: float, **kw) -> float:
    """y = d^2; below SMALL_ANGLE the shooter cannot resolve the nearly
    meridian geodesic, so the even quadratic model in thetap (exact value
    and derivative at thetap = 0) bridges the gap."""
    if 0.0 < thetap < SMALL_ANGLE and r != rp:
        y0 = (r - rp) ** 2
        y1 = geodesic_distance(profile, r, rp, SMALL_ANGLE, **kw).d ** 2
        return y0 + (y1 - y0) * (thetap / SMALL_ANGLE) ** 2
    return geodesic_distance(profile, r, rp, thetap, **kw).d ** 2


def eikonal_residual(profile: SurfaceProfile, r: float, rp: float,
                     thetap: float, h: float = 1e-4) -> float:
    """|y_rp^2 + y_thetap^2 / f(rp)^2 - 4y| for y = d^2, by central FD."""
    y = squared_distance(profile, r, rp, thetap)
    y_rp = (squared_distance(profile, r, rp + h, thetap)
            - squared_distance(profile, r, rp - h, thetap)) / (2 * h)
    # y is even in thetap, so reflecting keeps the centered difference valid
    y_tp = (squared_distance(profile, r, rp, thetap + h)
            - squared_distance(profile, r, rp, abs(thetap - h))) / (2 * h)
    f_rp = float(profile.f(rp))
    return abs(y_rp**2 + y_tp**2 / f_rp**2 - 4.0 * y)


def _curvature_antiderivative(profile: SurfaceProfile, rmax: float, n=2000):
    """I(rho) = int_0^rho k f dr as an interpolable pair of arrays."""
    rg = np.linspace(0.0, rmax, n)
    kf = profile.k(rg) * profile.f(rg)
    return rg, np.concatenate([[0.0], cumulative_trapezoid(kf, rg)])


def triangle_curvature_integral(profile: SurfaceProfile,
                                tri: GeodesicTriangle, n: int = 512) -> float:
    """Integral of the Gaussian curvature over the pole triangle.

    The far side is re-traced with the solved launch direction to obtain
    rho(phi), then int_0^thetap int_0^rho(phi) k f dr dphi is accumulated.
    """
    if tri.thetap == 0.0:
        return 0.0
    c = float(profile.f(tri.r)) * math.sin(tri.psi)
    rho, p = tri.r, math.cos(tri.psi)
    dth = tri.thetap / n
    rhos = np.empty(n + 1)
    rhos[0] = rho

    def rhs(rho, p):
        fv = float(profile.f(rho))
        f2c = fv * fv / c
        return p * f2c, float(profile.df(rho)) * c / fv

    for i in range(n):
        k1 = rhs(rho, p)
        k2 = rhs(rho + 0.5 * dth * k1[0], p + 0.5 * dth * k1[1])
        k3 = rhs(rho + 0.5 * dth * k2[0], p + 0.5 * dth * k2[1])
        k4 = rhs(rho + dth * k3[0], p + dth * k3[1])
        rho += dth / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        p += dth / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        rhos[i + 1] = rho
    rg, I = _curvature_antiderivative(profile, float(rhos.max()) * 1.001)
    inner = np.interp(rhos, rg, I)
    phis = np.linspace(0.0, tri.thetap, n + 1)
    return float(np.trapezoid(inner, phis))


def gauss_bonnet_residual(profile: SurfaceProfile,
                          tri: GeodesicTriangle) -> float:
    """|alpha + beta + thetap - pi - integral of k over the triangle|."""
    return abs(tri.alpha + tri.beta + tri.thetap - math.pi
               - triangle_curvature_integral(profile, tri))


def angle_identities_check(profile: SurfaceProfile, tri: GeodesicTriangle,
                           K: float | None = None, h: float = 1e-4,
                           n_ratio: int = 9) -> dict:
    """Evaluate the distance/angle identities on one solved triangle.

    Two-sided equivalences are reported as (min, max) of normalized ratios
    over a theta sample; the derivative bracket uses K (default: 1.05 times
    the peak curvature between the poles' margins).
    """
    r, rp, thetap, d = tri.r, tri.rp, tri.thetap, tri.d
    if K is None:
        rg = np.linspace(0.0, profile.R, 512)
        K = 1.05 * float(np.max(profile.k(rg)))

    scale = math.sin(thetap) / d
    ratios = (math.sin(tri.alpha) / r / scale,
              math.sin(tri.beta) / rp / scale)

    y_rp = (squared_distance(profile, r, rp + h, thetap)
            - squared_distance(profile, r, rp - h, thetap)) / (2 * h)
    dy_res = abs(y_rp - 2.0 * d * math.cos(tri.alpha)) / max(2.0 * d, 1e-30)

    gb_res = gauss_bonnet_residual(profile, tri)

    # bounded ratio m(theta) r rp with mu = thetap (Lemma-5 style bracket)
    mu, y_mu = thetap, d * d
    ms = []
    for th in np.linspace(0.05 * mu, 0.95 * mu, n_ratio):
        y_th = squared_distance(profile, r, rp, float(th))
        ms.append((math.cos(th) - math.cos(mu)) / (y_mu - y_th) * r * rp)
    ratio_m = (float(min(ms)), float(max(ms)))

    # alpha_r bracket: sin(beta)/d <= d(alpha)/dr <= sqrt(K) sin(beta)/sin(sqrt(K) d)
    a_plus = geodesic_distance(profile, r + h, rp, thetap).alpha
    a_minus = geodesic_distance(profile, r - h, rp, thetap).alpha
    alpha_r = (a_plus - a_minus) / (2 * h)
    sq = math.sqrt(K)
    lower = math.sin(tri.beta) / d
    upper = sq * math.sin(tri.beta) / math.sin(sq * d)
    fd_tol = 10.0 * h
    bracket = {"lower": lower, "value": alpha_r, "upper": upper,
               "ok": lower - fd_tol <= alpha_r <= upper + fd_tol}

    law_of_sines = abs(float(profile.f(r)) * math.sin(tri.beta)
                       - float(profile.f(rp)) * math.sin(tri.alpha))

    return {
        "law_of_sines_ratios": ratios,
        "sine_transfer_residual": law_of_sines,
        "dy_drp_residual": dy_res,
        "gauss_bonnet_residual": gb_res,
        "ratio_m": ratio_m,
        "angle_derivative_brackets": bracket,
    }


def lightcone_kernel_integral(profile: SurfaceProfile, r: float, rp: float,
                              s: float, n_theta: int = 24,
                              n_quad: int = 128) -> float:
    """int over {theta : d^2 <= s^2} of f(rp) / sqrt(s^2 - d^2) dtheta.

    The square-root endpoint singularity at y(mu) = s^2 is resolved by the
    substitution theta = mu (1 - w^2).
    """
    s2 = s * s
    a = (r - rp) ** 2
    if s2 <= a:
        return 0.0
    f_rp = float(profile.f(rp))

    ydist = lambda th: squared_distance(profile, r, rp, th)
    # y(theta) grows quadratically from a; the shooter cannot resolve
    # near-meridian angles, so tiny regions use the quadratic model directly
    th_lo = 0.02
    y_lo = ydist(th_lo)
    if y_lo >= s2:
        curv = (y_lo - a) / (th_lo * th_lo)
        return math.pi * f_rp / math.sqrt(curv)
    if ydist(math.pi) <= s2:
        mu = math.pi
        singular = False
    else:
        mu = brentq(lambda th: ydist(th) - s2, th_lo, math.pi, xtol=1e-12)
        singular = True

    # y'(0) = 0 by reflection symmetry; interior nodes stay above th_lo
    # where the shooter is reliable
    thetas = np.concatenate([[0.0], np.linspace(th_lo, mu, n_theta)])
    ys = np.array([a] + [ydist(float(t)) for t in thetas[1:]])
    yspl = CubicSpline(thetas, ys, bc_type=((1, 0.0), "not-a-knot"))

    if not singular:
        integrand = f_rp / np.sqrt(np.maximum(s2 - ys, 1e-300))
        return 2.0 * float(np.trapezoid(integrand, thetas))

    dy_mu = float(yspl(mu, 1))
    w = np.linspace(0.0, 1.0, n_quad + 1)
    th = mu * (1.0 - w * w)
    vals = np.empty_like(w)
    gap = s2 - yspl(th[1:])
    vals[1:] = 2.0 * mu * w[1:] / np.sqrt(np.maximum(gap, 1e-300))
    vals[0] = 2.0 * mu / math.sqrt(max(dy_mu * mu, 1e-300))
    # composite Simpson on the regularized integrand
    hgt = 1.0 / n_quad
    simpson = hgt / 3.0 * (vals[0] + vals[-1] + 4.0 * vals[1:-1:2].sum()
                           + 2.0 * vals[2:-1:2].sum())
    return 2.0 * f_rp * float(simpson)

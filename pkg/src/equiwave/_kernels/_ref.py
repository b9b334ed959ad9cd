"""Reference (NumPy / pure-Python) implementations of the hot kernels.

Semantics match the compiled extension in ``_core.pyx``; the package
selects whichever is available at import time.  Keep the two in sync.
"""

from __future__ import annotations

import math

import numpy as np

IMPL = "python"


def _spatial(u, fc, dfc, h, l, sg):
    """Second-order stencil for u_rr + (f'/f) u_r + (l^2/f^2) A^2 u.

    Ghost cells mirror across the poles with component parity
    (+/-1)^l on the rotating components and even on the axis component.
    """
    n = u.shape[0]
    up = np.empty((n + 2, 3))
    up[1:-1] = u
    up[0, 0] = sg * u[0, 0]
    up[0, 1] = sg * u[0, 1]
    up[0, 2] = u[0, 2]
    up[-1, 0] = sg * u[-1, 0]
    up[-1, 1] = sg * u[-1, 1]
    up[-1, 2] = u[-1, 2]
    lap = (up[2:] - 2.0 * u + up[:-2]) / (h * h)
    dr = (up[2:] - up[:-2]) / (2.0 * h)
    out = lap + (dfc / fc)[:, None] * dr
    cent = (l * l) / (fc * fc)
    out[:, 0] -= cent * u[:, 0]
    out[:, 1] -= cent * u[:, 1]
    return out


def _accel(u, v, fc, dfc, h, l, sg):
    L = _spatial(u, fc, dfc, h, l, sg)
    lam = -np.einsum("ij,ij->i", u, L) - np.einsum("ij,ij->i", v, v)
    return L + lam[:, None] * u


def step_raw(u, v, fc, dfc, h, dt, l):
    """One time-reversible kick-drift-kick update, no projection.

    The Lagrange multiplier makes u . u_tt = -|u_t|^2 hold exactly; the
    final kick is implicit in |v_new|^2 and solved in closed form, which
    is what makes step_raw(dt) followed by step_raw(-dt) exact.
    """
    sg = -1.0 if l % 2 else 1.0
    c = 0.5 * dt
    vh = v + c * _accel(u, v, fc, dfc, h, l, sg)
    un = u + dt * vh
    Ln = _spatial(un, fc, dfc, h, l, sg)
    uLn = np.einsum("ij,ij->i", un, Ln)
    b = vh + c * (Ln - uLn[:, None] * un)
    A = c * c * np.einsum("ij,ij->i", un, un)
    B = 1.0 + 2.0 * c * np.einsum("ij,ij->i", b, un)
    C = np.einsum("ij,ij->i", b, b)
    disc = np.maximum(B * B - 4.0 * A * C, 0.0)
    s = 2.0 * C / (B + np.sqrt(disc))
    vn = b - (c * s)[:, None] * un
    return un, vn


def project(u, v):
    """Renormalize u and remove the normal velocity component, in place."""
    nrm = np.sqrt(np.einsum("ij,ij->i", u, u))
    u /= nrm[:, None]
    v -= np.einsum("ij,ij->i", u, v)[:, None] * u


def leapfrog_steps(u, v, fc, dfc, h, dt, l, nsteps):
    """Advance (u, v) by nsteps constrained leapfrog steps, in place."""
    for _ in range(nsteps):
        un, vn = step_raw(u, v, fc, dfc, h, dt, l)
        u[:] = un
        v[:] = vn
        project(u, v)


def _fdf(rho, kind, eps):
    if kind == 0:
        return math.sin(rho), math.cos(rho)
    s = math.sin(rho)
    c = math.cos(rho)
    return s * (1.0 + eps * s * s), c * (1.0 + 3.0 * eps * s * s)


def trace_polar(r0, psi, theta_end, nsteps, kind, eps):
    """Integrate the geodesic from (r0, 0) with launch angle psi, using the
    polar angle as the independent variable.

    Valid while the Clairaut constant c = f(r0) sin(psi) is nonzero, i.e.
    away from meridians.  Returns (rho, d rho/ds, arclength) at theta_end.
    """
    f0, _ = _fdf(r0, kind, eps)
    c = f0 * math.sin(psi)
    rho = r0
    p = math.cos(psi)
    s = 0.0
    dth = theta_end / nsteps
    for _ in range(nsteps):
        k1 = _polar_rhs(rho, p, c, kind, eps)
        k2 = _polar_rhs(rho + 0.5 * dth * k1[0], p + 0.5 * dth * k1[1], c, kind, eps)
        k3 = _polar_rhs(rho + 0.5 * dth * k2[0], p + 0.5 * dth * k2[1], c, kind, eps)
        k4 = _polar_rhs(rho + dth * k3[0], p + dth * k3[1], c, kind, eps)
        rho += dth / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        p += dth / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        s += dth / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
    return rho, p, s


def _polar_rhs(rho, p, c, kind, eps):
    f, df = _fdf(rho, kind, eps)
    f2c = f * f / c
    return (p * f2c, df * c / f, f2c)

# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: constrained leapfrog stepping and geodesic
shooting on built-in profiles.  Mirrors ``_ref.py``."""

from libc.math cimport sin, cos, sqrt

import numpy as np
cimport numpy as cnp

cnp.import_array()

IMPL = "cython"


cdef inline void _spatial_c(double[:, ::1] u, double[::1] fc, double[::1] dfc,
                            double h, int l, double sg,
                            double[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t i
    cdef int k
    cdef double ih2 = 1.0 / (h * h)
    cdef double i2h = 1.0 / (2.0 * h)
    cdef double um, upv, coef, cent
    for i in range(n):
        coef = dfc[i] / fc[i]
        cent = (l * l) / (fc[i] * fc[i])
        for k in range(3):
            if i == 0:
                um = sg * u[0, k] if k < 2 else u[0, k]
            else:
                um = u[i - 1, k]
            if i == n - 1:
                upv = sg * u[n - 1, k] if k < 2 else u[n - 1, k]
            else:
                upv = u[i + 1, k]
            out[i, k] = (upv - 2.0 * u[i, k] + um) * ih2 + coef * (upv - um) * i2h
            if k < 2:
                out[i, k] -= cent * u[i, k]


cdef void _step_raw_c(double[:, ::1] u, double[:, ::1] v,
                      double[::1] fc, double[::1] dfc,
                      double h, double dt, int l,
                      double[:, ::1] L, double[:, ::1] vh,
                      double[:, ::1] un) noexcept nogil:
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t i
    cdef int k
    cdef double sg = -1.0 if l % 2 else 1.0
    cdef double c = 0.5 * dt
    cdef double lam, uL, vv, uu, bn, bb, A, B, C, disc, s

    _spatial_c(u, fc, dfc, h, l, sg, L)
    for i in range(n):
        uL = 0.0
        vv = 0.0
        for k in range(3):
            uL += u[i, k] * L[i, k]
            vv += v[i, k] * v[i, k]
        lam = -uL - vv
        for k in range(3):
            vh[i, k] = v[i, k] + c * (L[i, k] + lam * u[i, k])
            un[i, k] = u[i, k] + dt * vh[i, k]
    _spatial_c(un, fc, dfc, h, l, sg, L)
    for i in range(n):
        uL = 0.0
        for k in range(3):
            uL += un[i, k] * L[i, k]
        uu = 0.0
        bn = 0.0
        bb = 0.0
        for k in range(3):
            # reuse vh as the intermediate b vector
            vh[i, k] = vh[i, k] + c * (L[i, k] - uL * un[i, k])
            uu += un[i, k] * un[i, k]
            bn += vh[i, k] * un[i, k]
            bb += vh[i, k] * vh[i, k]
        A = c * c * uu
        B = 1.0 + 2.0 * c * bn
        C = bb
        disc = B * B - 4.0 * A * C
        if disc < 0.0:
            disc = 0.0
        s = 2.0 * C / (B + sqrt(disc))
        for k in range(3):
            v[i, k] = vh[i, k] - c * s * un[i, k]
            u[i, k] = un[i, k]


def leapfrog_steps(double[:, ::1] u, double[:, ::1] v,
                   double[::1] fc, double[::1] dfc,
                   double h, double dt, int l, int nsteps):
    """Advance (u, v) by nsteps constrained leapfrog steps, in place."""
    cdef Py_ssize_t n = u.shape[0]
    cdef cnp.ndarray[double, ndim=2] L = np.empty((n, 3))
    cdef cnp.ndarray[double, ndim=2] vh = np.empty((n, 3))
    cdef cnp.ndarray[double, ndim=2] un = np.empty((n, 3))
    cdef double[:, ::1] Lv = L, vhv = vh, unv = un
    cdef Py_ssize_t i
    cdef int k, step
    cdef double nrm, uv
    with nogil:
        for step in range(nsteps):
            _step_raw_c(u, v, fc, dfc, h, dt, l, Lv, vhv, unv)
            for i in range(n):
                nrm = sqrt(u[i, 0] ** 2 + u[i, 1] ** 2 + u[i, 2] ** 2)
                uv = 0.0
                for k in range(3):
                    u[i, k] /= nrm
                for k in range(3):
                    uv += u[i, k] * v[i, k]
                for k in range(3):
                    v[i, k] -= uv * u[i, k]


cdef inline void _fdf_c(double rho, int kind, double eps,
                        double* f, double* df) noexcept nogil:
    cdef double s = sin(rho)
    cdef double c = cos(rho)
    if kind == 0:
        f[0] = s
        df[0] = c
    else:
        f[0] = s * (1.0 + eps * s * s)
        df[0] = c * (1.0 + 3.0 * eps * s * s)


def trace_polar(double r0, double psi, double theta_end, int nsteps,
                int kind, double eps):
    """Geodesic shot from (r0, 0) at angle psi, integrated in theta.

    Returns (rho, d rho/ds, arclength) at theta_end.
    """
    cdef double f, df, c, rho, p, s, dth, f2c
    cdef double k1r, k1p, k1s, k2r, k2p, k2s, k3r, k3p, k3s, k4r, k4p, k4s
    cdef int i
    _fdf_c(r0, kind, eps, &f, &df)
    c = f * sin(psi)
    rho = r0
    p = cos(psi)
    s = 0.0
    dth = theta_end / nsteps
    with nogil:
        for i in range(nsteps):
            _fdf_c(rho, kind, eps, &f, &df)
            f2c = f * f / c
            k1r = p * f2c; k1p = df * c / f; k1s = f2c
            _fdf_c(rho + 0.5 * dth * k1r, kind, eps, &f, &df)
            f2c = f * f / c
            k2r = (p + 0.5 * dth * k1p) * f2c; k2p = df * c / f; k2s = f2c
            _fdf_c(rho + 0.5 * dth * k2r, kind, eps, &f, &df)
            f2c = f * f / c
            k3r = (p + 0.5 * dth * k2p) * f2c; k3p = df * c / f; k3s = f2c
            _fdf_c(rho + dth * k3r, kind, eps, &f, &df)
            f2c = f * f / c
            k4r = (p + dth * k3p) * f2c; k4p = df * c / f; k4s = f2c
            rho += dth / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r)
            p += dth / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
            s += dth / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s)
    return rho, p, s

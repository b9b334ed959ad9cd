"""Conserved and monitored quantities for equivariant wave map runs.

All sphere integrals carry the 2 pi angular factor explicitly, so the
energy split E = G_omega + omega Q + D holds verbatim as a pointwise
algebraic identity under the shared midpoint quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .evolution import (FieldState, perturb_state, radial_derivative,
                        rotation_apply, run, state_from_stationary)
from .profiles import SurfaceProfile
from .stationary import StationarySolution


@dataclass
class DiagnosticsRecord:
    t: float
    E: float
    Q: float
    D: float
    G: float
    identity_residual: float
    X: float
    flux: float
    dist: float

    CSV_HEADER = "t,E,Q,D,G,identity_residual,X,flux,dist"

    def csv_row(self) -> str:
        return (f"{self.t:.17g},{self.E:.17g},{self.Q:.17g},{self.D:.17g},"
                f"{self.G:.17g},{self.identity_residual:.17g},"
                f"{self.X:.17g},{self.flux:.17g},{self.dist:.17g}")


def _densities(state: FieldState):
    """(e, m, f) on cells: energy density, momentum density, metric factor."""
    f = state.fc()
    ur = radial_derivative(state, state.u)
    au = rotation_apply(state.u)
    e = 0.5 * (np.einsum("ij,ij->i", state.v, state.v)
               + np.einsum("ij,ij->i", ur, ur)
               + state.l**2 / (f * f) * np.einsum("ij,ij->i", au, au))
    m = np.einsum("ij,ij->i", state.v, ur)
    return e, m, f


def energy(state: FieldState) -> tuple[float, np.ndarray]:
    """Total energy 2 pi int e f dr and the density e(r)."""
    e, _, f = _densities(state)
    return 2.0 * math.pi * state.h * float(np.sum(e * f)), e


def charge(state: FieldState) -> float:
    """Rotational charge 2 pi int (Au . u_t) f dr."""
    au = rotation_apply(state.u)
    f = state.fc()
    return 2.0 * math.pi * state.h * float(
        np.sum(np.einsum("ij,ij->i", au, state.v) * f))


def gee_omega_slice(state: FieldState, omega: float) -> float:
    """Spatial-slice action density integral

        2 pi int [ |u_r|^2 + l^2 |Au|^2 / f^2 - omega^2 |Au|^2 ] f dr / 2."""
    f = state.fc()
    ur = radial_derivative(state, state.u)
    au2 = np.einsum("ij,ij->i", rotation_apply(state.u),
                    rotation_apply(state.u))
    dens = 0.5 * (np.einsum("ij,ij->i", ur, ur)
                  + (state.l**2 / (f * f) - omega * omega) * au2)
    return 2.0 * math.pi * state.h * float(np.sum(dens * f))


def dee(state: FieldState, omega: float) -> float:
    """D = (1/2) 2 pi int |u_t - omega A u|^2 f dr, zero on rotating data."""
    w = state.v - omega * rotation_apply(state.u)
    f = state.fc()
    return math.pi * state.h * float(
        np.sum(np.einsum("ij,ij->i", w, w) * f))


def energy_identity_residual(state: FieldState, omega: float) -> float:
    """|E - (G_omega + omega Q + D)| under one shared quadrature."""
    E, _ = energy(state)
    return abs(E - (gee_omega_slice(state, omega) + omega * charge(state)
                    + dee(state, omega)))


def local_energy(state: FieldState, r_max: float) -> float:
    """Energy of the disc r <= r_max (cells with center inside)."""
    if r_max <= 0.0:
        return 0.0
    e, _, f = _densities(state)
    mask = state.r <= r_max
    return 2.0 * math.pi * state.h * float(np.sum(e[mask] * f[mask]))


def cone_monotonicity_check(snapshots: list[FieldState], T1: float, T2: float,
                            r_max: float, tol: float = 0.0
                            ) -> tuple[bool, float]:
    """Backward-cone energy comparison E_r(T1) >= E_{r + T1 - T2}(T2).

    Returns (holds, violation); a shrunken disc of nonpositive radius is
    vacuously fine.  T1 <= T2 required."""
    if T1 > T2:
        raise ValueError("need T1 <= T2")
    s1 = _snapshot_at(snapshots, T1)
    s2 = _snapshot_at(snapshots, T2)
    inner = r_max + T1 - T2
    if inner <= 0.0:
        return True, 0.0
    e1 = local_energy(s1, r_max)
    e2 = local_energy(s2, inner)
    violation = max(0.0, e2 - e1 - tol)
    return violation == 0.0, violation


def _snapshot_at(snapshots, t):
    best = min(snapshots, key=lambda s: abs(s.t - t))
    if abs(best.t - t) > 1e-9 + 0.51 * _cadence(snapshots):
        raise ValueError(f"no snapshot near t={t}")
    return best


def _cadence(snapshots):
    if len(snapshots) < 2:
        return 0.0
    return max(abs(b.t - a.t) for a, b in zip(snapshots, snapshots[1:]))


def characteristic_densities(state: FieldState, delta: float = 0.1
                             ) -> tuple[np.ndarray, np.ndarray, float]:
    """Outgoing/ingoing weighted derivative densities and their sup control.

    A^2 = f (e + m), B^2 = f (e - m) cellwise; the scalar is
    sup f^(1/2 - delta) A over the slice."""
    if not 0.0 < delta < 0.5:
        raise ValueError("delta must lie in (0, 1/2)")
    e, m, f = _densities(state)
    A = np.sqrt(np.maximum(f * (e + m), 0.0))
    B = np.sqrt(np.maximum(f * (e - m), 0.0))
    X = float(np.max(f ** (0.5 - delta) * A))
    return A, B, X


def flux_on_cone(snapshots: list[FieldState], t_bar: float,
                 up_to: float | None = None) -> float:
    """Flux 2 pi int (e - m) f dt through the backward cone r = t_bar - t.

    Integration runs over recorded times below ``up_to`` (default t_bar);
    snapshots outside the cone's time span contribute nothing."""
    if up_to is None:
        up_to = t_bar
    ts, vals = [], []
    for s in snapshots:
        if s.t > up_to + 1e-12 or t_bar - s.t > s.surface.R:
            continue
        rc = t_bar - s.t
        if rc < 0.0:
            continue
        e, m, f = _densities(s)
        ts.append(s.t)
        vals.append(float(np.interp(rc, s.r, (e - m) * f)))
    if len(ts) < 2:
        return 0.0
    return 2.0 * math.pi * float(np.trapezoid(vals, ts))


def nonlinearity_ratio(state: FieldState) -> float | None:
    """sup over admissible cells of | |grad u|^2 - |u_t|^2 | f / (A B).

    Cells where A B vanishes (to rounding) are skipped; None when no cell
    is admissible."""
    f = state.fc()
    ur = radial_derivative(state, state.u)
    au = rotation_apply(state.u)
    grad2 = (np.einsum("ij,ij->i", ur, ur)
             + state.l**2 / (f * f) * np.einsum("ij,ij->i", au, au))
    qnl = np.abs(grad2 - np.einsum("ij,ij->i", state.v, state.v))
    A, B, _ = characteristic_densities(state)
    ab = A * B
    mask = ab > 1e-12 * max(float(np.max(ab)), 1e-300)
    if not np.any(mask):
        return None
    return float(np.max(qnl[mask] * f[mask] / ab[mask]))


def _paired_inner(a, b, weight):
    """Decompose sum_i w_i a_i . e^{A tau} b_i into (cos, sin, const) parts."""
    cosp = float(np.sum(weight * (a[:, 0] * b[:, 0] + a[:, 1] * b[:, 1])))
    sinp = float(np.sum(weight * (a[:, 1] * b[:, 0] - a[:, 0] * b[:, 1])))
    const = float(np.sum(weight * a[:, 2] * b[:, 2]))
    return cosp, sinp, const


def distance_to_orbit(state: FieldState, solution: StationarySolution,
                      omega: float) -> tuple[float, float]:
    """Energy-norm distance to the rotation orbit of a stationary state.

    The squared distance to e^{A tau} (u0, omega A u0) is a trigonometric
    polynomial C - 2 (P cos tau + S sin tau); the minimum is closed form.
    The field part uses the norm 2 pi int (|w|^2 + |w_r|^2
    + l^2 |Aw|^2 / f^2) f dr, the velocity part the weighted L2 norm."""
    ref = state_from_stationary(solution, omega, state.surface, N=state.N)
    f = state.fc()
    wgt = 2.0 * math.pi * state.h * f
    l2f2 = state.l**2 / (f * f)

    pairs = []  # (a-field, b-field, weight) bilinear pieces of <state, ref>
    pairs.append((state.u, ref.u, wgt))
    pairs.append((radial_derivative(state, state.u),
                  radial_derivative(ref, ref.u), wgt))
    pairs.append((rotation_apply(state.u), rotation_apply(ref.u), wgt * l2f2))
    pairs.append((state.v, ref.v, wgt))

    P = S = cross_const = 0.0
    C = 0.0
    for a, b, w in pairs:
        cp, sp, cc = _paired_inner(a, b, w)
        P += cp
        S += sp
        cross_const += cc
        # rotation preserves each norm piece, so |e^{A tau} b|^2 = |b|^2
        C += float(np.sum(w * np.einsum("ij,ij->i", a, a)))
        C += float(np.sum(w * np.einsum("ij,ij->i", b, b)))
    C -= 2.0 * cross_const

    tau_star = math.atan2(S, P)
    d2 = max(C - 2.0 * math.hypot(P, S), 0.0)
    return math.sqrt(d2), tau_star


def record_state(state: FieldState, solution: StationarySolution,
                 omega: float, snapshots=None, t_bar: float | None = None,
                 delta_hoelder: float = 0.1) -> DiagnosticsRecord:
    """Assemble the full diagnostics record for one snapshot."""
    E, _ = energy(state)
    Q = charge(state)
    D = dee(state, omega)
    G = gee_omega_slice(state, omega)
    _, _, X = characteristic_densities(state, delta_hoelder)
    flux = 0.0
    if snapshots is not None and t_bar is not None:
        flux = flux_on_cone(snapshots, t_bar, up_to=state.t)
    dist, _ = distance_to_orbit(state, solution, omega)
    return DiagnosticsRecord(t=state.t, E=E, Q=Q, D=D, G=G,
                             identity_residual=abs(E - (G + omega * Q + D)),
                             X=X, flux=flux, dist=dist)


@dataclass
class StabilityResult:
    series: list[DiagnosticsRecord]
    verdict: str                 # "stable" | "unstable"
    sup_dist: float
    energy_drift: float
    charge_drift: float
    epsilon: float
    snapshots: list[FieldState]


def stability_experiment(solution: StationarySolution, omega: float,
                         delta: float, T: float, surface: SurfaceProfile,
                         epsilon: float = 1e-2, N: int | None = None,
                         cfl: float = 0.4, record_every: float | None = None,
                         shape: str = "bump", seed: int = 0,
                         delta_hoelder: float = 0.1) -> StabilityResult:
    """Perturb a rotating solution, evolve, and track the orbit distance.

    The verdict is "stable" when sup_t dist(t) stays below epsilon."""
    base = state_from_stationary(solution, omega, surface, N=N)
    state0 = perturb_state(base, delta, shape=shape, seed=seed)
    final, snapshots = run(state0, T, cfl=cfl, record_every=record_every)
    series = [record_state(s, solution, omega, snapshots=snapshots,
                           t_bar=final.t, delta_hoelder=delta_hoelder)
              for s in snapshots]
    sup_dist = max(rec.dist for rec in series)
    e0, e_ref = series[0].E, max(abs(series[0].E), 1e-300)
    q_ref = max(abs(series[0].Q), 1e-300)
    energy_drift = max(abs(rec.E - e0) for rec in series) / e_ref
    charge_drift = max(abs(rec.Q - series[0].Q) for rec in series) / q_ref
    verdict = "stable" if sup_dist <= epsilon else "unstable"
    return StabilityResult(series=series, verdict=verdict, sup_dist=sup_dist,
                           energy_drift=energy_drift,
                           charge_drift=charge_drift, epsilon=epsilon,
                           snapshots=snapshots)

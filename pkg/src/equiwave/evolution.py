"""Equivariant Cauchy evolution of sphere-valued fields.

The l-equivariant ansatz reduces the wave map system to a radial field
u(r, t) of unit 3-vectors obeying

    u_tt = u_rr + (f'/f) u_r + (l^2/f^2) A^2 u + lambda u,

with A the rotation generator about the third axis and lambda the
multiplier keeping |u| = 1.  Time stepping is a kick-drift-kick leapfrog
with a discrete multiplier that enforces u . u_tt = -|u_t|^2 exactly,
followed by projection back to the constraint set.  The grid is cell
centered so the singular l^2/f^2 factor is never evaluated at a pole.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .profiles import SurfaceProfile
from .stationary import StationarySolution


class EvolutionError(RuntimeError):
    """Aborted run; carries the last good state."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


def rotation_apply(u: np.ndarray) -> np.ndarray:
    """A u for the generator A of rotations about the third axis."""
    out = np.empty_like(u)
    out[:, 0] = -u[:, 1]
    out[:, 1] = u[:, 0]
    out[:, 2] = 0.0
    return out


@dataclass
class FieldState:
    r: np.ndarray            # cell centers r_{i+1/2}, N cells on [0, R]
    u: np.ndarray            # (N, 3) unit vectors
    v: np.ndarray            # (N, 3) tangent velocities
    t: float
    l: int
    surface: SurfaceProfile

    @property
    def N(self) -> int:
        return len(self.r)

    @property
    def h(self) -> float:
        return self.surface.R / self.N

    def fc(self) -> np.ndarray:
        return np.asarray(self.surface.f(self.r), dtype=float)

    def dfc(self) -> np.ndarray:
        return np.asarray(self.surface.df(self.r), dtype=float)

    def copy(self) -> "FieldState":
        return replace(self, u=self.u.copy(), v=self.v.copy())

    def constraint_violation(self) -> tuple[float, float]:
        """(sup | |u|-1 |, sup |u.v|)."""
        norm_err = float(np.max(np.abs(
            np.sqrt(np.einsum("ij,ij->i", self.u, self.u)) - 1.0)))
        tang_err = float(np.max(np.abs(np.einsum("ij,ij->i", self.u, self.v))))
        return norm_err, tang_err


def radial_derivative(state: FieldState, w: np.ndarray) -> np.ndarray:
    """Central difference of a (N, 3) field with pole-parity ghost cells."""
    sg = -1.0 if state.l % 2 else 1.0
    n, h = state.N, state.h
    wp = np.empty((n + 2, 3))
    wp[1:-1] = w
    wp[0, :2] = sg * w[0, :2]
    wp[0, 2] = w[0, 2]
    wp[-1, :2] = sg * w[-1, :2]
    wp[-1, 2] = w[-1, 2]
    return (wp[2:] - wp[:-2]) / (2.0 * h)


def state_from_stationary(solution: StationarySolution, omega: float,
                          surface: SurfaceProfile,
                          N: int | None = None) -> FieldState:
    """Initial data (u, omega A u) from a solved rotating profile.

    The node-grid profile is interpolated to cell centers; the embedding
    is u = (sin phi, 0, cos phi) for the round target."""
    if not solution.converged:
        raise ValueError("refusing to build initial data from an "
                         "unconverged profile")
    if N is None:
        N = len(solution.r) - 1
    h = surface.R / N
    rc = (np.arange(N) + 0.5) * h
    phi = np.interp(rc, solution.r, solution.phi)
    u = np.stack([np.sin(phi), np.zeros(N), np.cos(phi)], axis=1)
    v = omega * rotation_apply(u)
    return FieldState(r=rc, u=u, v=v, t=0.0, l=solution.l, surface=surface)


def perturb_state(state: FieldState, delta: float, shape: str = "bump",
                  seed: int = 0) -> FieldState:
    """Add a smooth disturbance of energy-norm size delta and re-project.

    ``bump`` perturbs along the polar tangent direction with a sin^2
    envelope; ``random`` uses a seeded low-frequency tangent field.  The
    velocity receives the same-shaped tangential kick.  The disturbance is
    normalized so its H1 x L2 size equals delta before projection, which
    makes the post-projection distance to the original state proportional
    to delta with slope 1 at leading order.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    new = state.copy()
    if delta == 0.0:
        return new
    R = state.surface.R
    env = np.sin(math.pi * state.r / R) ** 2
    u = new.u
    if shape == "bump":
        # polar tangent: projection of e_z onto the tangent plane
        p = -u * u[:, 2:3]
        p[:, 2] += 1.0
    elif shape == "random":
        rng = np.random.default_rng(seed)
        coef = rng.standard_normal((3, 3))
        modes = np.stack([np.sin((k + 1) * math.pi * state.r / R)
                          for k in range(3)], axis=1)
        raw = modes @ coef
        p = raw - u * np.einsum("ij,ij->i", u, raw)[:, None]
    else:
        raise ValueError(f"unknown perturbation shape {shape!r}")
    nrm = np.sqrt(np.einsum("ij,ij->i", p, p))
    ok = nrm > 1e-12
    p[ok] /= nrm[ok, None]
    p[~ok] = 0.0

    w = env[:, None] * p
    size = field_norm(state, w, w)
    if size <= 0.0:
        raise ValueError("degenerate perturbation shape")
    w *= delta / size

    amp = float(np.max(np.sqrt(np.einsum("ij,ij->i", w, w))))
    if amp > 1.0:
        raise ValueError(
            f"perturbation too large: pointwise amplitude {amp:.3g} > 1")
    new.u = u + w
    new.v = new.v + w
    _kernels.project(new.u, new.v)
    return new


def field_norm(state: FieldState, wu: np.ndarray, wv: np.ndarray) -> float:
    """H1 x L2 size of a field/velocity pair on the grid of ``state``:

        ( 2 pi int [ |wu|^2 + |wu_r|^2 + l^2 |A wu|^2 / f^2 + |wv|^2 ] f dr )^(1/2)."""
    f = np.asarray(state.surface.f(state.r), dtype=float)
    dr = radial_derivative(state, wu)
    aw = rotation_apply(wu)
    dens = (np.einsum("ij,ij->i", wu, wu)
            + np.einsum("ij,ij->i", dr, dr)
            + state.l**2 / (f * f) * np.einsum("ij,ij->i", aw, aw)
            + np.einsum("ij,ij->i", wv, wv))
    return math.sqrt(2.0 * math.pi * state.h * float(np.sum(dens * f)))


def cfl_limit(state: FieldState) -> float:
    """Largest admissible dt: h / (1 + l) covers both the unit wave speed
    and the first-cell centrifugal frequency."""
    return state.h / (1.0 + state.l)


def step_raw(state: FieldState, dt: float) -> FieldState:
    """One reversible leapfrog update without projection."""
    u, v = _kernels.step_raw(state.u, state.v, state.fc(), state.dfc(),
                             state.h, dt, state.l)
    return replace(state, u=u, v=v, t=state.t + dt)


def step(state: FieldState, dt: float) -> FieldState:
    """One projected leapfrog step; refuses dt beyond the CFL bound."""
    if abs(dt) > cfl_limit(state) * (1.0 + 1e-12):
        raise EvolutionError(
            f"dt={dt} exceeds the CFL bound {cfl_limit(state):.3e}", state)
    new = step_raw(state, dt)
    _kernels.project(new.u, new.v)
    return new


def run(state: FieldState, T: float, cfl: float = 0.4,
        record_every: float | None = None) -> tuple[FieldState, list[FieldState]]:
    """Evolve to t + T, recording snapshots at the requested cadence.

    Stepping is chunked through the compiled kernel between records; a
    non-finite field or a constraint blow-up aborts with the last good
    state attached to the exception.
    """
    if not 0.0 < cfl < 1.0:
        raise EvolutionError(f"cfl={cfl} outside (0, 1)", state)
    if T <= 0.0:
        raise EvolutionError("T must be positive", state)
    dt_max = cfl * cfl_limit(state)
    nsteps = max(1, int(math.ceil(T / dt_max - 1e-12)))
    dt = T / nsteps
    if record_every is None:
        record_every = T / 10.0
    chunk = max(1, int(round(record_every / dt)))

    cur = state.copy()
    fc, dfc = cur.fc(), cur.dfc()
    snapshots = [cur.copy()]
    done = 0
    while done < nsteps:
        n = min(chunk, nsteps - done)
        prev = cur.copy()
        _kernels.leapfrog_steps(cur.u, cur.v, fc, dfc, cur.h, dt, cur.l, n)
        done += n
        cur.t = state.t + done * dt
        if not (np.all(np.isfinite(cur.u)) and np.all(np.isfinite(cur.v))):
            raise EvolutionError(
                f"non-finite field at t={cur.t:.6g}; aborting", prev)
        norm_err, tang_err = cur.constraint_violation()
        if norm_err > 1e-9 or tang_err > 1e-7:
            raise EvolutionError(
                f"constraint blow-up at t={cur.t:.6g} "
                f"(|u|-1: {norm_err:.3e}, u.v: {tang_err:.3e})", prev)
        snapshots.append(cur.copy())
    return cur, snapshots

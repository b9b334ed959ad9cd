"""Rotationally symmetric domain and target surfaces.

A closed surface of revolution is described by its radial metric
coefficient f on [0, R] (metric dr^2 + f^2 dtheta^2), with f vanishing to
first order at both poles.  The target sphere of revolution is described
the same way by g on [0, H].  Built-in profiles are analytic; arbitrary
profiles can be loaded from a two-column CSV and are interpolated.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline


@dataclass(frozen=True)
class SurfaceProfile:
    """Metric data (R, f, f', f'', k) for a surface of revolution.

    ``kind`` is "round", "bumpy" (with ``epsilon``), "tabulated", or
    "flat" (a non-closed profile f = r, accepted only by the operator
    checks).  Gaussian curvature is k = -f''/f with the pole values
    supplied by ``k0``/``kR`` limits.
    """

    R: float
    f: Callable[[np.ndarray], np.ndarray]
    df: Callable[[np.ndarray], np.ndarray]
    d2f: Callable[[np.ndarray], np.ndarray]
    kind: str
    epsilon: float = 0.0
    k0: float = 1.0
    kR: float = 1.0
    pole_margin: float = field(default=0.0)

    def __post_init__(self):
        if self.pole_margin == 0.0:
            # default pole margin for curvature-positivity checks
            object.__setattr__(self, "pole_margin", 0.2 * self.R)

    def k(self, r):
        """Gaussian curvature -f''/f, with limiting values at the poles."""
        r = np.asarray(r, dtype=float)
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        out = np.empty_like(r)
        eps = 1e-9 * self.R
        inner = (r > eps) & (r < self.R - eps)
        out[inner] = -self.d2f(r[inner]) / self.f(r[inner])
        out[r <= eps] = self.k0
        out[r >= self.R - eps] = self.kR
        return out[0] if scalar else out

    def jet(self, r: float) -> tuple[float, float, float, float]:
        """(f, f', f'', k) at a single radius."""
        if not 0.0 <= r <= self.R:
            raise ValueError(f"radius {r} outside [0, {self.R}]")
        return (float(self.f(r)), float(self.df(r)),
                float(self.d2f(r)), float(self.k(r)))


@dataclass(frozen=True)
class TargetProfile:
    """Metric data (H, g, g', g'') and volume for the target surface."""

    H: float
    g: Callable[[np.ndarray], np.ndarray]
    dg: Callable[[np.ndarray], np.ndarray]
    d2g: Callable[[np.ndarray], np.ndarray]
    G: Callable[[np.ndarray], np.ndarray]  # antiderivative of g, G(0) = 0
    kind: str

    @property
    def vol(self) -> float:
        return 2.0 * math.pi * float(self.G(self.H) - self.G(0.0))


def round_surface() -> SurfaceProfile:
    """Unit round sphere: f = sin r on [0, pi]."""
    return SurfaceProfile(R=math.pi, f=np.sin, df=np.cos,
                          d2f=lambda r: -np.sin(r), kind="round",
                          k0=1.0, kR=1.0)


def bumpy_surface(epsilon: float) -> SurfaceProfile:
    """Perturbed sphere f = sin(r) (1 + eps sin^2 r) on [0, pi]."""
    e = float(epsilon)

    def f(r):
        s = np.sin(r)
        return s * (1.0 + e * s * s)

    def df(r):
        s, c = np.sin(r), np.cos(r)
        return c * (1.0 + 3.0 * e * s * s)

    def d2f(r):
        s, c = np.sin(r), np.cos(r)
        return s * (6.0 * e * c * c - 3.0 * e * s * s - 1.0)

    # k(0) = k(pi) = 1 - 6 eps from the expansion of -f''/f
    k_pole = 1.0 - 6.0 * e
    return SurfaceProfile(R=math.pi, f=f, df=df, d2f=d2f, kind="bumpy",
                          epsilon=e, k0=k_pole, kR=k_pole)


def flat_surface(R: float = math.pi) -> SurfaceProfile:
    """f = r: flat polar coordinates.  Not a closed surface; used only by
    the operator-identity checks."""
    return SurfaceProfile(R=R, f=lambda r: np.asarray(r, dtype=float),
                          df=lambda r: np.ones_like(np.asarray(r, dtype=float)),
                          d2f=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
                          kind="flat", k0=0.0, kR=0.0)


def tabulated_surface(path: str) -> SurfaceProfile:
    """Load a profile from a CSV with header "r,f" and strictly increasing r.

    Interpolation is cubic spline; derivatives come from differentiating
    the spline.  Pole curvatures are extrapolated from the first interior
    samples.
    """
    rs, fs = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [c.strip() for c in header[:2]] != ["r", "f"]:
            raise ValueError(f"{path}: expected header 'r,f', got {header}")
        for row in reader:
            if not row:
                continue
            rs.append(float(row[0]))
            fs.append(float(row[1]))
    r = np.asarray(rs)
    fv = np.asarray(fs)
    if r.ndim != 1 or len(r) < 8:
        raise ValueError(f"{path}: need at least 8 samples")
    if np.any(np.diff(r) <= 0):
        raise ValueError(f"{path}: r column must be strictly increasing")
    if r[0] != 0.0:
        raise ValueError(f"{path}: r must start at 0")
    R = float(r[-1])

    spl = CubicSpline(r, fv)
    d1 = spl.derivative(1)
    d2 = spl.derivative(2)
    # pole curvature by limiting -f''/f slightly inside the domain
    ra = r[0] + 0.02 * R
    rb = r[-1] - 0.02 * R
    k0 = float(-d2(ra) / spl(ra))
    kR = float(-d2(rb) / spl(rb))
    return SurfaceProfile(R=R, f=spl, df=d1, d2f=d2, kind="tabulated",
                          k0=k0, kR=kR)


def round_target() -> TargetProfile:
    """Unit round target sphere: g = sin on [0, pi], volume 4 pi."""
    return TargetProfile(H=math.pi, g=np.sin, dg=np.cos,
                         d2g=lambda a: -np.sin(a),
                         G=lambda a: 1.0 - np.cos(a), kind="round")


@dataclass
class ValidationCheck:
    name: str
    passed: bool
    residual: float
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list[ValidationCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [
                {"name": c.name, "passed": c.passed,
                 "residual": c.residual, "detail": c.detail}
                for c in self.checks
            ],
        }


def validate_profile(profile: SurfaceProfile, n: int = 2000) -> ValidationReport:
    """Check the closed-surface invariants of a profile on a sample grid.

    Report-only: every invariant yields a named check with its measured
    residual.  Checks: endpoint values of f and f', positivity of f on the
    interior, positive curvature inside the pole margin, and the cubic
    pole expansion f = r - k(0) r^3 / 6 + o(r^3).
    """
    R = profile.R
    tol = 1e-6 * max(1.0, R)
    checks = []

    def add(name, residual, ok=None, detail=""):
        if ok is None:
            ok = residual < tol
        checks.append(ValidationCheck(name, bool(ok), float(residual), detail))

    add("f(0)=0", abs(float(profile.f(0.0))))
    add("f(R)=0", abs(float(profile.f(R))))
    add("f'(0)=1", abs(float(profile.df(0.0)) - 1.0))
    add("f'(R)=-1", abs(float(profile.df(R)) + 1.0))

    r_in = np.linspace(R / n, R * (1 - 1.0 / n), n)
    fmin = float(np.min(profile.f(r_in)))
    add("f>0 on (0,R)", max(0.0, -fmin), ok=fmin > 0.0,
        detail=f"min f = {fmin:.3e}")

    margin = profile.pole_margin
    r_pole = np.concatenate([np.linspace(R / n, margin, n // 4),
                             np.linspace(R - margin, R * (1 - 1.0 / n), n // 4)])
    kmin = float(np.min(profile.k(r_pole)))
    add("k>0 near poles", max(0.0, -kmin), ok=kmin > 0.0,
        detail=f"min k = {kmin:.3e} within margin {margin:.3g}")

    # |f(r) - (r - k(0) r^3/6)| / r^3 must decrease to 0 along r -> 0;
    # below the floor the sequence may be interpolation-noise limited
    # (tabulated profiles), which still certifies the expansion
    rs = R / 8.0 * 2.0 ** -np.arange(8, dtype=float)
    resid = np.abs(profile.f(rs) - (rs - profile.k0 * rs**3 / 6.0)) / rs**3
    floor = 1e-4
    decreasing = bool(np.all(
        (resid[1:] <= 1e-12 + 1.1 * resid[:-1]) | (resid[1:] < floor)))
    add("pole expansion o(r^3)", float(resid[-1]),
        ok=decreasing and resid[-1] < 0.05,
        detail=f"residual sequence {np.array2string(resid, precision=2)}")

    return ValidationReport(checks)


def arclength_coordinate(profile: SurfaceProfile, r: float) -> float:
    """Conformal arclength s(r) = int_{R/2}^r dt/f(t); diverges at the poles."""
    R = profile.R
    if not 0.0 < r < R:
        raise ValueError(f"arclength coordinate diverges at the poles: r={r}")
    val, _ = quad(lambda t: 1.0 / float(profile.f(t)), R / 2.0, r, limit=200)
    return float(val)

"""Radial operator identities and target-chart geometry.

Checks the first-order conjugation that lowers the centrifugal exponent:
with L_l = d^2/dr^2 + (f'/f) d/dr - l^2/f^2 and T_l = d/dr + l/f,

    T_l L_l - L_{l-1} T_l = c_l T_l,
    c_l = ((1 - f'^2) + 2 l (f' - 1) + f f'') / f^2,

together with the transform w = v' + l v / f, its integrating-factor
inverse, and the stereographic-ball chart metric of the target sphere
with its Christoffel symbols.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .profiles import SurfaceProfile


def rhs_coefficient(profile: SurfaceProfile, l: int, r) -> np.ndarray:
    """c_l(r); vanishes identically for the flat profile and for l = 0 on
    the round sphere, and stays bounded as r -> 0 for smooth profiles."""
    r = np.asarray(r, dtype=float)
    f = np.asarray(profile.f(r), dtype=float)
    df = np.asarray(profile.df(r), dtype=float)
    d2f = np.asarray(profile.d2f(r), dtype=float)
    return ((1.0 - df * df) + 2.0 * l * (df - 1.0) + f * d2f) / (f * f)


@dataclass
class OperatorStencil:
    """Second-order centered stencils for L_l and T_l on a uniform grid.

    The first/last node of each application are left at zero, so the
    stencils are meant for functions supported away from the grid ends.
    """

    r: np.ndarray
    l: int
    profile: SurfaceProfile

    @property
    def h(self) -> float:
        return float(self.r[1] - self.r[0])

    def apply_T(self, psi: np.ndarray, l: int | None = None) -> np.ndarray:
        if l is None:
            l = self.l
        f = np.asarray(self.profile.f(self.r), dtype=float)
        out = np.zeros_like(psi)
        out[1:-1] = ((psi[2:] - psi[:-2]) / (2.0 * self.h)
                     + l / f[1:-1] * psi[1:-1])
        return out

    def apply_L(self, psi: np.ndarray, l: int | None = None) -> np.ndarray:
        if l is None:
            l = self.l
        f = np.asarray(self.profile.f(self.r), dtype=float)
        df = np.asarray(self.profile.df(self.r), dtype=float)
        out = np.zeros_like(psi)
        out[1:-1] = ((psi[2:] - 2.0 * psi[1:-1] + psi[:-2]) / self.h**2
                     + df[1:-1] / f[1:-1] * (psi[2:] - psi[:-2]) / (2.0 * self.h)
                     - l * l / f[1:-1] ** 2 * psi[1:-1])
        return out


def intertwining_residual(profile: SurfaceProfile, l: int,
                          psi: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Grid residual of T_l L_l psi - L_{l-1} T_l psi - c_l T_l psi.

    psi should vanish near both grid ends (two nodes are lost per
    composition); the residual is zero there by construction."""
    st = OperatorStencil(r=np.asarray(r, dtype=float), l=l, profile=profile)
    t_psi = st.apply_T(psi)
    lhs = st.apply_T(st.apply_L(psi))
    rhs = st.apply_L(t_psi, l=l - 1) + rhs_coefficient(profile, l, r) * t_psi
    res = lhs - rhs
    res[:2] = 0.0
    res[-2:] = 0.0
    return res


def w_transform(profile: SurfaceProfile, v: np.ndarray,
                r: np.ndarray, l: int) -> np.ndarray:
    """w = v' + l v / f on a uniform grid starting at r = 0.

    Requires v(0) = 0 (the transform is for fields vanishing like r^l);
    the value at r = 0 is the limit (l + 1) v'(0)."""
    v = np.asarray(v, dtype=float)
    r = np.asarray(r, dtype=float)
    if abs(v[0]) > 1e-12 * max(1.0, float(np.max(np.abs(v)))):
        raise ValueError("w transform requires v(0) = 0")
    h = float(r[1] - r[0])
    f = np.asarray(profile.f(r), dtype=float)
    w = np.empty_like(v)
    w[1:-1] = (v[2:] - v[:-2]) / (2.0 * h) + l * v[1:-1] / f[1:-1]
    # v ~ a r^(l) near 0 gives v' + l v/f -> (l + 1) v'(0) for l >= 1,
    # and plain v'(0) for l = 0
    dv0 = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
    w[0] = (l + 1.0) * dv0 if l >= 1 else dv0
    w[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h) \
        + (l * v[-1] / f[-1] if f[-1] > 0 else 0.0)
    return w


def inverse_w_transform(profile: SurfaceProfile, w: np.ndarray,
                        r: np.ndarray, l: int) -> np.ndarray:
    """Invert w = v' + l v/f with v(0) = 0 by the integrating factor
    exp(int l/f):

        v(r) = int_0^r exp(-int_{r'}^{r} l/f dt) w(r') dr'.

    The cell-by-cell recurrence keeps every exponential factor <= 1, so
    the quadrature is stable on the full grid."""
    w = np.asarray(w, dtype=float)
    r = np.asarray(r, dtype=float)
    h = float(r[1] - r[0])
    f = np.asarray(profile.f(r), dtype=float)
    n = len(r)
    v = np.zeros(n)
    if n < 2:
        return v
    # first cell: kernel ~ (r'/r1)^l against a linear w
    v[1] = h * (w[0] / (l + 1.0) + (w[1] - w[0]) / (l + 2.0))
    for i in range(1, n - 1):
        dj = 0.5 * h * l * (1.0 / f[i] + 1.0 / f[i + 1])
        ef = math.exp(-dj)
        v[i + 1] = v[i] * ef + 0.5 * h * (w[i] * ef + w[i + 1])
    return v


def metric_chart(x: float, y: float) -> tuple[np.ndarray, np.ndarray]:
    """Chart metric of the unit sphere over the open unit disc and its
    inverse; the chart is the graph coordinates (x, y, sqrt(1-x^2-y^2))."""
    d = 1.0 - x * x - y * y
    if d <= 0.0:
        raise ValueError(f"({x}, {y}) outside the chart domain x^2+y^2 < 1")
    g = np.array([[1.0 - y * y, x * y], [x * y, 1.0 - x * x]]) / d
    ginv = np.array([[1.0 - x * x, -x * y], [-x * y, 1.0 - y * y]])
    return g, ginv


def metric_chart_partials(x: float, y: float) -> np.ndarray:
    """dg[k, i, j] = partial_k g_ij, analytic."""
    d = 1.0 - x * x - y * y
    if d <= 0.0:
        raise ValueError(f"({x}, {y}) outside the chart domain x^2+y^2 < 1")
    d2 = d * d
    dg = np.empty((2, 2, 2))
    dg[0, 0, 0] = 2.0 * x * (1.0 - y * y) / d2
    dg[1, 0, 0] = 2.0 * y * x * x / d2
    dg[0, 0, 1] = dg[0, 1, 0] = y * (1.0 + x * x - y * y) / d2
    dg[1, 0, 1] = dg[1, 1, 0] = x * (1.0 + y * y - x * x) / d2
    dg[0, 1, 1] = 2.0 * x * y * y / d2
    dg[1, 1, 1] = 2.0 * y * (1.0 - x * x) / d2
    return dg


def christoffel(x: float, y: float) -> np.ndarray:
    """Gamma[m, i, j] = (1/2) sum_k (d_i g_jk + d_j g_ki - d_k g_ij) g^km."""
    _, ginv = metric_chart(x, y)
    dg = metric_chart_partials(x, y)
    gamma = np.zeros((2, 2, 2))
    for m in range(2):
        for i in range(2):
            for j in range(2):
                s = 0.0
                for k in range(2):
                    s += (dg[i, j, k] + dg[j, k, i] - dg[k, i, j]) * ginv[k, m]
                gamma[m, i, j] = 0.5 * s
    return gamma


def christoffel_linear_bound(rho: float, n: int = 40) -> float:
    """max |Gamma(X)| / |X| over a polar sample of the disc |X| <= rho,
    with |Gamma| the Frobenius norm over all components."""
    best = 0.0
    for rad in np.linspace(rho / n, rho, n):
        for ang in np.linspace(0.0, 2.0 * math.pi, 2 * n, endpoint=False):
            x, y = rad * math.cos(ang), rad * math.sin(ang)
            val = float(np.sqrt(np.sum(christoffel(x, y) ** 2))) / rad
            best = max(best, val)
    return best


def _bump(r, a, b):
    """Smooth bump supported on (a, b)."""
    out = np.zeros_like(r)
    inside = (r > a) & (r < b)
    s = (r[inside] - a) / (b - a)
    out[inside] = np.sin(math.pi * s) ** 4
    return out


def regularity_report(profiles: dict[str, SurfaceProfile] | None = None,
                      ls: tuple[int, ...] = (0, 1, 2, 3),
                      grids: tuple[int, ...] = (200, 400, 800)) -> dict:
    """Convergence-rate report for the intertwining identity plus the
    chart-metric checks; JSON-serializable."""
    from .profiles import bumpy_surface, flat_surface, round_surface
    if profiles is None:
        profiles = {"flat": flat_surface(), "round": round_surface(),
                    "bumpy": bumpy_surface(0.05)}
    checks = []
    for name, prof in profiles.items():
        a, b = 0.3 * prof.R, 0.7 * prof.R
        for l in ls:
            sups = []
            for n in grids:
                r = np.linspace(0.0, prof.R, n + 1)
                # operators act on interior nodes only
                r = r[1:-1]
                psi = _bump(r, a, b)
                res = intertwining_residual(prof, l, psi, r)
                sups.append(float(np.max(np.abs(res))))
            rates = [math.log2(sups[i] / sups[i + 1])
                     for i in range(len(sups) - 1)
                     if sups[i + 1] > 0]
            checks.append({"name": f"intertwining {name} l={l}",
                           "residual": sups[-1], "rate": rates,
                           "constants": {"sups": sups}})
        rmid = 0.5 * prof.R
        checks.append({"name": f"rhs coefficient bounded {name}",
                       "residual": float(rhs_coefficient(
                           prof, 1, np.array([1e-3 * prof.R, rmid]))[0]),
                       "rate": None, "constants": {}})
    gam0 = christoffel(0.0, 0.0)
    checks.append({"name": "christoffel origin", "residual":
                   float(np.max(np.abs(gam0))), "rate": None, "constants": {}})
    consts = {f"rho={rho}": christoffel_linear_bound(rho)
              for rho in (0.1, 0.2, 0.3)}
    checks.append({"name": "christoffel linear bound", "residual": 0.0,
                   "rate": None, "constants": consts})
    return {"checks": checks}

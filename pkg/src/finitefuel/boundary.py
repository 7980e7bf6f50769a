"""Moving boundaries F(c), G(c) from the double-tangency (smooth-fit) system.

The common tangent touches H_l at Psi(F) and H_r1 at Psi(G).  Writing the
slope and intercept of the H_l tangent as h1, h2 and those of the H_r1
tangent as H3t, H4t, matching intercepts at equal slope gives the scalar
equation ``L(G, c) = H4t(G, c) - h2(h1^{-1}(H3t(G, c))) = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, FiniteFuelError, RegimeError, ValidationError
from .model import (
    ModelParams,
    DerivedConstants,
    Regime,
    bisect,
    derive_constants,
    h_r1,
    h_r1_x,
    inflection_xv,
    psi,
    rho,
    transformed_H,
    x_c,
)


# -- scalar helpers ------------------------------------------------------------

def h1(x, p: ModelParams):
    """Slope of the tangent to H_l at y = Psi(x)."""
    k = (p.alpha * p.delta - p.lam) / (2.0 * p.alpha)
    return k * np.exp(-x * p.sqrt2a) * rho(x, p)


def h1_x(x, p: ModelParams):
    s = p.sqrt2a
    k = (p.alpha * p.delta - p.lam) / (2.0 * p.alpha)
    return k * np.exp(-x * s) * (2.0 * x + 2.0 / s - s * rho(x, p))


def h2(x, p: ModelParams):
    """Vertical intercept of the tangent to H_l at y = Psi(x)."""
    s = p.sqrt2a
    k = (p.alpha * p.delta - p.lam) / (2.0 * p.alpha)
    return k * np.exp(x * s) * (rho(x, p) - 4.0 * x / s)


def h3(x, p: ModelParams):
    s = p.sqrt2a
    return (p.lam / p.alpha) * (p.alpha / (2.0 * p.lam) - (x + 1.0 / s)) * np.exp(-x * s)


def h4(x, p: ModelParams):
    s = p.sqrt2a
    return (p.lam / p.alpha) * (x - (p.alpha / (2.0 * p.lam) + 1.0 / s)) * np.exp(x * s)


def h1_inv_domain(p: ModelParams):
    return -p.lam / (2.0 * p.alpha**2), 0.0


def h1_inv(g, p: ModelParams, tol: float = 1e-14):
    """Inverse of h1 on [0, f0]; h1 is strictly increasing there.

    Scalars use Brent's method; arrays use a vectorised bisection.  Both end
    with one Newton step.
    """
    d = derive_constants(p)
    lo_g, hi_g = h1_inv_domain(p)
    slack = 1e-14 * abs(lo_g)
    garr = np.asarray(g, dtype=float)
    if np.any((garr < lo_g - slack) | (garr > hi_g + slack)) or np.any(np.isnan(garr)):
        raise DomainError(f"tangent slope {g!r} outside [{lo_g!r}, 0]")
    if garr.ndim == 0:
        gv = float(garr)
        if gv <= lo_g:
            return 0.0
        if gv >= hi_g:
            return d.f0
        x = brentq(lambda t: float(h1(t, p)) - gv, 0.0, d.f0, xtol=tol, rtol=4 * np.finfo(float).eps)
    else:
        gc = np.clip(garr, lo_g, hi_g)
        a = np.zeros_like(gc)
        b = np.full_like(gc, d.f0)
        for _ in range(60):
            m = 0.5 * (a + b)
            below = h1(m, p) < gc
            a = np.where(below, m, a)
            b = np.where(below, b, m)
        x = 0.5 * (a + b)
        gv = gc
    slope = h1_x(x, p)
    xn = np.clip(x - (h1(x, p) - gv) / slope, 0.0, d.f0)
    better = np.abs(h1(xn, p) - gv) <= np.abs(h1(x, p) - gv)
    x = np.where(better, xn, x)
    if np.ndim(x) == 0:
        return float(x)
    x = np.where(garr <= lo_g, 0.0, x)
    return np.where(garr >= hi_g, d.f0, x)


def H3t(x, c, p: ModelParams):
    """Slope of the tangent to H_r1(.; c) at y = Psi(x)."""
    s = p.sqrt2a
    return np.exp(-x * s) / (2.0 * s) * (h_r1_x(x, c, p) + s * h_r1(x, c, p))


def H4t(x, c, p: ModelParams):
    """Vertical intercept of the tangent to H_r1(.; c) at y = Psi(x)."""
    s = p.sqrt2a
    return np.exp(x * s) / (2.0 * s) * (-h_r1_x(x, c, p) + s * h_r1(x, c, p))


def H3t_x(x, c, p: ModelParams):
    s = p.sqrt2a
    hxx = 2.0 * (p.delta - p.lam / p.alpha)
    return np.exp(-x * s) / (2.0 * s) * (hxx - s * s * h_r1(x, c, p))


def L(x: float, c: float, p: ModelParams) -> float:
    """Intercept gap between the H_r1 tangent at Psi(x) and the parallel H_l tangent."""
    z = h1_inv(float(H3t(x, c, p)), p)
    return float(H4t(x, c, p)) - float(h2(z, p))


def L_vec(x, c: float, p: ModelParams):
    """Vectorised :func:`L`; NaN where the slope leaves the h1^{-1} domain."""
    x = np.asarray(x, dtype=float)
    slope = H3t(x, c, p)
    lo_g, hi_g = h1_inv_domain(p)
    ok = (slope >= lo_g) & (slope <= hi_g)
    out = np.full(x.shape, np.nan)
    if np.any(ok):
        z = h1_inv(slope[ok], p)
        out[ok] = H4t(x[ok], c, p) - h2(z, p)
    return out


def L_x(x: float, c: float, p: ModelParams) -> float:
    s = p.sqrt2a
    z = h1_inv(float(H3t(x, c, p)), p)
    return float(H3t_x(x, c, p)) * (math.exp(2.0 * z * s) - math.exp(2.0 * x * s))


def L_diag(x: float, c: float, p: ModelParams) -> float:
    """``(L_x + L_c)(x, c)`` in closed form, valid wherever h1^{-1} is defined."""
    s = p.sqrt2a
    z = h1_inv(float(H3t(x, c, p)), p)
    e = math.exp(2.0 * z * s)
    return (s * (float(H4t(x, c, p)) - float(H3t(x, c, p)) * e)
            + float(h3(x, p)) * e - float(h4(x, p)))


def q(x, z, p: ModelParams):
    s = p.sqrt2a
    e = np.exp(2.0 * z * s)
    return s * (h2(z, p) - h1(z, p) * e) + h3(x, p) * e - h4(x, p)


def q_expanded(x, z, p: ModelParams):
    """Second, expanded form of ``q``; algebraically identical to :func:`q`."""
    s = p.sqrt2a
    a2l = p.alpha / (2.0 * p.lam)
    return (-2.0 * z * (p.alpha * p.delta - p.lam) / p.alpha * np.exp(z * s)
            + (p.lam / p.alpha) * np.exp(x * s)
            * ((a2l - x - 1.0 / s) * np.exp(2.0 * (z - x) * s) + (a2l - x + 1.0 / s)))


def q_x(x, z, p: ModelParams):
    s = p.sqrt2a
    return (p.lam * math.sqrt(2.0 / p.alpha) * (p.alpha / (2.0 * p.lam) - x)
            * np.exp(x * s) * (1.0 - np.exp(2.0 * (z - x) * s)))


# -- boundary points -----------------------------------------------------------

@dataclass
class BoundaryPoint:
    c: float
    F: float
    G: float
    A: float
    B: float
    G_prime: float
    valid: bool = True
    flags: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


AUDIT_POINTS = 4096
AUDIT_TOL = 1e-9


def require_new_regime(p: ModelParams) -> DerivedConstants:
    d = derive_constants(p)
    if d.regime is not Regime.NEW:
        raise RegimeError(f"regime '{d.regime.value}': {d.regime.describe(d)}", d.regime)
    return d


def tangent_audit(A: float, B: float, c: float, p: ModelParams, n: int = AUDIT_POINTS):
    """Worst ``line - H`` over a geometric y-grid on [1, Psi(f0 + c + 1)].

    Returns ``(worst, y_at_worst)``, with the gap scaled by ``max(1, |H|)``.
    """
    d = derive_constants(p)
    y = np.geomspace(1.0, float(psi(d.f0 + c + 1.0, p)), n)
    H = transformed_H(y, c, p)
    gap = (A * y + B - H) / np.maximum(1.0, np.abs(H))
    i = int(np.argmax(gap))
    return float(gap[i]), float(y[i])


def _G_bracket(c: float, p: ModelParams, d: DerivedConstants, steps: int = 512):
    xv, _ = inflection_xv(c, p)
    hi_end = d.f0 + c
    eps = 1e-9 * hi_end
    left = max(x_c(c, p), xv) + eps
    right = hi_end - eps
    if not left < right:
        raise RegimeError("empty bracket for G: inflection point beyond f0 + c", d.regime)
    xs = np.linspace(left, right, steps + 1)
    vals = L_vec(xs, c, p)
    pairs = []
    for i in range(steps):
        v0, v1 = vals[i], vals[i + 1]
        if np.isnan(v0) or np.isnan(v1):
            continue
        if v0 == 0.0:
            pairs.append((float(xs[i]), float(xs[i])))
        elif (v0 > 0) != (v1 > 0) and v1 != 0.0:
            pairs.append((float(xs[i]), float(xs[i + 1])))
    if vals[-1] == 0.0:
        pairs.append((float(xs[-1]), float(xs[-1])))
    if not pairs:
        raise RegimeError(
            f"no tangency with H_r1 at c={c!r}; c beyond c2 or parameters outside new regime",
            d.regime)
    if len(pairs) > 1:
        raise RegimeError(f"L(., {c!r}) changes sign {len(pairs)} times on the bracket", d.regime)
    return pairs[0]


def solve_G(c: float, p: ModelParams, bracket=None) -> float:
    d = require_new_regime(p)
    a, b = bracket if bracket is not None else _G_bracket(c, p, d)
    if a == b:
        return a
    return bisect(lambda x: L(x, c, p), a, b, xtol=1e-15, maxiter=400)


def solve_boundary(c: float, p: ModelParams, audit: bool = True) -> BoundaryPoint:
    """Solve the double-tangency system at fuel level ``c``."""
    if not c > 0:
        raise DomainError(f"solve_boundary requires c > 0, got {c!r}")
    d = require_new_regime(p)
    G = solve_G(c, p)
    try:
        slope = float(H3t(G, c, p))
        F = h1_inv(slope, p)
        Lx = L_x(G, c, p)
    except DomainError as exc:
        raise RegimeError(f"tangent slope left the invertible range at c={c!r}: {exc}",
                          d.regime) from exc
    A = float(h1(F, p))
    B = float(h2(F, p))
    Gp = 1.0 - float(q(G, F, p)) / Lx
    flags = {}
    try:
        flags["L_end_negative"] = L(d.f0 + c, c, p) < 0
    except DomainError:
        flags["L_end_negative"] = False
    flags["F_positive"] = F > 0
    flags["G_prime_gt_1"] = Gp > 1.0
    flags["L_x_negative"] = Lx < 0
    if audit:
        worst, y_worst = tangent_audit(A, B, c, p)
        flags["tangent_below"] = worst <= AUDIT_TOL
        if worst > AUDIT_TOL:
            raise ValidationError(
                f"common tangent rises above the obstacle by {worst:.3e} at y={y_worst:.6g}",
                location=y_worst, violation=worst)
    valid = all(flags.values())
    return BoundaryPoint(c=float(c), F=F, G=G, A=A, B=B, G_prime=Gp, valid=valid, flags=flags)


# -- regime extents --------------------------------------------------------------

@dataclass
class Extent:
    value: float
    truncated: bool = False


def _scan_first_crossing(f, c_start=1e-6, c_max=10.0, tol=1e-10):
    """Doubling scan for the first c where f(c) <= 0, then bisection.

    ``f`` returns a float, or None when the boundary can no longer be solved
    (treated as the crossing).
    """
    c_prev, c = None, c_start
    while c <= c_max:
        v = f(c)
        if v is None or v <= 0:
            break
        c_prev, c = c, 2.0 * c
    else:
        return Extent(c_max, truncated=True)
    if c_prev is None:
        raise FiniteFuelError(f"condition already fails at the scan start c={c_start!r}")
    lo, hi = c_prev, c
    while hi - lo > tol:
        m = 0.5 * (lo + hi)
        v = f(m)
        if v is None or v <= 0:
            hi = m
        else:
            lo = m
    return Extent(0.5 * (lo + hi))


def _neg_L_end(c, p):
    d = derive_constants(p)
    try:
        return -L(d.f0 + c, c, p)
    except DomainError:
        return None


def find_c2(p: ModelParams, c_max: float = 10.0) -> Extent:
    """First c at which ``L(f0 + c, c)`` stops being negative.

    Returns ``Extent(inf, truncated=True)`` when there is no crossing up to ``c_max``.
    """
    require_new_regime(p)
    ext = _scan_first_crossing(lambda c: _neg_L_end(c, p), c_max=c_max)
    return Extent(math.inf, truncated=True) if ext.truncated else ext


def _gprime_margin(c, p):
    v = _neg_L_end(c, p)
    if v is None or v <= 0:
        return None
    try:
        bp = solve_boundary(c, p, audit=False)
    except (RegimeError, DomainError):
        return None
    return bp.G_prime - 1.0


def find_c0(p: ModelParams, c_max: float = 10.0, c2: Optional[Extent] = None) -> Extent:
    """``min(c2, first c with G'(c) <= 1)``."""
    if c2 is None:
        c2 = find_c2(p, c_max=c_max)
    limit = min(c2.value, c_max)
    ext = _scan_first_crossing(lambda c: _gprime_margin(c, p), c_max=limit)
    if ext.truncated:
        return Extent(c2.value, truncated=c2.truncated)
    return ext if ext.value < c2.value else Extent(c2.value, truncated=c2.truncated)


@dataclass
class BoundaryTable:
    params: ModelParams
    c_grid: List[float]
    points: List[BoundaryPoint]
    c2: Optional[float] = None
    c0: Optional[float] = None

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(bp, name) for bp in self.points])


def boundary_table(c_grid: Sequence[float], p: ModelParams, c0: Optional[float] = None,
                   c2: Optional[float] = None, check: bool = True) -> BoundaryTable:
    c_grid = [float(c) for c in c_grid]
    if any(b <= a for a, b in zip(c_grid, c_grid[1:])):
        raise DomainError("c_grid must be strictly ascending")
    points = []
    for c in c_grid:
        try:
            bp = solve_boundary(c, p)
        except FiniteFuelError as exc:
            raise type(exc)(f"boundary solve failed at c={c!r}: {exc}") from exc
        if not bp.valid:
            failed = sorted(k for k, v in bp.flags.items() if not v)
            raise ValidationError(f"invalid boundary point at c={c!r}: {failed}", location=c)
        points.append(bp)
    table = BoundaryTable(p, c_grid, points, c2=c2, c0=c0)
    if check and len(points) > 1:
        F, G = table.column("F"), table.column("G")
        if not np.all(np.diff(F) < 0):
            raise ValidationError("F is not strictly decreasing along the grid")
        if not np.all(np.diff(G) > 0):
            raise ValidationError("G is not strictly increasing along the grid")
    return table

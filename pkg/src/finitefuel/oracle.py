"""Brute-force references: a sampled convex minorant and a discrete obstacle problem.

Neither routine uses the boundary solver.  The minorant oracle takes the
lower convex hull of sampled obstacle values in the transformed scale; the
LCP oracle discretises ``min(h - v, (L - alpha) v) = 0`` on a uniform
natural-scale grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import solve_banded

from .errors import ConvergenceError, DomainError, ResolutionError
from .model import ModelParams, derive_constants, H_l, h_l, obstacle_h, psi, transformed_H


@dataclass
class MinorantResult:
    x_grid: np.ndarray
    y_grid: np.ndarray
    obstacle: np.ndarray
    w: np.ndarray
    contact_left: float
    contact_right: float
    i_left: int
    i_right: Optional[int]
    slope: float
    intercept: float

    @property
    def dx(self) -> float:
        return float(self.x_grid[1] - self.x_grid[0])


def lower_hull(y, v):
    """Indices of the lower convex hull of points sorted by ``y`` (monotone chain)."""
    ys = y.tolist()
    vs = v.tolist()
    hull = []
    for i in range(len(ys)):
        yi, vi = ys[i], vs[i]
        while len(hull) >= 2:
            j, k = hull[-2], hull[-1]
            # pop k unless it lies strictly below the chord j -> i
            if (ys[k] - ys[j]) * (vi - vs[j]) - (vs[k] - vs[j]) * (yi - ys[j]) <= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return np.array(hull, dtype=np.int64)


def minorant_oracle(c: float, p: ModelParams, n_points: int = 10**6,
                    x_max: Optional[float] = None) -> MinorantResult:
    """Greatest non-positive convex minorant of the sampled transformed obstacle.

    ``c = 0`` samples H_l (the no-fuel problem); ``c > 0`` samples H(.; c).
    """
    if c < 0:
        raise DomainError("fuel level must be non-negative")
    d = derive_constants(p)
    if d.f0 is None:
        raise DomainError("minorant oracle needs lambda < alpha*delta")
    if n_points < 10**4:
        raise ResolutionError(f"n_points={n_points} below the 1e4 minimum")
    if x_max is None:
        x_max = d.f0 + c + 1.0
    if x_max < d.f0 + c + 1.0 - 1e-12:
        raise DomainError("x_max must be at least f0 + c + 1")
    x = np.linspace(0.0, x_max, n_points)
    y = psi(x, p)
    obs = H_l(y, p) if c == 0 else transformed_H(y, c, p)
    capped = np.minimum(obs, 0.0)
    idx = lower_hull(y, capped)
    w = np.interp(y, y[idx], capped[idx])
    # a convex function bounded above on [1, inf) is non-increasing: flatten past the minimum
    imin = int(idx[np.argmin(capped[idx])])
    w[imin:] = capped[imin]
    if np.any(w > 0):
        raise ResolutionError("non-positivity constraint binds; outside the audited regime")

    if c == 0:
        return MinorantResult(x, y, obs, w, float(y[imin]), math.inf, imin, None,
                              0.0, float(capped[imin]))

    window = y <= psi(d.f0 + c, p)
    verts = idx[window[idx]]
    gaps = np.diff(verts)
    if gaps.size == 0 or gaps.max() <= 2:
        raise ResolutionError("grid too coarse to separate the two contact blocks")
    k = int(np.argmax(gaps))
    il, ir = int(verts[k]), int(verts[k + 1])
    slope = (capped[ir] - capped[il]) / (y[ir] - y[il])
    icpt = capped[il] - slope * y[il]
    return MinorantResult(x, y, obs, w, float(y[il]), float(y[ir]), il, ir,
                          float(slope), float(icpt))


# -- discrete obstacle problem ----------------------------------------------------------

@dataclass
class LCPResult:
    x_grid: np.ndarray
    v: np.ndarray
    obstacle: np.ndarray
    stop_mask: np.ndarray
    iterations: int
    psor_sweeps: int
    residual: float

    @property
    def h(self) -> float:
        return float(self.x_grid[1] - self.x_grid[0])


def lcp_obstacle(x, c: float, p: ModelParams):
    return h_l(x, p) if c == 0 else obstacle_h(x, c, p)


def default_x_max(c: float, p: ModelParams) -> float:
    d = derive_constants(p)
    if c == 0:
        # continuation region is unbounded; pin v = 0 where e^{-sx} is negligible
        return d.f0 + 30.0 / d.sqrt2a
    return d.f0 + c + 4.0 / d.sqrt2a


def psor_sweep(u, lower, diag, off, omega):
    """One ascending projected SOR sweep for ``A u >= 0, u >= lower``; returns max update."""
    n = len(u)
    biggest = 0.0
    for i in range(1, n - 1):
        gs = -off * (u[i - 1] + u[i + 1]) / diag
        new = u[i] + omega * (gs - u[i])
        if new < lower[i]:
            new = lower[i]
        delta = abs(new - u[i])
        if delta > biggest:
            biggest = delta
        u[i] = new
    return biggest


def psor_oracle(c: float, p: ModelParams, n_nodes: int = 40001, x_max: Optional[float] = None,
                omega: float = 1.5, tol: float = 1e-10, max_iter: Optional[int] = None,
                method: str = "policy", x_min: float = 0.0, obstacle=None) -> LCPResult:
    """Discrete optimal stopping value on a uniform grid over [x_min, x_max].

    Solves ``v <= h``, ``(L - alpha)_h v >= 0`` with complementarity, with v
    pinned to the obstacle at both ends (to 0 at the far end when c = 0).
    ``method="psor"`` iterates projected SOR from the obstacle;
    ``method="policy"`` reaches the same discrete solution by policy
    iteration on the active set (warm-started from a coarser grid) and then
    runs PSOR sweeps from it until the update falls below ``tol``, so the
    result is a PSOR fixed point either way.  ``obstacle`` replaces the
    model obstacle with any vectorised callable of x.
    """
    d = derive_constants(p)
    if d.f0 is None:
        raise DomainError("LCP oracle needs lambda < alpha*delta")
    if not 1.0 < omega < 2.0:
        raise DomainError("omega must lie in (1, 2)")
    if method not in ("policy", "psor"):
        raise DomainError(f"unknown method {method!r}")
    if x_max is None:
        x_max = default_x_max(c, p)
    if c > 0 and not x_max > d.f0 + c + 2.0 / d.sqrt2a:
        raise DomainError("x_max must exceed f0 + c + 2/sqrt(2 alpha)")
    if not 0.0 <= x_min < x_max:
        raise DomainError("need 0 <= x_min < x_max")
    if n_nodes < 3:
        raise DomainError("need at least 3 nodes")
    if max_iter is None:
        max_iter = 200 * n_nodes
    x = np.linspace(x_min, x_max, n_nodes)
    h = x[1] - x[0]
    g = np.asarray(lcp_obstacle(x, c, p) if obstacle is None else obstacle(x), dtype=float)
    right = 0.0 if c == 0 else g[-1]

    # work with u = -v:  u >= -g,  A u >= 0,  A = -(1/2) D2 + alpha
    diag = 1.0 / h**2 + p.alpha
    off = -0.5 / h**2
    lower = -g.copy()
    lower[-1] = -right
    u = lower.copy()

    iters = 0
    if method == "policy":
        active = None
        if n_nodes > 2001 and n_nodes % 2 == 1:
            coarse = psor_oracle(c, p, (n_nodes + 1) // 2, x_max=x_max, x_min=x_min,
                                 omega=omega, tol=tol, method="policy", obstacle=obstacle)
            # coarse node k sits at fine node 2k; midpoints inherit the left neighbour
            active = np.repeat(coarse.stop_mask, 2)[:n_nodes][1:-1]
        u, iters = _policy_iteration(lower, diag, off, u[0], u[-1], active)

    ul = u.tolist()
    lw = lower.tolist()
    sweeps = 0
    budget = max_iter if method == "psor" else 1000
    while True:
        delta = psor_sweep(ul, lw, diag, off, omega)
        sweeps += 1
        if delta < tol:
            break
        if sweeps >= budget:
            raise ConvergenceError(f"PSOR did not converge in {sweeps} sweeps", residual=delta)
    u = np.array(ul)
    v = -u
    # complementarity residual with the operator scaled by h^2
    Au = h * h * (diag * u[1:-1] + off * (u[:-2] + u[2:]))
    gap = g[1:-1] - v[1:-1]
    residual = float(np.max(np.abs(np.minimum(gap, Au))))
    stop = np.zeros(n_nodes, dtype=bool)
    stop[1:-1] = gap <= 10 * tol
    stop[0] = True
    stop[-1] = c > 0
    return LCPResult(x, v, g, stop, iters, sweeps, residual)


def _policy_iteration(lower, diag, off, left, right, active=None, max_iter=500):
    """Howard iteration for ``min(u - lower, A u) = 0`` with Dirichlet ends."""
    n = len(lower)
    m = n - 2
    lo = lower[1:-1]
    if active is None:
        active = np.zeros(m, dtype=bool)
    h2 = -0.5 / off
    seen = set()
    for it in range(1, max_iter + 1):
        ab = np.zeros((3, m))
        ab[1] = np.where(active, 1.0, diag)
        ab[0, 1:] = np.where(active[:-1], 0.0, off)
        ab[2, :-1] = np.where(active[1:], 0.0, off)
        rhs = np.where(active, lo, 0.0)
        if not active[0]:
            rhs[0] -= off * left
        if not active[-1]:
            rhs[-1] -= off * right
        ui = solve_banded((1, 1), ab, rhs)
        u = np.concatenate(([left], ui, [right]))
        Au = h2 * (diag * ui + off * (u[:-2] + u[2:]))
        new_active = (ui - lo) < Au
        if np.array_equal(new_active, active):
            return u, it
        key = new_active.tobytes()
        if key in seen:
            # round-off tie at the free boundary; the PSOR sweeps settle it
            return u, it
        seen.add(key)
        active = new_active
    raise ConvergenceError("policy iteration did not settle on an active set")

"""Battery of pass/fail checks on the constructed boundaries and value function."""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from typing import Callable, List, Optional, Sequence

import numpy as np

from . import boundary as bd
from . import value as vf
from .errors import FiniteFuelError
from .model import (
    ModelParams,
    derive_constants,
    psi,
    rho,
    H_l,
    x_c,
    inflection_xv,
)
from .oracle import minorant_oracle, psor_oracle


@dataclass
class CheckReport:
    name: str
    passed: bool
    worst_violation: float
    location: Optional[float]
    tolerance: float
    statement: str = ""
    reason: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class VerifyConfig:
    tol_identity: float = 1e-9
    tol_fd: float = 1e-6
    fd_step: float = 1e-5
    tol_value: float = 1e-9
    tol_R: float = 1e-8
    tol_product: float = 1e-8
    tol_gprime_fd: float = 1e-4
    gprime_fd_step: float = 1e-6
    audit_points: int = 4096
    minorant_points: int = 200_000
    minorant_steps: float = 2.0
    psor_nodes: int = 10_000
    psor_levels: int = 3
    psor_ratio: tuple = (3.0, 5.0)
    psor_noise_floor: float = 1e-12
    n_random: int = 16
    seed: int = 20240601
    tol_scale: float = 1.0

    def scaled(self, tol: float) -> float:
        return tol * self.tol_scale


def _report(name, worst, loc, tol, statement):
    worst = float(worst)
    return CheckReport(name, bool(worst <= tol), worst, None if loc is None else float(loc),
                       float(tol), statement)


def _failed(name, tol, statement, exc):
    return CheckReport(name, False, math.inf, None, float(tol), statement,
                       f"{type(exc).__name__}: {exc}")


def _worst(pairs):
    """Largest violation and where it occurred from ``(violation, location)`` pairs."""
    best = (-math.inf, None)
    for v, loc in pairs:
        if v > best[0]:
            best = (float(v), loc)
    return best


def audit_grid(bp: bd.BoundaryPoint, p: ModelParams, n: int):
    """Uniform x-grid on [0, f0 + c + 2] offset by half a step (avoids breakpoints)."""
    d = derive_constants(p)
    top = d.f0 + bp.c + 2.0
    step = top / n
    xs = (np.arange(n) + 0.5) * step
    for b in vf.breakpoints(bp, p):
        xs = xs[xs != b]
    return xs


def diag_fd(f: Callable[[float, float], float], x: float, c: float, s: float) -> float:
    """Richardson-extrapolated central difference along the direction (1, 1)."""
    d1 = (f(x + s, c + s) - f(x - s, c - s)) / (2 * s)
    s2 = 0.5 * s
    d2 = (f(x + s2, c + s2) - f(x - s2, c - s2)) / (2 * s2)
    return (4 * d2 - d1) / 3


def x_fd(f: Callable[[float, float], float], x: float, c: float, s: float) -> float:
    d1 = (f(x + s, c) - f(x - s, c)) / (2 * s)
    s2 = 0.5 * s
    d2 = (f(x + s2, c) - f(x - s2, c)) / (2 * s2)
    return (4 * d2 - d1) / 3


def random_domain_points(p: ModelParams, c0: float, n: int, seed: int):
    """Random (x, c) where the slope of the H_r1 tangent lies in the h1^{-1} domain."""
    d = derive_constants(p)
    rng = np.random.default_rng(seed)
    lo_g, hi_g = bd.h1_inv_domain(p)
    pts = []
    while len(pts) < n:
        c = float(rng.uniform(0.05, 0.9) * c0)
        xv, _ = inflection_xv(c, p)
        left = max(x_c(c, p), xv)
        x = float(rng.uniform(left, d.f0 + c))
        g = float(bd.H3t(x, c, p))
        # keep clear of the domain edge so the FD stencil stays inside
        if lo_g + 1e-3 * abs(lo_g) < g < hi_g - 1e-3 * abs(lo_g):
            pts.append((x, c))
    return pts


def aligned_psor_grids(bp: bd.BoundaryPoint, p: ModelParams, n_coarse: int, levels: int):
    """Nested grids whose nodes contain F and G, with spacing halved per level.

    Used for convergence-order measurements: with the free boundaries on
    nodes the discretisation error is a clean ``C h^2``.  On generic grids
    the constant depends on where F and G fall inside a cell.
    """
    d = derive_constants(p)
    span = d.f0 + bp.c + 4.0 / d.sqrt2a
    k = max(1, int(round((bp.G - bp.F) / (span / n_coarse))))
    grids = []
    for lev in range(levels):
        h = (bp.G - bp.F) / (k * 2**lev)
        x_min = bp.F - math.floor(bp.F / h) * h
        n_int = int(math.ceil((span - x_min) / h))
        grids.append((x_min, x_min + n_int * h, n_int + 1))
    return grids


def psor_convergence(bp: bd.BoundaryPoint, p: ModelParams, n_coarse: int = 10_000,
                     levels: int = 3):
    """Max-norm errors against the analytic V, and active-set offsets in units of h."""
    errs, offsets, hs = [], [], []
    for x_min, x_max, n in aligned_psor_grids(bp, p, n_coarse, levels):
        r = psor_oracle(bp.c, p, n_nodes=n, x_min=x_min, x_max=x_max)
        errs.append(float(np.max(np.abs(r.v - vf.v_stop(r.x_grid, bp, p)))))
        cont = r.x_grid[~r.stop_mask]
        offsets.append(max(abs(cont.min() - bp.F), abs(cont.max() - bp.G)) / r.h)
        hs.append(r.h)
    ratios = [a / b for a, b in zip(errs[:-1], errs[1:])]
    return errs, ratios, offsets, hs


def auto_c_list(c0: float, n: int = 8) -> List[float]:
    return [float(c) for c in np.geomspace(0.01 * c0, 0.9 * c0, n)]


def run_suite(p: ModelParams, c_list: Sequence[float], cfg: Optional[VerifyConfig] = None,
              c0: Optional[float] = None) -> List[CheckReport]:
    """Run every check and return reports sorted by name.

    Raises RegimeError outside the new regime.  Per-check failures are
    captured in the report rather than raised.
    """
    cfg = cfg or VerifyConfig()
    d = bd.require_new_regime(p)
    T = cfg.scaled
    reports: List[CheckReport] = []

    def run(name, tol, statement, fn):
        try:
            worst, loc = fn()
            reports.append(_report(name, worst, loc, tol, statement))
        except FiniteFuelError as exc:
            reports.append(_failed(name, tol, statement, exc))

    # -- parameter-level checks ---------------------------------------------------
    run("constants_rho", T(1e-10), "f0 is the positive root of rho",
        lambda: (abs(rho(d.f0, p)), d.f0))

    def no_fuel_geometry():
        y = np.linspace(1.0, float(psi(d.f0, p)), cfg.audit_points)
        w = H_l(y, p)
        sd = np.diff(w, 2)
        x = np.linspace(0.0, 2.0 * d.f0, cfg.audit_points)
        sign = np.sign(rho(x, p))
        want = np.where(x < d.f0, -1.0, 1.0)
        bad = np.abs(sign - want) * (np.abs(x - d.f0) > 1e-9)
        i = int(np.argmin(sd))
        return max(-sd[i] if sd[i] < 0 else 0.0, float(bad.max())), y[i]

    run("no_fuel_geometry", 0.0,
        "H_l convex on [1, Psi(f0)]; H_l decreasing then increasing about Psi(f0)",
        no_fuel_geometry)

    if c0 is None:
        c0 = bd.find_c0(p).value
    c2 = bd.find_c2(p)
    run("c0_positive", 0.0, "c2 > 0 and c0 > 0",
        lambda: (-min(c0, c2.value), c0))

    def limits():
        half = 1.0 / (2.0 * p.delta)
        cs = [c0 * f for f in (0.5, 0.25, 0.125, 0.0625)]
        dF, dG = [], []
        for c in cs:
            bp = bd.solve_boundary(c, p)
            dF.append(abs(bp.F - half))
            dG.append(abs(bp.G - half))
        viol = [(dF[i + 1] - dF[i], cs[i + 1]) for i in range(len(cs) - 1)]
        viol += [(dG[i + 1] - dG[i], cs[i + 1]) for i in range(len(cs) - 1)]
        viol.append((half - d.f0, 0.0))
        return _worst(viol)

    run("boundary_limits_c_to_0", 0.0,
        "F(c), G(c) approach 1/(2 delta) monotonically as c -> 0, while f0 > 1/(2 delta)",
        limits)

    def value_limit():
        cs = [c0 * f for f in (0.5, 0.25, 0.125)]
        xs = np.linspace(0.0, 4.0, 2001)
        gaps = []
        for c in cs:
            bp = bd.solve_boundary(c, p)
            gaps.append(float(np.max(np.abs(vf.v_tilde(xs, bp, p) - vf.v0_tilde(xs, p)))))
        return _worst([(gaps[i + 1] - gaps[i], cs[i + 1]) for i in range(len(gaps) - 1)])

    run("value_limit_c_to_0", 0.0,
        "max |V(.; c) - V0| on [0, 4] decreases as c -> 0", value_limit)

    def q_equiv():
        rng = np.random.default_rng(cfg.seed)
        x = rng.uniform(0.0, d.f0 + 1.0, 1000)
        z = rng.uniform(0.0, d.f0, 1000)
        a, b = bd.q(x, z, p), bd.q_expanded(x, z, p)
        rel = np.abs(a - b) / np.maximum(1.0, np.abs(a))
        i = int(np.argmax(rel))
        return rel[i], x[i]

    run("q_display_equivalence", T(1e-12), "both closed forms of q agree", q_equiv)

    # -- random-point identities ----------------------------------------------------
    pts = random_domain_points(p, c0, cfg.n_random, cfg.seed)
    s = cfg.fd_step
    sq = p.sqrt2a

    def ident(fn):
        return lambda: _worst([(fn(x, c), c) for x, c in pts])

    run("identity_hall1", T(cfg.tol_fd), "(d/dx + d/dc) H3t = h3 - sqrt(2 alpha) H3t",
        ident(lambda x, c: abs(diag_fd(lambda a, b: float(bd.H3t(a, b, p)), x, c, s)
                                - (float(bd.h3(x, p)) - sq * float(bd.H3t(x, c, p))))))
    run("identity_hall2", T(cfg.tol_fd), "(d/dx + d/dc) H4t = sqrt(2 alpha) H4t - h4",
        ident(lambda x, c: abs(diag_fd(lambda a, b: float(bd.H4t(a, b, p)), x, c, s)
                                - (sq * float(bd.H4t(x, c, p)) - float(bd.h4(x, p))))))
    run("identity_lx", T(cfg.tol_fd), "L_x = dH3t/dx (e^{2 z s} - e^{2 x s})",
        ident(lambda x, c: abs(x_fd(lambda a, b: bd.L(a, b, p), x, c, s) - bd.L_x(x, c, p))))
    run("identity_lxlc_q", T(cfg.tol_fd),
        "(L_x + L_c) matches its closed form, which reduces to q(G; F) on the boundary",
        ident(lambda x, c: abs(diag_fd(lambda a, b: bd.L(a, b, p), x, c, s)
                                - bd.L_diag(x, c, p))))

    if not c_list:
        return sorted(reports, key=lambda r: r.name)

    # -- per-c checks ---------------------------------------------------------------------
    c_list = sorted(float(c) for c in c_list)
    points = {}
    errors = {}
    for c in c_list:
        try:
            points[c] = bd.solve_boundary(c, p)
        except FiniteFuelError as exc:
            errors[c] = exc

    def per_c(name, tol, statement, fn):
        if errors:
            c_bad, exc = next(iter(errors.items()))
            reports.append(_failed(name, tol, statement,
                                   type(exc)(f"c={c_bad!r}: {exc}")))
            return
        run(name, tol, statement, lambda: _worst(fn(bp) for bp in points.values()))

    s2 = p.sqrt2a

    def mid(bp, x):
        return (p.lam / p.alpha) * x * x + p.lam / p.alpha**2 + bp.A * math.exp(s2 * x) + bp.B * math.exp(-s2 * x)

    def mid_x(bp, x):
        return 2 * (p.lam / p.alpha) * x + s2 * (bp.A * math.exp(s2 * x) - bp.B * math.exp(-s2 * x))

    per_c("smooth_fit_F", T(cfg.tol_identity), "V and V_x continuous across F",
          lambda bp: (max(abs(mid(bp, bp.F) - p.delta * bp.F**2),
                          abs(mid_x(bp, bp.F) - 2 * p.delta * bp.F)), bp.c))

    def fit_G(bp):
        G, c = bp.G, bp.c
        v_right = float(vf.v0_tilde(G - c, p)) + c
        dv_right = float(vf.v0_tilde_x(G - c, p))
        slope_gap = abs(float(bd.H3t(G, c, p)) - float(bd.h1(bp.F, p)))
        icpt_gap = abs(float(bd.H4t(G, c, p)) - float(bd.h2(bp.F, p)))
        return max(abs(mid(bp, G) - v_right), abs(mid_x(bp, G) - dv_right),
                   slope_gap, icpt_gap), c

    per_c("smooth_fit_G", T(cfg.tol_identity),
          "V and V_x continuous across G; equal slope and intercept of the common tangent",
          fit_G)

    per_c("tangent_below_obstacle", T(cfg.tol_identity), "common tangent lies below H(.; c)",
          lambda bp: bd.tangent_audit(bp.A, bp.B, bp.c, p, cfg.audit_points))

    def w_grid(bp):
        x = np.linspace(0.0, derive_constants(p).f0 + bp.c + 1.0, cfg.audit_points)
        y = psi(x, p)
        return y, vf.W(y, bp, p)

    def w_convex(bp):
        y, w = w_grid(bp)
        sl = np.diff(w) / np.diff(y)
        dsl = np.diff(sl)
        i = int(np.argmin(dsl))
        return -dsl[i], y[i + 1]

    per_c("W_convex", T(cfg.tol_identity), "minorant W(.; c) is convex", w_convex)

    def w_nonpos(bp):
        y, w = w_grid(bp)
        i = int(np.argmax(w))
        return w[i], y[i]

    per_c("W_nonpositive", T(1e-12), "minorant W(.; c) is non-positive", w_nonpos)

    def growth(bp):
        # empirical K in 0 <= V(x; c) <= K (1 + x^2); the obstacle bound gives K = delta
        xs = audit_grid(bp, p, cfg.audit_points)
        v = np.asarray(vf.v_tilde(xs, bp, p))
        K = float(np.max(v / (1.0 + xs * xs)))
        return max(K - p.delta, -float(v.min())), bp.c

    per_c("growth_condition", T(cfg.tol_value), "0 <= V(x; c) <= K (1 + x^2) with K <= delta",
          growth)

    def slack(fn):
        def check(bp):
            xs = audit_grid(bp, p, cfg.audit_points)
            v = fn(xs, bp)
            i = int(np.argmax(v))
            return v[i], xs[i]
        return check

    per_c("V_leq_obstacle", T(cfg.tol_value), "V(x; c) <= delta x^2",
          slack(lambda xs, bp: np.asarray(vf.v_tilde(xs, bp, p)) - p.delta * xs * xs))
    per_c("U_leq_1", T(cfg.tol_value), "U = V_x + V_c <= 1",
          slack(lambda xs, bp: np.asarray(vf.u_field(xs, bp, p)) - 1.0))

    def u_bounds(bp):
        C, D = vf.u_coefficients_from_derivatives(bp, p)
        def U(x):
            return 2 * p.lam * x / p.alpha + C * math.exp(s2 * x) + D * math.exp(-s2 * x)
        return max(abs(U(bp.G) - 1.0), abs(U(bp.F) - 2 * p.delta * bp.F)), bp.c

    per_c("U_boundary_values", T(cfg.tol_identity),
          "U(G) = 1 and U(F) = 2 delta F, with U built from A'(c), B'(c)", u_bounds)

    def r_nonneg(bp):
        xs = audit_grid(bp, p, cfg.audit_points)
        r1 = np.asarray(vf.r_field(xs, bp, p))
        r2 = np.asarray(vf.r_field_direct(xs, bp, p))
        v = -np.minimum(r1, r2)
        i = int(np.argmax(v))
        return v[i], xs[i]

    per_c("R_nonneg", T(cfg.tol_R), "V_xx/2 + lam x^2 - alpha V >= 0", r_nonneg)

    def complementarity(bp):
        xs = audit_grid(bp, p, cfg.audit_points)
        f1 = np.abs(p.delta * xs * xs - np.asarray(vf.v_tilde(xs, bp, p)))
        f2 = np.abs(1.0 - np.asarray(vf.u_field(xs, bp, p)))
        f3 = np.abs(np.asarray(vf.r_field_direct(xs, bp, p)))
        prod = f1 * f2 * f3
        smallest = np.minimum(np.minimum(f1, f2), f3)
        # product must vanish and some factor must be (numerically) zero
        v = np.maximum(prod, (smallest - 1e-10) * (cfg.tol_product / 1e-10))
        i = int(np.argmax(v))
        return v[i], xs[i]

    per_c("complementarity", T(cfg.tol_product),
          "[delta x^2 - V][1 - U][R] = 0 with one factor vanishing", complementarity)

    def gprime(bp):
        return 1.0 - bp.G_prime, bp.c

    per_c("Gprime_gt_1", 0.0, "G'(c) > 1 on (0, c0)", gprime)

    def gprime_fd(bp):
        h = cfg.gprime_fd_step
        fd = (bd.solve_G(bp.c + h, p) - bd.solve_G(bp.c - h, p)) / (2 * h)
        return abs(fd - bp.G_prime), bp.c

    per_c("Gprime_fd_match", T(cfg.tol_gprime_fd),
          "analytic G' matches centred differences of G", gprime_fd)

    def diag_at_G(bp):
        # (L_x + L_c)(G, c) = q(G; F) and L_x(G, c) < 0
        fd = diag_fd(lambda a, b: bd.L(a, b, p), bp.G, bp.c, s)
        lx = bd.L_x(bp.G, bp.c, p)
        return max(abs(fd - float(bd.q(bp.G, bp.F, p))), lx + T(cfg.tol_fd)), bp.c

    per_c("identity_lxlc_at_G", T(cfg.tol_fd), "(L_x + L_c)(G, c) = q(G; F) and L_x(G, c) < 0",
          diag_at_G)

    if not errors:
        F = np.array([points[c].F for c in c_list])
        G = np.array([points[c].G for c in c_list])
        if len(c_list) > 1:
            iF = int(np.argmax(np.diff(F)))
            iG = int(np.argmin(np.diff(G)))
            reports.append(_report("F_monotone", np.diff(F)[iF], c_list[iF + 1], 0.0,
                                   "F strictly decreasing in c"))
            reports.append(_report("G_monotone", -np.diff(G)[iG], c_list[iG + 1], 0.0,
                                   "G strictly increasing in c"))
        else:
            reports.append(_report("F_monotone", -math.inf, None, 0.0, "F strictly decreasing in c"))
            reports.append(_report("G_monotone", -math.inf, None, 0.0, "G strictly increasing in c"))
    else:
        exc = next(iter(errors.values()))
        reports.append(_failed("F_monotone", 0.0, "F strictly decreasing in c", exc))
        reports.append(_failed("G_monotone", 0.0, "G strictly increasing in c", exc))

    def minorant_match(bp):
        m = minorant_oracle(bp.c, p, n_points=cfg.minorant_points)
        off = max(abs(m.x_grid[m.i_left] - bp.F), abs(m.x_grid[m.i_right] - bp.G)) / m.dx
        return off - cfg.minorant_steps, bp.c

    per_c("oracle_minorant_match", 0.0,
          "hull contact points of the sampled minorant within 2 grid steps of F, G",
          minorant_match)

    lo_r, hi_r = cfg.psor_ratio

    def psor_match(bp):
        errs, ratios, offsets, _ = psor_convergence(bp, p, cfg.psor_nodes, cfg.psor_levels)
        # ratios of errors already at round-off carry no order information
        viol = [max(lo_r - r, r - hi_r) for r, e in zip(ratios, errs[1:])
                if e > cfg.psor_noise_floor]
        viol += [o - 2.0 for o in offsets]
        return max(viol), bp.c

    per_c("oracle_psor_match", 0.0,
          "discrete LCP value converges to V at second order; active set within 2h",
          psor_match)

    return sorted(reports, key=lambda r: r.name)


def format_table(reports: Sequence[CheckReport]) -> str:
    w = max(len(r.name) for r in reports) if reports else 10
    lines = [f"{'check':<{w}}  {'status':<6}  {'worst':>12}  {'tolerance':>10}  {'at':>12}"]
    for r in reports:
        loc = "" if r.location is None else f"{r.location:.6g}"
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{r.name:<{w}}  {status:<6}  {r.worst_violation:>12.3e}  "
                     f"{r.tolerance:>10.1e}  {loc:>12}")
        if r.reason:
            lines.append(f"{'':<{w}}  -> {r.reason}")
    return "\n".join(lines)

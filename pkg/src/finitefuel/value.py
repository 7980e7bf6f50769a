"""Closed-form value functions and the verification fields U and R.

``v_tilde`` is the candidate control value (running cost included); the
stopping value ``V = v_tilde - lam/alpha^2 - (lam/alpha) x^2`` is what the
oracles compute.  All evaluators are even in ``x``.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import List

import numpy as np

from .boundary import BoundaryPoint, H3t_x, derive_constants
from .errors import BreakpointError, DomainError, ValidationError
from .model import ModelParams, h_r1, obstacle_h, psi, H_l, H_r

STOP, CONTINUE, ACT = "stop", "continue", "act"


def _even(x):
    return np.abs(np.asarray(x, dtype=float))


def _out(v):
    return float(v) if np.ndim(v) == 0 else v


def running_cost_shift(x, p: ModelParams):
    x = np.asarray(x, dtype=float)
    return p.lam / p.alpha**2 + (p.lam / p.alpha) * x * x


def v0_tilde(x, p: ModelParams):
    d = derive_constants(p)
    x = _even(x)
    cont = p.lam / p.alpha**2 + (p.lam / p.alpha) * x * x + d.B0 * np.exp(-x * d.sqrt2a)
    return _out(np.where(x <= d.f0, p.delta * x * x, cont))


def v0_tilde_x(x, p: ModelParams):
    d = derive_constants(p)
    xa = _even(x)
    cont = 2.0 * (p.lam / p.alpha) * xa - d.sqrt2a * d.B0 * np.exp(-xa * d.sqrt2a)
    return _out(np.sign(x) * np.where(xa <= d.f0, 2.0 * p.delta * xa, cont))


def v0_tilde_xx(x, p: ModelParams):
    d = derive_constants(p)
    xa = _even(x)
    cont = 2.0 * (p.lam / p.alpha) + 2.0 * p.alpha * d.B0 * np.exp(-xa * d.sqrt2a)
    return _out(np.where(xa <= d.f0, 2.0 * p.delta, cont))


def w0(y, p: ModelParams):
    """No-fuel minorant: H_l up to Psi(f0), then the constant B0."""
    d = derive_constants(p)
    y = np.asarray(y, dtype=float)
    if np.any(y < 1.0):
        raise DomainError("w0 is defined on y >= 1")
    yf = float(psi(d.f0, p))
    return _out(np.where(y <= yf, H_l(np.minimum(y, yf), p), d.B0))


def _require_valid(bp: BoundaryPoint):
    if not bp.valid:
        raise ValidationError(f"boundary point at c={bp.c!r} is not valid: {bp.flags}")


def v_tilde(x, bp: BoundaryPoint, p: ModelParams):
    _require_valid(bp)
    s = p.sqrt2a
    x = _even(x)
    mid = (p.lam / p.alpha) * x * x + p.lam / p.alpha**2 + bp.A * np.exp(x * s) + bp.B * np.exp(-x * s)
    out = np.where(x <= bp.F, p.delta * x * x, mid)
    return _out(np.where(x >= bp.G, np.asarray(v0_tilde(x - bp.c, p)) + bp.c, out))


def v_tilde_x(x, bp: BoundaryPoint, p: ModelParams):
    _require_valid(bp)
    s = p.sqrt2a
    xa = _even(x)
    mid = 2.0 * (p.lam / p.alpha) * xa + s * (bp.A * np.exp(xa * s) - bp.B * np.exp(-xa * s))
    out = np.where(xa <= bp.F, 2.0 * p.delta * xa, mid)
    out = np.where(xa >= bp.G, np.asarray(v0_tilde_x(xa - bp.c, p)), out)
    return _out(np.sign(x) * out)


def v_tilde_xx(x, bp: BoundaryPoint, p: ModelParams):
    _require_valid(bp)
    s = p.sqrt2a
    xa = _even(x)
    mid = 2.0 * (p.lam / p.alpha) + 2.0 * p.alpha * (bp.A * np.exp(xa * s) + bp.B * np.exp(-xa * s))
    out = np.where(xa <= bp.F, 2.0 * p.delta, mid)
    return _out(np.where(xa >= bp.G, np.asarray(v0_tilde_xx(xa - bp.c, p)), out))


def v_stop(x, bp: BoundaryPoint, p: ModelParams):
    """Stopping value V(x; c) (running cost integrated out)."""
    return _out(np.asarray(v_tilde(x, bp, p)) - running_cost_shift(x, p))


def W(y, bp: BoundaryPoint, p: ModelParams):
    """Minorant of H(.; c): H_l, then the common tangent, then H_r."""
    _require_valid(bp)
    y = np.asarray(y, dtype=float)
    if np.any(y < 1.0):
        raise DomainError("W is defined on y >= 1")
    y1, y2 = float(psi(bp.F, p)), float(psi(bp.G, p))
    out = np.where(y <= y1, H_l(y, p), bp.A * y + bp.B)
    return _out(np.where(y >= y2, H_r(y, bp.c, p), out))


# -- U = Vx + Vc and R = Vxx/2 + lam x^2 - alpha V ------------------------------------

def u_coefficients(bp: BoundaryPoint, p: ModelParams):
    """(C, D) in ``U = 2 lam x / alpha + C e^{sx} + D e^{-sx}`` on (F, G).

    Fixed by continuity of U at both boundaries: ``U(F) = 2 delta F``, ``U(G) = 1``.
    """
    _require_valid(bp)
    s = p.sqrt2a
    if not bp.G > bp.F:
        raise DomainError("degenerate boundary point: F >= G")
    M = np.array([[np.exp(bp.F * s), np.exp(-bp.F * s)],
                  [np.exp(bp.G * s), np.exp(-bp.G * s)]])
    rhs = np.array([2.0 * p.delta * bp.F - 2.0 * p.lam * bp.F / p.alpha,
                    1.0 - 2.0 * p.lam * bp.G / p.alpha])
    C, D = np.linalg.solve(M, rhs)
    return float(C), float(D)


def u_coefficients_from_derivatives(bp: BoundaryPoint, p: ModelParams):
    """(C, D) from ``A'(c)``, ``B'(c)`` via G'(c): an independent route."""
    s = p.sqrt2a
    G, c = bp.G, bp.c
    hr = h_r1(G, c, p)
    hxx = 2.0 * (p.delta - p.lam / p.alpha)
    hc = 2.0 * p.delta * (c - G) + 1.0      # d h_r1 / dc
    hxc = -2.0 * p.delta                    # d^2 h_r1 / dx dc
    e = np.exp(G * s)
    H3_c = (hxc + s * hc) / (2.0 * s * e)
    H4_x = e / (2.0 * s) * (s * s * hr - hxx)
    H4_c = e / (2.0 * s) * (-hxc + s * hc)
    A_prime = float(H3t_x(G, c, p)) * bp.G_prime + H3_c
    B_prime = H4_x * bp.G_prime + H4_c
    return s * bp.A + A_prime, -s * bp.B + B_prime


def u_field(x, bp: BoundaryPoint, p: ModelParams):
    C, D = u_coefficients(bp, p)
    s = p.sqrt2a
    xa = _even(x)
    mid = 2.0 * p.lam * xa / p.alpha + C * np.exp(xa * s) + D * np.exp(-xa * s)
    out = np.where(xa <= bp.F, 2.0 * p.delta * xa, mid)
    return _out(np.where(xa >= bp.G, 1.0, out))


def u_field_x(x, bp: BoundaryPoint, p: ModelParams):
    C, D = u_coefficients(bp, p)
    s = p.sqrt2a
    xa = _even(x)
    mid = 2.0 * p.lam / p.alpha + s * (C * np.exp(xa * s) - D * np.exp(-xa * s))
    out = np.where(xa <= bp.F, 2.0 * p.delta, mid)
    return _out(np.where(xa >= bp.G, 0.0, out))


def breakpoints(bp: BoundaryPoint, p: ModelParams):
    d = derive_constants(p)
    return bp.F, bp.G, d.f0 + bp.c


def r_field(x, bp: BoundaryPoint, p: ModelParams):
    """Four-branch closed form of ``V_xx/2 + lam x^2 - alpha V``."""
    _require_valid(bp)
    x = _even(x)
    c = bp.c
    F, G, brk = breakpoints(bp, p)
    if np.any((x == F) | (x == G) | (x == brk)):
        raise BreakpointError("R is undefined at F, G and f0 + c")
    left = p.delta - (p.alpha * p.delta - p.lam) * x * x
    act = p.delta + p.lam * x * x - p.alpha * (p.delta * (x - c) ** 2 + c)
    far = 2.0 * p.lam * c * (x - (0.5 * c + p.alpha / (2.0 * p.lam)))
    out = np.where(x < F, left, 0.0)
    out = np.where(x > G, act, out)
    return _out(np.where(x > brk, far, out))


def r_field_direct(x, bp: BoundaryPoint, p: ModelParams):
    """Same quantity evaluated from the value function itself."""
    x = np.asarray(x, dtype=float)
    return _out(0.5 * np.asarray(v_tilde_xx(x, bp, p)) + p.lam * x * x
                - p.alpha * np.asarray(v_tilde(x, bp, p)))


# -- profiles ------------------------------------------------------------------------

@dataclass
class ValueProfile:
    c: float
    xs: List[float]
    v_tilde: List[float]
    v: List[float]
    obstacle: List[float]
    region: List[str]

    def to_dict(self) -> dict:
        return asdict(self)

    def rows(self):
        return zip(self.xs, self.v_tilde, self.v, self.obstacle, self.region)


def region_labels(x, bp: BoundaryPoint):
    xa = _even(x)
    lab = np.where(xa <= bp.F, STOP, CONTINUE)
    return np.where(xa >= bp.G, ACT, lab)


def value_profile(bp: BoundaryPoint, p: ModelParams, xs) -> ValueProfile:
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 1 or np.any(np.diff(xs) <= 0):
        raise DomainError("xs must be a strictly ascending 1-d array")
    vt = np.asarray(v_tilde(xs, bp, p))
    v = vt - running_cost_shift(xs, p)
    obs = np.asarray(obstacle_h(np.abs(xs), bp.c, p))
    return ValueProfile(bp.c, xs.tolist(), vt.tolist(), v.tolist(), obs.tolist(),
                        [str(r) for r in region_labels(xs, bp)])

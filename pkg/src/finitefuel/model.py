"""Model parameters, derived constants, obstacles and the scale transform.

The driving process is standard Brownian motion, so the fundamental
solutions of ``(L - alpha) u = 0`` are ``exp(-/+ sqrt(2 alpha) x)`` and the
scale transform is ``y = Psi(x) = exp(2 sqrt(2 alpha) x)``.  Functions that
take ``x`` accept scalars or numpy arrays.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import DomainError, FiniteFuelError


class Regime(str, enum.Enum):
    NEW = "new"                # lambda in (lambda_dagger, alpha*delta)
    OPEN = "open"              # lambda in (lambda_star, lambda_dagger]
    PRIOR = "prior"            # lambda <= lambda_star
    DEGENERATE = "degenerate"  # lambda >= alpha*delta

    def describe(self, d: "DerivedConstants") -> str:
        if self is Regime.NEW:
            return (f"lambda in (lambda_dagger, alpha*delta) = "
                    f"({d.lambda_dagger:.6g}, {d.alpha_delta:.6g})")
        if self is Regime.OPEN:
            return (f"lambda in the open range (lambda*, lambda_dagger] = "
                    f"({d.lambda_star:.6g}, {d.lambda_dagger:.6g}]; "
                    "the stopping heuristic breaks down here and the problem is unsolved")
        if self is Regime.PRIOR:
            return (f"lambda <= lambda* = {d.lambda_star:.6g}; "
                    "previously solved regime, not handled by this solver")
        return (f"lambda >= alpha*delta = {d.alpha_delta:.6g}; "
                "degenerate regime, f0 and B0 undefined")


@dataclass(frozen=True)
class ModelParams:
    """Discount rate ``alpha``, terminal cost ``delta``, running cost ``lam``."""

    alpha: float
    delta: float
    lam: float

    def __post_init__(self):
        for name in ("alpha", "delta", "lam"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be a positive finite number, got {v!r}")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "delta", float(self.delta))
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def sqrt2a(self) -> float:
        return math.sqrt(2.0 * self.alpha)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "delta": self.delta, "lambda": self.lam}

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParams":
        return cls(data["alpha"], data["delta"], data["lambda"])


@dataclass(frozen=True)
class DerivedConstants:
    f0: Optional[float]
    lambda_star: float
    lambda_dagger: float
    B0: Optional[float]
    sqrt2a: float
    alpha_delta: float
    regime: Regime

    def to_dict(self) -> dict:
        return {
            "f0": self.f0,
            "lambda_star": self.lambda_star,
            "lambda_dagger": self.lambda_dagger,
            "b0": self.B0,
            "regime": self.regime.value,
        }


@dataclass(frozen=True)
class Point2:
    y: float
    v: float


@dataclass(frozen=True)
class TangentLine:
    slope: float
    intercept: float

    def __call__(self, z):
        return self.slope * z + self.intercept


def f0_of_lambda(alpha: float, delta: float, lam: float) -> float:
    ad = alpha * delta
    if lam >= ad:
        raise DomainError("f0 requires lambda < alpha*delta")
    return (math.sqrt((ad + lam) / (ad - lam)) - 1.0) / math.sqrt(2.0 * alpha)


def lambda_star_of(alpha: float, delta: float) -> float:
    return alpha * delta / (1.0 + (delta / alpha) / (1.0 / (4.0 * delta) + 1.0 / math.sqrt(2.0 * alpha)))


def bisect(f, a: float, b: float, xtol: float, maxiter: int = 200) -> float:
    """Plain bisection on a sign-changing bracket ``[a, b]``."""
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa > 0) == (fb > 0):
        raise FiniteFuelError(f"bisection bracket [{a!r}, {b!r}] does not change sign")
    for _ in range(maxiter):
        m = 0.5 * (a + b)
        if b - a <= xtol or m == a or m == b:
            break
        fm = f(m)
        if fm == 0.0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def _lambda_dagger(alpha: float, delta: float, lstar: float) -> float:
    ad = alpha * delta
    eps = 1e-12 * ad

    def g(lam):
        return f0_of_lambda(alpha, delta, lam) - alpha / (2.0 * lam)

    return bisect(g, lstar + eps, ad - eps, xtol=1e-12 * ad * 1e-3)


@lru_cache(maxsize=256)
def derive_constants(p: ModelParams) -> DerivedConstants:
    a, dl, lam = p.alpha, p.delta, p.lam
    s = p.sqrt2a
    ad = a * dl
    lstar = lambda_star_of(a, dl)
    ldag = _lambda_dagger(a, dl, lstar)
    if lam >= ad:
        return DerivedConstants(None, lstar, ldag, None, s, ad, Regime.DEGENERATE)
    f0 = f0_of_lambda(a, dl, lam)
    B0 = -(2.0 * f0 / (a * s)) * (ad - lam) * math.exp(f0 * s)
    if lam <= lstar:
        regime = Regime.PRIOR
    elif lam <= ldag:
        regime = Regime.OPEN
    else:
        regime = Regime.NEW
    return DerivedConstants(f0, lstar, ldag, B0, s, ad, regime)


def _require_defined(p: ModelParams) -> DerivedConstants:
    d = derive_constants(p)
    if d.f0 is None:
        raise DomainError("expression undefined for lambda >= alpha*delta")
    return d


def rho(x, p: ModelParams):
    """Quadratic whose positive root is the no-fuel stopping boundary f0."""
    ad = p.alpha * p.delta
    if p.lam >= ad:
        raise DomainError("rho requires lambda < alpha*delta")
    return x * x + 2.0 * x / p.sqrt2a - (p.lam / p.alpha) / (ad - p.lam)


def psi(x, p: ModelParams):
    return np.exp(2.0 * p.sqrt2a * np.asarray(x, dtype=float))


def psi_inv(y, p: ModelParams):
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise DomainError("psi_inv requires y > 0")
    return np.log(y) / (2.0 * p.sqrt2a)


def _scalar(v):
    return float(v) if np.ndim(v) == 0 else v


# -- obstacles in the natural scale -----------------------------------------

def h_l(x, p: ModelParams):
    x = np.asarray(x, dtype=float)
    return _scalar((p.delta - p.lam / p.alpha) * x * x - p.lam / p.alpha**2)


def h_l_x(x, p: ModelParams):
    return _scalar(2.0 * (p.delta - p.lam / p.alpha) * np.asarray(x, dtype=float))


def h_r1(x, c, p: ModelParams):
    x = np.asarray(x, dtype=float)
    return _scalar(p.delta * c * (c - 2.0 * x) + (p.delta - p.lam / p.alpha) * x * x
                   + c - p.lam / p.alpha**2)


def h_r1_x(x, c, p: ModelParams):
    x = np.asarray(x, dtype=float)
    return _scalar(-2.0 * p.delta * c + 2.0 * (p.delta - p.lam / p.alpha) * x)


def h_r2(x, c, p: ModelParams):
    d = _require_defined(p)
    x = np.asarray(x, dtype=float)
    return _scalar((p.lam / p.alpha) * c * (c - 2.0 * x) + c
                   + d.B0 * np.exp(-(x - c) * d.sqrt2a))


def h_r2_x(x, c, p: ModelParams):
    d = _require_defined(p)
    x = np.asarray(x, dtype=float)
    return _scalar(-2.0 * (p.lam / p.alpha) * c - d.sqrt2a * d.B0 * np.exp(-(x - c) * d.sqrt2a))


def x_c(c, p: ModelParams) -> float:
    return 1.0 / (2.0 * p.delta) + 0.5 * c


def _check_fuel(c):
    if c < 0:
        raise DomainError(f"fuel level must be non-negative, got {c!r}")


def h_r(x, c, p: ModelParams):
    _check_fuel(c)
    d = _require_defined(p)
    x = np.asarray(x, dtype=float)
    brk = d.f0 + c
    return _scalar(np.where(x <= brk, h_r1(x, c, p), h_r2(np.maximum(x, brk), c, p)))


def h_r_x(x, c, p: ModelParams):
    _check_fuel(c)
    d = _require_defined(p)
    x = np.asarray(x, dtype=float)
    brk = d.f0 + c
    return _scalar(np.where(x <= brk, h_r1_x(x, c, p), h_r2_x(np.maximum(x, brk), c, p)))


def obstacle_h(x, c, p: ModelParams):
    """Three-piece obstacle: h_l left of x_c, then h_r1 up to f0 + c, then h_r2."""
    _check_fuel(c)
    d = _require_defined(p)
    x = np.asarray(x, dtype=float)
    xc, brk = x_c(c, p), d.f0 + c
    out = np.where(x <= xc, h_l(x, p), h_r1(x, c, p))
    out = np.where(x >= brk, h_r2(np.maximum(x, brk), c, p), out)
    return _scalar(out)


def obstacle_h_x(x, c, p: ModelParams):
    _check_fuel(c)
    d = _require_defined(p)
    x = np.asarray(x, dtype=float)
    xc, brk = x_c(c, p), d.f0 + c
    out = np.where(x <= xc, h_l_x(x, p), h_r1_x(x, c, p))
    out = np.where(x >= brk, h_r2_x(np.maximum(x, brk), c, p), out)
    return _scalar(out)


def generator_h_l(x, p: ModelParams):
    """``(L - alpha) h_l``; its sign is the convexity sign of H_l."""
    x = np.asarray(x, dtype=float)
    return _scalar(p.delta - (p.alpha * p.delta - p.lam) * x * x)


def generator_h_r1(x, c, p: ModelParams):
    x = np.asarray(x, dtype=float)
    return _scalar(p.delta - (p.alpha * p.delta - p.lam) * x * x
                   + c * p.alpha * (p.delta * (2.0 * x - c) - 1.0))


def generator_h_r2(x, c, p: ModelParams):
    x = np.asarray(x, dtype=float)
    return _scalar(c * (p.lam * (2.0 * x - c) - p.alpha))


# -- transformed scale --------------------------------------------------------
# For h(x) and y = Psi(x):  H = e^{sx} h,  dH/dy = e^{-sx} (h' + s h) / (2s),
# intercept H - y dH/dy = e^{sx} (s h - h') / (2s).

def _transform(x, h, hx, s):
    e = np.exp(s * x)
    return h * e, (hx + s * h) / (2.0 * s * e), e * (s * h - hx) / (2.0 * s)


def H_l(y, p: ModelParams):
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise DomainError("transformed obstacle requires y > 0")
    ly = np.log(y)
    return _scalar(np.sqrt(y) * (-p.lam / p.alpha**2
                                 + (p.delta - p.lam / p.alpha) / (8.0 * p.alpha) * ly * ly))


def H_l_y(y, p: ModelParams):
    x = psi_inv(y, p)
    return _scalar(_transform(x, h_l(x, p), h_l_x(x, p), p.sqrt2a)[1])


def H_r(y, c, p: ModelParams):
    x = psi_inv(y, p)
    return _scalar(np.exp(p.sqrt2a * x) * h_r(x, c, p))


def H_r_y(y, c, p: ModelParams):
    x = psi_inv(y, p)
    return _scalar(_transform(x, h_r(x, c, p), h_r_x(x, c, p), p.sqrt2a)[1])


def transformed_H(y, c, p: ModelParams):
    """H(y; c) = e^{sx} h(x; c) with x = Psi^{-1}(y); equals min(H_l, H_r)."""
    x = psi_inv(y, p)
    return _scalar(np.exp(p.sqrt2a * x) * obstacle_h(x, c, p))


def transformed_H_y(y, c, p: ModelParams):
    """dH/dy; at y = y_c the right (H_r) derivative is returned."""
    x = psi_inv(y, p)
    xc = x_c(c, p)
    hx = np.where(x < xc, h_l_x(x, p), obstacle_h_x(x, c, p))
    return _scalar(_transform(x, obstacle_h(x, c, p), hx, p.sqrt2a)[1])


def inflection_xv(c: float, p: ModelParams):
    """Inflection point of H_r1: the smaller root of ``(L - alpha) h_r1``.

    Returns ``(x_v, y_v)`` with ``y_v = max(Psi(x_c), Psi(x_v))``.
    """
    if c <= 0:
        raise DomainError("inflection_xv requires c > 0")
    a = -(p.alpha * p.delta - p.lam)
    b = 2.0 * p.alpha * p.delta * c
    k = p.delta - p.alpha * p.delta * c * c - p.alpha * c
    disc = b * b - 4.0 * a * k
    if disc < 0 or a >= 0:
        raise FiniteFuelError("(L - alpha) h_r1 has no real root")
    sq = math.sqrt(disc)
    # a < 0: the smaller root is (-b + sq) / (2a); use the cancellation-free form
    if b >= 0:
        x_big = (-b - sq) / (2.0 * a)
        xv = k / (a * x_big) if x_big != 0 else (-b + sq) / (2.0 * a)
    else:
        xv = (-b + sq) / (2.0 * a)
    yv = max(float(psi(x_c(c, p), p)), float(psi(xv, p)))
    return xv, yv


def tangent_at(y: float, c: float, p: ModelParams) -> TangentLine:
    """Line tangent to H(.; c) at y (the H_r tangent at y = y_c)."""
    x = float(psi_inv(y, p))
    xc = x_c(c, p)
    if x < xc:
        h, hx = h_l(x, p), h_l_x(x, p)
    else:
        h, hx = obstacle_h(x, c, p), obstacle_h_x(x, c, p)
    _, slope, icpt = _transform(x, h, hx, p.sqrt2a)
    return TangentLine(float(slope), float(icpt))


def intercept(y: float, c: float, p: ModelParams) -> float:
    return tangent_at(y, c, p).intercept


_GOLD = (math.sqrt(5.0) - 1.0) / 2.0


def _H_l_yy(z, p):
    # d2H_l/dy2 = h1'(x) / (2 s y),  h1 = dH_l/dy expressed in x
    s = p.sqrt2a
    x = math.log(z) / (2.0 * s)
    k = (p.alpha * p.delta - p.lam) / (2.0 * p.alpha)
    r = rho(x, p)
    dr = 2.0 * x + 2.0 / s
    return k * math.exp(-x * s) * (dr - s * r) / (2.0 * s * z)


def p_r_distance(y: float, c: float, p: ModelParams, iterations: int = 80):
    """sup over z in [1, y_c] of (tangent at y) - H_l, with the maximiser.

    The difference is concave on [1, y_c]; golden-section search followed by
    one Newton step on its derivative.
    """
    line = tangent_at(y, c, p)
    yc = float(psi(x_c(c, p), p))

    def a(z):
        return line(z) - float(H_l(z, p))

    lo, hi = 1.0, yc
    z1 = hi - _GOLD * (hi - lo)
    z2 = lo + _GOLD * (hi - lo)
    a1, a2 = a(z1), a(z2)
    for _ in range(iterations):
        if a1 < a2:
            lo, z1, a1 = z1, z2, a2
            z2 = lo + _GOLD * (hi - lo)
            a2 = a(z2)
        else:
            hi, z2, a2 = z2, z1, a1
            z1 = hi - _GOLD * (hi - lo)
            a1 = a(z1)
    z = 0.5 * (lo + hi)
    best_z, best = z, a(z)
    curv = _H_l_yy(z, p)
    if curv > 0:
        zn = min(max(z + (line.slope - float(H_l_y(z, p))) / curv, 1.0), yc)
        an = a(zn)
        if an > best:
            best_z, best = zn, an
    for zend in (1.0, yc):
        ae = a(zend)
        if ae > best:
            best_z, best = zend, ae
    return best, best_z

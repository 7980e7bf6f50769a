import numpy as np
import pytest

from finitefuel import BreakpointError, ValidationError, derive_constants, solve_boundary
from finitefuel import value as vf
from finitefuel.model import psi, H_l


def test_v_tilde_midpoint_golden(bp02, p):
    x0 = 0.5 * (bp02.F + bp02.G)
    assert vf.v_tilde(x0, bp02, p) == pytest.approx(0.2600002987329774, abs=1e-13)


def test_even(bp02, p):
    x = np.linspace(0, 4, 17)
    assert np.array_equal(vf.v_tilde(-x, bp02, p), vf.v_tilde(x, bp02, p))
    assert np.allclose(vf.v_tilde_x(-x, bp02, p), -vf.v_tilde_x(x, bp02, p))


def test_no_fuel_value(p):
    d = derive_constants(p)
    x = np.array([0.3, d.f0, d.f0 + 0.7])
    v = vf.v0_tilde(x, p)
    assert v[0] == pytest.approx(p.delta * 0.09)
    # C^1 across f0
    s = 1e-7
    left = vf.v0_tilde(d.f0 - s, p)
    right = vf.v0_tilde(d.f0 + s, p)
    assert abs(left - right) < 1e-6
    assert vf.v0_tilde_x(d.f0 - 1e-12, p) == pytest.approx(vf.v0_tilde_x(d.f0 + 1e-12, p), abs=1e-9)


def test_w0_flat_after_f0(p):
    d = derive_constants(p)
    yf = float(psi(d.f0, p))
    assert vf.w0(yf * 2, p) == pytest.approx(d.B0)
    assert vf.w0(2.0, p) == pytest.approx(H_l(2.0, p))


def test_smooth_fit(bp02, p):
    for b in (bp02.F, bp02.G):
        lo, hi = b * (1 - 1e-12), b * (1 + 1e-12)
        assert abs(vf.v_tilde(lo, bp02, p) - vf.v_tilde(hi, bp02, p)) < 1e-9
        assert abs(vf.v_tilde_x(lo, bp02, p) - vf.v_tilde_x(hi, bp02, p)) < 1e-9


def test_variational_inequalities(bp02, p):
    xs = np.linspace(0.001, 5.0, 3001)
    xs = xs[(xs != bp02.F) & (xs != bp02.G)]
    assert np.all(vf.v_tilde(xs, bp02, p) <= p.delta * xs**2 + 1e-12)
    assert np.all(vf.u_field(xs, bp02, p) <= 1.0 + 1e-12)
    assert np.all(vf.r_field_direct(xs, bp02, p) >= -1e-10)


def test_u_routes_agree(bp02, p):
    a = np.array(vf.u_coefficients(bp02, p))
    b = np.array(vf.u_coefficients_from_derivatives(bp02, p))
    assert np.allclose(a, b, rtol=1e-9, atol=1e-12)


def test_u_is_vx_plus_vc(p):
    # finite difference in c at fixed x inside the continuation region
    c, h = 0.05, 1e-6
    bp = solve_boundary(c, p)
    x = 0.5 * (bp.F + bp.G)
    vc = (vf.v_tilde(x, solve_boundary(c + h, p), p) - vf.v_tilde(x, solve_boundary(c - h, p), p)) / (2 * h)
    assert vf.u_field(x, bp, p) == pytest.approx(vf.v_tilde_x(x, bp, p) + vc, abs=1e-6)


def test_r_closed_form_matches_direct(bp02, p):
    xs = np.array([0.2, 0.51, 1.0, 3.0, 4.5])
    assert np.allclose(vf.r_field(xs, bp02, p), vf.r_field_direct(xs, bp02, p), atol=1e-10)
    with pytest.raises(BreakpointError):
        vf.r_field(bp02.F, bp02, p)


def test_W_is_minorant(bp02, p):
    from finitefuel.model import transformed_H
    y = np.geomspace(1.0, float(psi(4.0, p)), 2000)
    w = vf.W(y, bp02, p)
    assert np.all(w <= transformed_H(y, bp02.c, p) + 1e-10)
    assert np.all(w <= 1e-15)


def test_profile_regions(bp02, p):
    xs = np.array([0.1, 0.5 * (bp02.F + bp02.G), 1.0])
    prof = vf.value_profile(bp02, p, xs)
    assert prof.region == ["stop", "continue", "act"]
    assert prof.v[0] == pytest.approx(prof.obstacle[0])
    with pytest.raises(Exception):
        vf.value_profile(bp02, p, xs[::-1])


def test_invalid_point_refused(bp02, p):
    from dataclasses import replace
    bad = replace(bp02, valid=False)
    with pytest.raises(ValidationError):
        vf.v_tilde(0.5, bad, p)

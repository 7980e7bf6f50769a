import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from finitefuel import (DomainError, ModelParams, RegimeError,
                        boundary_table, derive_constants, find_c0, find_c2, solve_boundary)
from finitefuel import boundary as bd

C0 = 0.19112217910766605


def test_solve_boundary_golden(bp02):
    assert bp02.F == pytest.approx(0.49973731397219184, abs=1e-12)
    assert bp02.G == pytest.approx(0.5202685995680749, abs=1e-12)
    assert bp02.A == pytest.approx(-0.19837425592708718, abs=1e-12)
    assert bp02.B == pytest.approx(-0.9586377620603622, abs=1e-12)
    assert bp02.G_prime == pytest.approx(1.0139427433183519, abs=1e-9)
    assert bp02.valid and all(bp02.flags.values())


def test_common_tangent(bp02, p):
    # same slope and intercept as tangent to H_l at Psi(F) and to H_r1 at Psi(G)
    assert abs(bd.h1(bp02.F, p) - bp02.A) < 1e-10
    assert abs(bd.h2(bp02.F, p) - bp02.B) < 1e-10
    assert abs(bd.H3t(bp02.G, bp02.c, p) - bp02.A) < 1e-10
    assert abs(bd.H4t(bp02.G, bp02.c, p) - bp02.B) < 1e-10


def test_small_fuel_near_half(p):
    bp = solve_boundary(1e-3, p)
    assert abs(bp.F - 0.5) < 0.05 and abs(bp.G - 0.5) < 0.05
    assert bp.F < 0.5 < bp.G


def test_c0_and_c2(p):
    c0 = find_c0(p)
    assert c0.value == pytest.approx(C0, abs=1e-8)
    assert not c0.truncated
    c2 = find_c2(p)
    # no crossing below the scan ceiling: infinite sentinel
    assert c2.truncated and c2.value == float("inf")


def test_gprime_crosses_one_at_c0(p):
    below = solve_boundary(0.99 * C0, p)
    assert below.G_prime > 1.0
    bp = solve_boundary(C0, p, audit=False)
    assert abs(bp.G_prime - 1.0) < 1e-6


@pytest.mark.parametrize("lam", [0.3, 0.55, 1.2])
def test_regime_refused(lam):
    with pytest.raises(RegimeError) as info:
        solve_boundary(0.02, ModelParams(1.0, 1.0, lam))
    assert info.value.regime.value in str(info.value)


def test_bad_fuel(p):
    with pytest.raises(DomainError):
        solve_boundary(0.0, p)
    with pytest.raises(DomainError):
        solve_boundary(-0.1, p)


def test_h1_inverse(p):
    lo, hi = bd.h1_inv_domain(p)
    g = np.linspace(lo, hi, 9)
    z = bd.h1_inv(g, p)
    assert np.allclose(bd.h1(z, p), g, atol=1e-13)
    assert bd.h1_inv(float(g[3]), p) == pytest.approx(z[3], abs=1e-12)
    with pytest.raises(DomainError):
        bd.h1_inv(hi + 1.0, p)


def test_q_forms_agree(p):
    rng = np.random.default_rng(3)
    x, z = rng.uniform(0, 3, 200), rng.uniform(0, 2, 200)
    assert np.allclose(bd.q(x, z, p), bd.q_expanded(x, z, p), rtol=1e-12, atol=1e-12)


def test_q_x_matches_fd(p):
    s = 1e-6
    for x, z in [(0.5, 0.4), (1.2, 0.3), (2.0, 1.0)]:
        fd = (bd.q(x + s, z, p) - bd.q(x - s, z, p)) / (2 * s)
        assert bd.q_x(x, z, p) == pytest.approx(fd, rel=1e-6, abs=1e-8)


def test_L_vec_matches_scalar(p):
    c = 0.05
    xs = np.linspace(0.52, derive_constants(p).f0 + c - 0.01, 25)
    vec = bd.L_vec(xs, c, p)
    ok = ~np.isnan(vec)
    assert ok.sum() > 5
    for x, v in zip(xs[ok], vec[ok]):
        assert v == pytest.approx(bd.L(float(x), c, p), abs=1e-12)


def test_L_diag_at_G_is_q(bp02, p):
    assert bd.L_diag(bp02.G, bp02.c, p) == pytest.approx(float(bd.q(bp02.G, bp02.F, p)), abs=1e-10)


def test_gprime_formula(bp02, p):
    expect = 1.0 - float(bd.q(bp02.G, bp02.F, p)) / bd.L_x(bp02.G, bp02.c, p)
    assert bp02.G_prime == pytest.approx(expect, rel=1e-12)


def test_tangent_audit_detects_crossing(bp02, p):
    worst, _ = bd.tangent_audit(bp02.A, bp02.B, bp02.c, p)
    assert worst < 1e-9
    # a line lifted above the obstacle must be flagged
    worst_up, _ = bd.tangent_audit(bp02.A, bp02.B + 0.01, bp02.c, p)
    assert worst_up > 1e-3


@settings(max_examples=25, deadline=None)
@given(st.floats(1e-3, 0.9 * C0), st.floats(1e-3, 0.9 * C0))
def test_monotone_pairs(c1, c2):
    if abs(c1 - c2) < 1e-6:
        return
    p = ModelParams(1.0, 1.0, 0.9)
    lo, hi = sorted((c1, c2))
    a, b = solve_boundary(lo, p), solve_boundary(hi, p)
    assert b.F < a.F and b.G > a.G
    assert a.G_prime > 1 and b.G_prime > 1


def test_boundary_table(p):
    t = boundary_table([0.01, 0.05, 0.1], p, c0=C0)
    assert np.all(np.diff(t.column("F")) < 0)
    assert np.all(np.diff(t.column("G")) > 0)
    with pytest.raises(DomainError):
        boundary_table([0.1, 0.05], p)


@pytest.mark.parametrize("params", [(2.0, 0.5, 0.9), (0.5, 3.0, 1.4), (1.5, 1.0, 1.3)])
def test_other_parameters(params):
    p = ModelParams(*params)
    assert derive_constants(p).regime.value == "new"
    c0 = find_c0(p).value
    assert c0 > 0
    half = 1.0 / (2.0 * p.delta)
    for c in (0.1 * c0, 0.5 * c0):
        bp = solve_boundary(c, p)
        assert bp.F < half < bp.G
        assert bp.G_prime > 1

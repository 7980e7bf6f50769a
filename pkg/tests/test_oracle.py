import numpy as np
import pytest

from finitefuel import (ConvergenceError, DomainError, ResolutionError, derive_constants,
                        minorant_oracle, psor_oracle, solve_boundary)
from finitefuel.oracle import lower_hull
from finitefuel.value import v_stop, running_cost_shift, v0_tilde


def test_lower_hull_square():
    y = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
    v = np.array([0.0, -1.0, 0.5, -1.0, 0.0])
    assert lower_hull(y, v).tolist() == [0, 1, 3, 4]


def test_minorant_golden(golden, p):
    for g in golden["minorant"]:
        r = minorant_oracle(g["c"], p, n_points=g["n_points"])
        assert r.i_left == g["i_left"]
        assert r.i_right == g["i_right"]
        assert r.slope == pytest.approx(g["slope"], abs=1e-13)
        assert r.intercept == pytest.approx(g["intercept"], abs=1e-12)


def test_minorant_no_fuel_contact_is_f0(p):
    r = minorant_oracle(0.0, p, n_points=100_000)
    assert abs(r.x_grid[r.i_left] - derive_constants(p).f0) <= 2 * r.dx
    assert r.slope == 0.0


def test_minorant_contacts_match_solver(p):
    bp = solve_boundary(0.05, p)
    r = minorant_oracle(0.05, p, n_points=200_000)
    assert abs(r.x_grid[r.i_left] - bp.F) <= 2 * r.dx
    assert abs(r.x_grid[r.i_right] - bp.G) <= 2 * r.dx
    assert r.slope == pytest.approx(bp.A, rel=1e-5)
    assert np.all(r.w <= 0)


def test_minorant_resolution_errors(p):
    with pytest.raises(ResolutionError):
        minorant_oracle(0.05, p, n_points=1000)
    with pytest.raises(DomainError):
        minorant_oracle(-0.1, p)
    with pytest.raises(DomainError):
        minorant_oracle(0.05, p, x_max=1.0)


def test_psor_golden(golden, p):
    for g in golden["psor"]:
        r = psor_oracle(g["c"], p, n_nodes=g["n_nodes"])
        cont = np.flatnonzero(~r.stop_mask)
        assert cont[0] == g["continuation_first"] and cont[-1] == g["continuation_last"]
        assert np.allclose(r.v[g["probe_index"]], g["probe_v"], atol=1e-12)


def test_psor_methods_agree(p):
    # small grid, moderate fuel so the continuation block spans many nodes
    a = psor_oracle(0.1, p, n_nodes=601, method="psor", omega=1.9, tol=1e-12)
    b = psor_oracle(0.1, p, n_nodes=601, method="policy", tol=1e-12)
    assert (~a.stop_mask).sum() > 10
    assert a.psor_sweeps > 10
    assert np.max(np.abs(a.v - b.v)) < 1e-9
    assert np.array_equal(a.stop_mask, b.stop_mask)


def test_psor_second_order_error(p):
    bp = solve_boundary(0.1, p)
    r = psor_oracle(0.1, p, n_nodes=20001)
    err = np.max(np.abs(r.v - v_stop(r.x_grid, bp, p)))
    assert err < 0.5 * r.h**2
    cont = r.x_grid[~r.stop_mask]
    assert abs(cont.min() - bp.F) <= 2 * r.h
    assert abs(cont.max() - bp.G) <= 2 * r.h
    assert r.residual < 1e-12


def test_psor_no_fuel(p):
    r = psor_oracle(0.0, p, n_nodes=8001)
    exact = v0_tilde(r.x_grid, p) - running_cost_shift(r.x_grid, p)
    assert np.max(np.abs(r.v - exact)) < 1e-5


def test_psor_budget(p):
    with pytest.raises(ConvergenceError):
        psor_oracle(0.1, p, n_nodes=2001, method="psor", max_iter=3)


@pytest.mark.parametrize("kw", [dict(omega=2.0), dict(method="jacobi"), dict(n_nodes=2),
                                dict(x_max=2.0)])
def test_psor_argument_checks(p, kw):
    with pytest.raises(DomainError):
        psor_oracle(0.1, p, **kw)


def test_minorant_invariant_to_wider_domain(p):
    d = derive_constants(p)
    c = 0.05
    a = minorant_oracle(c, p, n_points=200_000)
    # same spacing on twice the extra width beyond f0 + c + 1
    x_max = 2 * (d.f0 + c + 1.0)
    b = minorant_oracle(c, p, n_points=int(round(x_max / a.dx)) + 1, x_max=x_max)
    assert abs(a.x_grid[a.i_left] - b.x_grid[b.i_left]) <= a.dx + 1e-12
    assert abs(a.x_grid[a.i_right] - b.x_grid[b.i_right]) <= a.dx + 1e-12


def test_psor_monotone_in_obstacle(p):
    from finitefuel.oracle import lcp_obstacle
    c = 0.1
    base = psor_oracle(c, p, n_nodes=2001)
    bump = lambda x: lcp_obstacle(x, c, p) - 0.01 * np.exp(-((x - 1.5) / 0.3) ** 2)
    low = psor_oracle(c, p, n_nodes=2001, obstacle=bump)
    assert np.all(low.v <= base.v + 1e-12)
    assert np.any(low.v < base.v - 1e-4)

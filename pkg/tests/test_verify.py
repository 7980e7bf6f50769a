import pytest

from finitefuel import ModelParams, RegimeError, VerifyConfig, run_suite
from finitefuel import verify as ver
from finitefuel.boundary import solve_boundary

C0 = 0.19112217910766605

PER_C = {"smooth_fit_F", "smooth_fit_G", "tangent_below_obstacle", "W_convex",
         "W_nonpositive", "V_leq_obstacle", "U_leq_1", "U_boundary_values", "R_nonneg",
         "complementarity", "F_monotone", "G_monotone", "Gprime_gt_1",
         "oracle_minorant_match", "oracle_psor_match"}
GLOBAL = {"c0_positive", "boundary_limits_c_to_0", "identity_hall1", "identity_hall2",
          "identity_lx", "identity_lxlc_q", "q_display_equivalence"}

FAST = VerifyConfig(minorant_points=50_000, psor_nodes=4000)


@pytest.fixture(scope="module")
def reports(p):
    return run_suite(p, [0.01, 0.05, 0.12], FAST, c0=C0)


def test_all_pass(reports):
    failed = [(r.name, r.worst_violation, r.reason) for r in reports if not r.passed]
    assert not failed


def test_named_checks_present(reports):
    names = {r.name for r in reports}
    assert PER_C | GLOBAL <= names
    assert [r.name for r in reports] == sorted(names)


def test_empty_c_list_runs_global_only(p):
    names = {r.name for r in run_suite(p, [], FAST, c0=C0)}
    assert GLOBAL <= names
    assert not names & PER_C


def test_deterministic(p):
    a = run_suite(p, [0.05], FAST, c0=C0)
    b = run_suite(p, [0.05], FAST, c0=C0)
    assert [r.to_dict() for r in a] == [r.to_dict() for r in b]


@pytest.mark.parametrize("lam", [0.3, 0.55, 1.2])
def test_refuses_other_regimes(lam):
    with pytest.raises(RegimeError):
        run_suite(ModelParams(1.0, 1.0, lam), [0.05], FAST)


def test_fuel_beyond_c0_reported_not_raised(p):
    reps = {r.name: r for r in run_suite(p, [0.5], FAST, c0=C0)}
    assert not reps["Gprime_gt_1"].passed


def test_tol_scale_tightens(p):
    tight = VerifyConfig(minorant_points=50_000, psor_nodes=4000, tol_scale=1e-12)
    reps = {r.name: r for r in run_suite(p, [0.05], tight, c0=C0)}
    assert not reps["identity_lx"].passed
    assert reps["identity_lx"].tolerance == pytest.approx(1e-18)


def test_aligned_grids_put_boundaries_on_nodes(p):
    bp = solve_boundary(0.05, p)
    for x_min, x_max, n in ver.aligned_psor_grids(bp, p, 5000, 3):
        h = (x_max - x_min) / (n - 1)
        for b in (bp.F, bp.G):
            k = (b - x_min) / h
            assert abs(k - round(k)) < 1e-6


def test_format_table(reports):
    text = ver.format_table(reports)
    assert text.count("PASS") == len(reports)

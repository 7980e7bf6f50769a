import json

import pytest

from finitefuel import io as fio
from finitefuel.cli import main

BASE = ["--alpha", "1", "--delta", "1", "--lambda", "0.9"]


def run(capsys, argv, environ=None):
    code = main(argv, environ=environ or {})
    out = capsys.readouterr()
    return code, out.out, out.err


def test_constants_json(capsys):
    code, out, _ = run(capsys, ["constants"] + BASE)
    data = json.loads(out)
    assert code == 0
    assert data["regime"] == "new"
    assert data["f0"] == pytest.approx(2.375100220297941, abs=1e-12)
    assert set(data) == {"alpha", "delta", "lambda", "f0", "lambda_star", "lambda_dagger",
                         "b0", "regime"}


def test_boundaries_csv_auto(capsys):
    code, out, _ = run(capsys, ["boundaries"] + BASE + ["--c-steps", "64", "--format", "csv"])
    lines = out.strip().splitlines()
    assert code == 0
    assert lines[0] == "c,F,G,A,B,G_prime"
    assert len(lines) == 65
    c_last = float(lines[-1].split(",")[0])
    assert c_last == pytest.approx(0.95 * 0.19112217910766605, rel=1e-8)


def test_csv_roundtrip_is_stable(capsys):
    _, out, _ = run(capsys, ["boundaries"] + BASE + ["--c-steps", "5", "--format", "csv"])
    header, rows = fio.read_csv(out)
    assert fio.to_csv(header, rows) == out


def test_boundaries_json(capsys, tmp_path):
    path = tmp_path / "b.json"
    code, _, _ = run(capsys, ["boundaries"] + BASE + ["--c-steps", "4", "--c-max", "0.1",
                                                      "--format", "json", "--out", str(path)])
    data = json.loads(path.read_text())
    assert code == 0
    assert data["c0"] == pytest.approx(0.19112217910766605, abs=1e-8)
    assert len(data["points"]) == 4 and data["points"][-1]["c"] == 0.1


def test_value_csv(capsys):
    code, out, _ = run(capsys, ["value"] + BASE + ["--c", "0.02", "--x-steps", "11"])
    assert code == 0
    assert out.splitlines()[0] == "x,v_tilde,v,obstacle,region"
    assert len(out.strip().splitlines()) == 12


def test_verify_open_regime_exit_1(capsys):
    code, _, err = run(capsys, ["verify", "--alpha", "1", "--delta", "1", "--lambda", "0.55"])
    assert code == 1
    assert "open" in err and "lambda*" in err and "lambda_dagger" in err


def test_verify_json(capsys):
    code, out, _ = run(capsys, ["verify"] + BASE + ["--c-list", "0.05", "--format", "json"])
    data = json.loads(out)
    assert code == 0
    assert all(r["passed"] for r in data)


def test_oracle_outputs(capsys):
    code, out, _ = run(capsys, ["oracle"] + BASE + ["--kind", "psor", "--c", "0.1", "--n", "2001"])
    assert code == 0 and out.startswith("x,v,stop\n")
    code, out, _ = run(capsys, ["oracle"] + BASE + ["--kind", "minorant", "--c", "0.1",
                                                    "--n", "20000", "--format", "json"])
    assert code == 0 and json.loads(out)["n_points"] == 20000


def test_simulate_seeded(capsys):
    argv = ["simulate"] + BASE + ["--c", "0.02", "--paths", "2000", "--seed", "3"]
    _, a, _ = run(capsys, argv)
    _, b, _ = run(capsys, argv + ["--threads", "2"])
    assert a == b
    assert set(json.loads(a)) == set(fio.SIM_KEYS)


def test_env_override(capsys):
    env = {"FINITEFUEL_ALPHA": "1", "FINITEFUEL_DELTA": "1", "FINITEFUEL_LAMBDA": "0.9"}
    code, out, _ = run(capsys, ["constants"], environ=env)
    assert code == 0 and json.loads(out)["lambda"] == 0.9


@pytest.mark.parametrize("argv", [["constants"], ["nope"] + BASE, ["constants"] + BASE + ["--bogus"],
                                  ["oracle"] + BASE + ["--kind", "other", "--c", "0.1"],
                                  ["constants"] + BASE + ["--threads", "0"]])
def test_usage_errors(capsys, argv):
    code, _, _ = run(capsys, argv)
    assert code == 2


def test_bad_fuel_level_exit_1(capsys):
    code, _, err = run(capsys, ["value"] + BASE + ["--c", "-1"])
    assert code == 1 and "error" in err

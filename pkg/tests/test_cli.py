import csv
import json

import pytest

from boundstate_lab.cli import main, parse_config, run


def _json(capsys):
    return json.loads(capsys.readouterr().out)


def test_emit(capsys):
    code, _ = run(["emit", "--from", "2p", "--to", "1s"])
    out = _json(capsys)
    assert code == 0
    assert out["rate_per_s"] == pytest.approx(6.27e8, rel=5e-3)
    assert out["reference"]


def test_emit_uphill_is_validation_error(capsys):
    assert main(["emit", "--from", "1s", "--to", "2p"]) == 2
    assert "error" in capsys.readouterr().err


def test_wick_check(capsys):
    code, _ = run(["wick-check", "psi1(x) psi1+(y)", "--positions", "x=1,y=1"])
    out = _json(capsys)
    assert code == 0
    assert out["diagrams"] == 1
    assert out["list"][0]["kernel"] == "delta(x-y)"


def test_wick_check_parse_error(capsys):
    assert main(["wick-check", "psi7(x)"]) == 2


def test_levels_and_csv(tmp_path, capsys):
    path = tmp_path / "levels.csv"
    code, _ = run(["levels", "--nmax", "2", "--lmax", "1", "--csv", str(path)])
    out = _json(capsys)
    assert code == 0 and len(out["states"]) == 3
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["n", "l", "m", "energy_Ha"]
    assert len(rows) == 1 + 1 + 1 + 3  # header, 1s, 2s, three 2p sublevels


def test_deterministic_output(capsys):
    argv = ["dipole", "--nmax", "2"]
    run(argv)
    first = capsys.readouterr().out
    run(argv)
    assert capsys.readouterr().out == first


def test_out_file(tmp_path, capsys):
    path = tmp_path / "r.json"
    run(["wick-check", "psi1(x) psi1+(y)", "--out", str(path)])
    assert capsys.readouterr().out == ""
    assert json.loads(path.read_text())["diagrams"] == 1


def test_coarse_grid_fails_with_tolerance_code(capsys):
    code, _ = run(["levels", "--nmax", "3", "--set", "grid.n_points=150", "--set", "levels.tolerance=1e-8"])
    assert code == 3


def test_unknown_config_key(capsys):
    assert main(["levels", "--set", "grid.bogus=1"]) == 2


def test_config_file(tmp_path, capsys):
    path = tmp_path / "run.cfg"
    path.write_text("# comment\nmodel.m2 = 1.0\n\ngrid.n_points = 3000\n")
    cfg = parse_config(path.read_text())
    assert cfg["model.m2"] == 1.0 and cfg["grid.n_points"] == 3000
    code, _ = run(["levels", "--nmax", "1", "--lmax", "0", "--config", str(path)])
    out = _json(capsys)
    # positronium-like reduced mass halves the ground-state energy
    assert out["states"][0]["energy_Ha"] == pytest.approx(-0.25, rel=1e-4)


@pytest.mark.parametrize("text", ["no equals sign", "grid.n_points = 1.5", "grid.n_points = -3"])
def test_config_rejects(text):
    with pytest.raises(Exception):
        parse_config(text)


def test_verify_all_subset_json(capsys):
    code, _ = run(["verify-all", "--only", "6,10", "--json"])
    out = _json(capsys)
    assert code == 0
    assert out["pass"] is True
    assert sorted(c["criterion"] for c in out["checks"]) == [6, 10]

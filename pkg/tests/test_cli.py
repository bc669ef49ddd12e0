import json

import numpy as np
import pytest

from hemiray import cli, io


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_floats():
    assert cli.floats("0, 0.05,0.1") == [0.0, 0.05, 0.1]
    with pytest.raises(Exception):
        cli.floats(",")
    with pytest.raises(Exception):
        cli.floats("a,b")


def test_usage_errors(tmp_path):
    for argv in (["validate", "--lambda", ""], ["nope"], ["validate", "--grid", "2"],
                 ["validate", "--only", "other"]):
        with pytest.raises(SystemExit) as info:
            cli.main(argv)
        assert info.value.code == cli.EXIT_USAGE
    assert run("forward", "--lambda", "0,0.1", "--grid", 16, "--angles", 8) == cli.EXIT_USAGE
    assert run("reconstruct", "--grid", 16) == cli.EXIT_USAGE
    assert run("sweep", "lemma", "--sigma", "1.5", "--out", tmp_path / "s.csv") == cli.EXIT_USAGE


def test_validate_selected_checks(tmp_path):
    out = tmp_path / "v.csv"
    assert run("validate", "--only", "quasimode-norm", "--grid", 64, "--out", out) == cli.EXIT_OK
    header, rows = io.read_rows(out)
    assert header == ["check", "value", "tol", "status"]
    assert [r[0] for r in rows] == ["quasimode-norm"] and rows[0][3] == "pass"


def test_validate_coarse_fails(tmp_path, capsys):
    out = tmp_path / "v.csv"
    assert run("validate", "--only", "measure", "--grid", 16, "--out", out) == cli.EXIT_FAIL
    assert "measure" in capsys.readouterr().err


def test_roundtrip_diverges(tmp_path):
    assert run("roundtrip", "--lambda", 5, "--grid", 32, "--angles", 16) == cli.EXIT_DIVERGED


def test_forward_then_reconstruct(tmp_path):
    data = tmp_path / "f.csv"
    assert run("forward", "--lambda", 0.05, "--angles", 32, "--out", data) == cli.EXIT_OK
    out = tmp_path / "h.csv"
    assert run("reconstruct", "--input", data, "--grid", 64, "--angles", 32, "--out", out) == cli.EXIT_OK
    g = io.read_plane_field(out.with_suffix(".json"))
    assert g.values.shape == (64, 64) and np.all(np.isfinite(g.values))
    report = json.loads((tmp_path / "h_report.json").read_text())
    assert report["iterations"] >= 1


def test_sweep_lemma_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("sweep", "lemma", "--sigma", "0.5", "--out", a) == cli.EXIT_OK
    assert run("sweep", "lemma", "--sigma", "0.5", "--out", b) == cli.EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    header, rows = io.read_rows(a)
    assert header[:2] == ["M", "sigma"] and len(rows) >= 4


def test_config_defaults(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"grid": 16, "only": ["measure"]}))
    assert run("validate", "--config", cfg, "--out", tmp_path / "v.csv") == cli.EXIT_FAIL
    # explicit flags win over the file
    assert run("validate", "--config", cfg, "--grid", 64, "--out", tmp_path / "v.csv") == cli.EXIT_OK
    cfg.write_text(json.dumps({"gird": 16}))
    with pytest.raises(SystemExit) as info:
        run("validate", "--config", cfg)
    assert info.value.code == cli.EXIT_USAGE


def test_lemma_check_small(tmp_path):
    assert run("lemma-check", "--count", 20, "--out", tmp_path / "l.csv") == cli.EXIT_OK

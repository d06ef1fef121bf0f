import json

import numpy as np
import pytest

from roughfrac.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, EXIT_PRECONDITION, main, shipped_config
from roughfrac.config import parse_config
from roughfrac.errors import ConfigError
from roughfrac.gridio import read_grid_csv

SMALL = """
[grid]
m = 16
[params]
alpha = 0.5
s = 2
p = 3
kappa = 0.1
[kernel]
kind = table
expr = sign(cos(theta))
samples = 64
[weight]
kind = power
beta = 0.1
[functions]
count = 2
[experiment]
theorems = A, 1.2
"""


@pytest.fixture
def cfg_file(tmp_path):
    path = tmp_path / "small.ini"
    path.write_text(SMALL)
    return path


def run(*argv):
    return main([str(a) for a in argv])


def test_verify_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "v"
    assert run("verify", "--out", out) == EXIT_OK
    assert "PASS" in capsys.readouterr().out
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 0 and len(manifest["config_sha256"]) == 64
    assert set(manifest["artifacts"]) == {"identities.json"}
    assert (out / "identities.csv").exists()


def test_experiment_and_manifest(cfg_file, tmp_path):
    out = tmp_path / "e"
    assert run("experiment", "--config", cfg_file, "--out", out) == EXIT_OK
    for name in ("report_A.json", "report_1.2.json", "report_A.csv", "manifest.json"):
        assert (out / name).exists()
    body = json.loads((out / "report_1.2.json").read_text())
    assert body["experiment"] == "1.2" and "timestamp" in body


def test_experiment_bodies_deterministic(cfg_file, tmp_path):
    for d in ("a", "b"):
        run("experiment", "--config", cfg_file, "--out", tmp_path / d, "--theorem", "D")
    ma = json.loads((tmp_path / "a" / "manifest.json").read_text())["artifacts"]
    mb = json.loads((tmp_path / "b" / "manifest.json").read_text())["artifacts"]
    assert ma == mb


def test_precondition_exit(cfg_file, tmp_path):
    text = SMALL.replace("beta = 0.1", "beta = 3.0")
    bad = tmp_path / "bad.ini"
    bad.write_text(text)
    assert run("experiment", "--config", bad, "--out", tmp_path / "o", "--theorem", "1.2") == EXIT_PRECONDITION


def test_config_error_names_key(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text(SMALL.replace("kappa = 0.1", "kappa = 0.9"))
    assert run("experiment", "--config", bad, "--dry-run") == EXIT_CONFIG
    assert "params.kappa" in capsys.readouterr().err
    with pytest.raises(ConfigError, match="grid.colour"):
        parse_config("[grid]\ncolour = red\n")
    with pytest.raises(ConfigError, match="bogus"):
        parse_config("[bogus]\nx = 1\n")
    with pytest.raises(ConfigError, match="experiment.theorems"):
        parse_config("[experiment]\ntheorems = 9.9\n")


def test_dry_run_writes_nothing(cfg_file, tmp_path):
    out = tmp_path / "dry"
    assert run("experiment", "--config", cfg_file, "--out", out, "--dry-run") == EXIT_OK
    assert run("verify", "--out", out, "--dry-run") == EXIT_OK
    assert not out.exists()


def test_norms_and_weights(cfg_file, tmp_path, capsys):
    out = tmp_path / "n"
    assert run("norms", "--config", cfg_file, "--out", out, "--kind", "bmo", "--function", "log(r)") == EXIT_OK
    text = (out / "norms.csv").read_text().splitlines()
    assert text[0] == "norm_kind,value,family_id,ball" and text[1].startswith("bmo,")
    assert run("norms", "--config", cfg_file, "--out", out, "--kind", "morrey", "--function", "x") == EXIT_OK
    assert run("weights", "--config", cfg_file, "--out", out, "--kind", "apq", "--p", "1.5") == EXIT_OK
    d = json.loads((out / "weights.json").read_text())
    assert d["class"] == "A(p,q)" and d["constant"] >= 1.0
    assert run("weights", "--out", out, "--kind", "ap") == EXIT_OK
    assert "1" in capsys.readouterr().out


def test_dump_grid_round_trip(cfg_file, tmp_path):
    out = tmp_path / "d"
    assert run("dump-grid", "--config", cfg_file, "--out", out, "--function", "x*y", "--file", "g.csv") == EXIT_OK
    g = read_grid_csv(out / "g.csv")
    assert g.grid.m == 16
    X, Y = g.grid.coords()
    np.testing.assert_allclose(g.values, X * Y, rtol=1e-8)
    assert run("dump-grid", "--config", cfg_file, "--out", out, "--function", "x", "--operator", "riesz") == EXIT_OK
    assert run("dump-grid", "--config", cfg_file, "--out", out, "--function", "1", "--operator", "maximal") == EXIT_OK


def test_bad_expression_is_config_error(cfg_file, capsys):
    assert run("norms", "--config", cfg_file, "--function", "__import__('os')") == EXIT_CONFIG


def test_grid_override_and_shipped_configs():
    for name in ("default.ini", "thm12.ini", "thm13.ini", "corollary.ini"):
        cfg = parse_config(shipped_config(name), {"grid.m": 32})
        assert cfg.grid.m == 32 and len(cfg.family) > 0
    assert run("experiment", "--config", "/nonexistent.ini", "--dry-run") == EXIT_CONFIG
    assert EXIT_FAIL == 1

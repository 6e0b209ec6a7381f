import json
import math
import os
import subprocess
import sys

import pytest

from kuo_spectra.cli import main

PI2 = math.pi ** 2


def run(tmp_path, *args):
    out = tmp_path / "out"
    rc = main(list(args) + ["--out", str(out)])
    return rc, out


def test_analyze_sinus(tmp_path):
    rc, out = run(tmp_path, "analyze-profile", "--builtin", "sinus", "--beta", str(PI2 / 4))
    assert rc == 0
    rep = json.loads((out / "analyze_profile.json").read_text())
    assert rep["kappa_plus"] == {"value": pytest.approx(PI2 / 2, rel=1e-14), "source": "computed"}
    assert rep["m_beta"]["value"] == 0
    assert rep["class_K_plus"]["value"]["u_beta"] == pytest.approx(0.25)
    assert rep["provenance"]["command"] == "analyze-profile"


def test_analyze_couette_infinite(tmp_path):
    rc, out = run(tmp_path, "analyze-profile", "--builtin", "couette")
    assert rc == 0
    rep = json.loads((out / "analyze_profile.json").read_text())
    assert rep["kappa_plus"]["value"] == "+inf"


def test_malformed_config(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    rc, _ = run(tmp_path, "analyze-profile", "--profile", str(bad))
    assert rc == 2
    assert "ConfigError" in capsys.readouterr().err


def test_profile_file(tmp_path):
    cfg = tmp_path / "p.json"
    cfg.write_text(json.dumps({"kind": "polynomial", "domain": [-1, 1],
                               "coefficients": [0, 0, 1]}))
    rc, out = run(tmp_path, "analyze-profile", "--profile", str(cfg))
    assert rc == 0
    rep = json.loads((out / "analyze_profile.json").read_text())
    assert rep["kappa_plus"]["value"] == pytest.approx(2.0)


def test_eigencurve_outputs_and_determinism(tmp_path):
    args = ["eigencurve", "--builtin", "sinus", "--beta", str(PI2 / 4), "--n", "2",
            "--c", "-2 -1 -0.5 -0.1"]
    rc1, out1 = run(tmp_path / "a", *args)
    rc2, out2 = run(tmp_path / "b", *args)
    assert rc1 == rc2 == 0
    a = (out1 / "eigencurve.csv").read_bytes()
    assert a == (out2 / "eigencurve.csv").read_bytes()
    assert (out1 / "eigencurve.svg").read_bytes() == (out2 / "eigencurve.svg").read_bytes()
    rows = a.decode().splitlines()
    assert rows[0] == "c,n,lambda,h1_norm" and len(rows) == 9


def test_eigencurve_inside_range_fails(tmp_path):
    rc, _ = run(tmp_path, "eigencurve", "--builtin", "sinus", "--beta", "1", "--c", "0.5")
    assert rc == 4


def test_missing_arguments(tmp_path):
    rc, _ = run(tmp_path, "count-families", "--builtin", "sinus", "--beta", "1")
    assert rc == 2
    with pytest.raises(SystemExit):
        main(["analyze-profile", "--alpha", "1", "--period", "2"])


def test_count_families_cli(tmp_path):
    rc, out = run(tmp_path, "count-families", "--builtin", "sinus", "--beta", str(-PI2 / 2),
                  "--period", str(2 * math.pi))
    assert rc == 0
    rep = json.loads((out / "family_count.json").read_text())
    assert rep["theta"]["value"] == {"finite": 2}
    assert rep["theta_formula"] == {"value": {"finite": 2}, "source": "closed_form"}
    assert rep["region"]["value"] == "III"


def test_hardy_cli_is_deterministic(tmp_path):
    args = ["hardy", "--builtin", "sinus", "--cases", "20", "--seed", "3"]
    rc1, out1 = run(tmp_path / "a", *args)
    rc2, out2 = run(tmp_path / "b", *args)
    assert rc1 == rc2 == 0
    text = (out1 / "hardy.json").read_bytes()
    assert text == (out2 / "hardy.json").read_bytes()
    rep = json.loads(text)
    assert rep["random_cases"]["value"]["failures"] == 0
    assert rep["hardy_constant"] == {"value": 4.0, "source": "paper_constant"}


def test_sinus_regions_cli(tmp_path):
    rc, out = run(tmp_path, "sinus-regions", "--lattice", "6", "5")
    assert rc == 0
    assert (out / "sinus_regions.csv").exists() and (out / "sinus_regions.svg").exists()
    rc, _ = run(tmp_path, "sinus-regions", "--builtin", "couette")
    assert rc == 2


def test_bifurcate_cli(tmp_path):
    rc, out = run(tmp_path, "bifurcate", "--builtin", "sinus", "--beta", str(PI2 / 4),
                  "--alpha", "1", "--c0", "-0.6047348121667746", "--modes", "8", "--grid", "40")
    assert rc == 0
    rep = json.loads((out / "bifurcation.json").read_text())
    assert rep["concentration"]["value"]["monotone"] is True
    assert len(list(out.glob("state_*.svg"))) == 3


def test_thread_variable(tmp_path):
    env = dict(os.environ, KUO_SPECTRA_THREADS="lots")
    r = subprocess.run([sys.executable, "-m", "kuo_spectra.cli", "analyze-profile",
                        "--out", str(tmp_path)], env=env, capture_output=True, text=True)
    assert r.returncode == 2
    env["KUO_SPECTRA_THREADS"] = "1"
    r = subprocess.run([sys.executable, "-m", "kuo_spectra.cli", "analyze-profile",
                        "--out", str(tmp_path)], env=env, capture_output=True, text=True)
    assert r.returncode == 0
    rep = json.loads((tmp_path / "analyze_profile.json").read_text())
    assert rep["provenance"]["threads"] == 1

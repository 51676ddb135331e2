import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from greenbvp.cli import main
from greenbvp.oracle import DirichletHelmholtz1D

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def report(capsys):
    err = capsys.readouterr().err.strip().splitlines()
    return json.loads(err[-1])


def test_green_matches_oracle(tmp_path, capsys):
    out = tmp_path / "g.csv"
    assert main(["green", str(CONFIGS / "dirichlet_helmholtz.toml"), "--output", str(out)]) == 0
    rows = read_csv(out)
    assert rows[0] == ["x", "xp", "re_G", "im_G"]
    data = np.array(rows[1:], dtype=float)
    ref = DirichletHelmholtz1D(1.0)(data[:, 0], data[:, 1])
    assert np.max(np.abs(data[:, 2] + 1j * data[:, 3] - ref)) < 1e-12
    rep = report(capsys)
    assert rep["command"] == "green" and rep["outputs"] == [str(out)]
    assert rep["bc_residual_max"] < 1e-12


def test_solve_outputs_and_residuals(tmp_path, capsys):
    out, res = tmp_path / "u.csv", tmp_path / "r.csv"
    assert main(["solve", str(CONFIGS / "dirichlet_helmholtz.toml"), "--output", str(out),
                 "--residuals", str(res)]) == 0
    data = np.array(read_csv(out)[1:], dtype=float)
    x = data[:, 0]
    exact = 1.0 + (np.cos(1.0) - 1.0) / np.sin(1.0) * np.sin(x) - np.cos(x)
    assert np.max(np.abs(data[:, 1] - exact)) < 1e-12
    res_rows = read_csv(res)
    assert res_rows[0] == ["quantity", "max_abs"] and [r[0] for r in res_rows[1:]] == ["pde", "boundary_1", "boundary_2"]
    assert report(capsys)["residuals"]["boundary_residual"] < 1e-12


def test_solve_disk_and_cache_flag(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["solve", str(CONFIGS / "disk_harmonic.toml"), "--output", str(a)]) == 0
    assert main(["solve", str(CONFIGS / "disk_harmonic.toml"), "--output", str(b), "--no-cache-g"]) == 0
    da = np.array(read_csv(a)[1:], dtype=float)
    assert np.max(np.abs(da[:, 2] - da[:, 0] * da[:, 1])) < 1e-5
    assert np.allclose(da, np.array(read_csv(b)[1:], dtype=float), atol=1e-12)


def test_method_override_and_dump(tmp_path, capsys):
    d, r = tmp_path / "d.csv", tmp_path / "r.csv"
    gd, gr = tmp_path / "gd.csv", tmp_path / "gr.csv"
    cfg = str(CONFIGS / "robin.toml")
    assert main(["green", cfg, "--method", "direct", "--output", str(d), "--dump-g", str(gd)]) == 0
    assert main(["green", cfg, "--method", "recursive", "--output", str(r), "--dump-g", str(gr)]) == 0
    a = np.array(read_csv(d)[1:], dtype=float)
    b = np.array(read_csv(r)[1:], dtype=float)
    assert np.max(np.abs(a - b)) < 1e-10
    g = np.array(read_csv(gd), dtype=float)
    assert g.shape == (2, 4)
    assert len(read_csv(gr)) == 2


def test_deterministic_output(tmp_path, capsys):
    paths = [tmp_path / f"{i}.csv" for i in range(2)]
    for p in paths:
        assert main(["solve", str(CONFIGS / "robin.toml"), "--output", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_empty_grid_writes_header_only(tmp_path, capsys):
    text = (CONFIGS / "dirichlet_helmholtz.toml").read_text()
    text = text[:text.index("[output]")] + "[output]\ngrid = []\n"
    cfg = tmp_path / "empty.toml"
    cfg.write_text(text)
    out = tmp_path / "u.csv"
    assert main(["solve", str(cfg), "--output", str(out)]) == 0
    assert read_csv(out) == [["x", "re_u", "im_u"]]


def test_eigenvalue_exit_code(capsys):
    assert main(["green", str(CONFIGS / "eigenvalue.toml"), "--output", "-"]) == 2
    err = capsys.readouterr().err
    assert "IllPosed" in err or "SingularMatrix" in err
    assert main(["green", str(CONFIGS / "eigenvalue.toml"), "--method", "recursive", "--output", "-"]) == 2
    assert "StageSingular" in capsys.readouterr().err


def test_bad_config_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text('[operator]\ntype = "wave"\n')
    assert main(["solve", str(cfg)]) == 2
    assert "ConfigError" in capsys.readouterr().err
    assert main(["solve", str(tmp_path / "nope.toml")]) == 2


def test_verify_csv(tmp_path, capsys):
    out = tmp_path / "v.csv"
    assert main(["verify", "recursive", "--format", "csv", "--output", str(out)]) == 0
    rows = read_csv(out)
    assert rows[0] == ["suite", "name", "max_error", "tolerance", "status"]
    assert all(r[4] == "pass" for r in rows[1:]) and len(rows) > 5


def test_verify_fails_under_mutation(monkeypatch, capsys):
    from greenbvp import assembly
    monkeypatch.setattr(assembly, "_compose_density", lambda Bad, c: -(Bad @ c))
    assert main(["verify", "assembly"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "greenbvp", "verify", "bvp"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stderr.strip().splitlines()[-1])["failed"] == []


def test_report_is_strict_json(capsys):
    # Robin with kappa = 1 has g = 0, so the condition estimate is infinite
    assert main(["solve", str(CONFIGS / "robin.toml"), "--output", "-"]) == 0
    line = capsys.readouterr().err.strip().splitlines()[-1]

    def reject(token):
        raise ValueError(token)

    rep = json.loads(line, parse_constant=reject)
    assert rep["condition_estimate"] is None


def _dirichlet_variant(tmp_path, tail):
    text = (CONFIGS / "dirichlet_helmholtz.toml").read_text()
    text = text[:text.index("[source]")] + tail
    cfg = tmp_path / "variant.toml"
    cfg.write_text(text)
    return str(cfg)


def test_solve_boundary_data_only(tmp_path, capsys):
    # u'' + u = 0, u(0) = 0, u(1) = 1: u = sin x / sin 1
    cfg = _dirichlet_variant(tmp_path, "[[boundary_data]]\nvalue = 0.0\n\n[[boundary_data]]\nvalue = 1.0\n\n"
                                       "[output]\ngrid = [0.5]\n")
    out = tmp_path / "u.csv"
    assert main(["solve", cfg, "--output", str(out)]) == 0
    row = read_csv(out)[1]
    assert abs(float(row[1]) - np.sin(0.5) / np.sin(1.0)) < 1e-13


def test_solve_zero_data(tmp_path, capsys):
    cfg = _dirichlet_variant(tmp_path, "[output]\ngrid = [0.2, 0.5, 0.8]\n")
    out = tmp_path / "u.csv"
    assert main(["solve", cfg, "--output", str(out)]) == 0
    assert all(float(r[1]) == 0.0 and float(r[2]) == 0.0 for r in read_csv(out)[1:])

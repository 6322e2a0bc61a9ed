import json
import subprocess
import sys
import time

import numpy as np
import pytest
import scipy.io
from numpy.testing import assert_allclose

from ballspec import cli, verify
from ballspec.io import read_sweep_csv
from ballspec.solver import SweepRow


def run(argv, capsys=None):
    rc = cli.main(argv)
    out = capsys.readouterr() if capsys is not None else None
    return rc, out


@pytest.mark.parametrize(
    "text,expected",
    [
        ("7", [7]),
        ("2,5,9", [2, 5, 9]),
        ("1:4", [1, 2, 3, 4]),
        ("0:10:5", [0, 5, 10]),
        ("8:256:x2", [8, 16, 32, 64, 128, 256]),
        ("8:100:x3", [8, 24, 72]),
        ("1:2,6", [1, 2, 6]),
    ],
)
def test_parse_range(text, expected):
    assert cli.parse_range(text) == expected


@pytest.mark.parametrize("text", ["", "a", "1:2:3:4", "5:1", "1:9:0", "0:8:x2", "1:8:x1", "1:8:xx"])
def test_parse_range_rejects(text):
    with pytest.raises(cli.ConfigError):
        cli.parse_range(text)


def test_operators_matrixmarket(tmp_path, capsys):
    rc, out = run(["operators", "--alpha", "0", "--ell", "2", "--N", "8", "--out", str(tmp_path)], capsys)
    assert rc == 0
    mtx = sorted(p.name for p in tmp_path.glob("*.mtx"))
    assert mtx == ["C.mtx", "Dminus.mtx", "Dplus.mtx", "Q.mtx", "R.mtx"]
    meta = json.loads((tmp_path / "operators.meta.json").read_text())
    assert meta["operators"]["Dplus"]["in_basis"] == [0.0, 2]
    assert meta["operators"]["Dplus"]["out_basis"] == [1.0, 3]
    assert len(meta["restriction_row"]) == 8
    dminus = scipy.io.mmread(tmp_path / "Dminus.mtx").tocsr()
    assert dminus.shape == (8, 8)
    assert dminus.nnz == 8
    assert np.count_nonzero(dminus.toarray() - np.diag(dminus.diagonal())) == 0
    Q = scipy.io.mmread(tmp_path / "Q.mtx").toarray()
    assert Q.shape == (9, 9)
    assert len(meta["Q"]["valid_cols"]) == 9 and all(meta["Q"]["valid_cols"])
    assert_allclose(Q.T @ Q, np.eye(9), atol=1e-13)


def test_operators_roundtrip_precision(tmp_path):
    from ballspec.radial import RadialBasisId, build_Dplus

    cli.main(["operators", "--alpha", "0.5", "--ell", "3", "--N", "10", "--out", str(tmp_path)])
    ref = build_Dplus(RadialBasisId(0.5, 3), 10).to_sparse().toarray()
    assert np.array_equal(scipy.io.mmread(tmp_path / "Dplus.mtx").toarray(), ref)


def test_operators_ell0_mask(tmp_path, capsys):
    rc, _ = run(["operators", "--ell", "0", "--N", "6", "--rank", "1", "--out", str(tmp_path)], capsys)
    assert rc == 0
    meta = json.loads((tmp_path / "operators.meta.json").read_text())
    assert "Dminus" in meta["omitted"]
    assert not (tmp_path / "Dminus.mtx").exists()
    assert meta["Q"]["valid_cols"].count(True) == 1


@pytest.mark.parametrize("fmt,pattern", [("json", "operators.json"), ("csv", "*.csv")])
def test_operators_other_formats(tmp_path, capsys, fmt, pattern):
    rc, _ = run(["operators", "--ell", "1", "--N", "5", "--format", fmt, "--out", str(tmp_path)], capsys)
    assert rc == 0
    assert list(tmp_path.glob(pattern))


@pytest.mark.parametrize(
    "argv",
    [
        ["operators", "--ell", "2", "--N", "0"],
        ["operators", "--ell", "-1", "--N", "4"],
        ["operators", "--ell", "2", "--N", "4", "--alpha", "-2"],
        ["bessel", "--methods", "spline"],
        ["bessel", "--N", "2:8"],
        ["bessel", "--N", "8", "--fixedN", "8"],
        ["bessel", "--ell", "0", "--methods", "jones_worland"],
        ["roundtrip", "--rank", "3"],
        ["roundtrip", "--rank", "1", "--field", "constant"],
    ],
)
def test_config_errors_exit_2(argv, tmp_path, capsys):
    if argv[0] == "operators":
        argv = argv + ["--out", str(tmp_path)]
    rc, out = run(argv, capsys)
    assert rc == 2
    assert out.err.startswith("error:")


def test_io_failure_exit_1(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    rc, _ = run(["operators", "--ell", "2", "--N", "4", "--out", str(blocker / "sub")], capsys)
    assert rc == 1
    rc, _ = run(["bessel", "--N", "8", "--out", str(tmp_path / "missing" / "x.csv")], capsys)
    assert rc == 1


def test_verify_quick_json(tmp_path, capsys):
    report = tmp_path / "r.json"
    t0 = time.perf_counter()
    rc, out = run(["verify", "--quick", "--json", str(report)], capsys)
    assert time.perf_counter() - t0 < 10
    assert rc == 0
    data = json.loads(report.read_text())
    assert data["passed"] is True
    assert data["count"] >= 25
    for inv in data["invariants"]:
        assert {"name", "module", "max_residual", "tolerance", "passed"} <= set(inv)
        assert inv["max_residual"] <= inv["tolerance"]
    assert out.out.count("PASS ") == data["count"]


def test_verify_full_covers_registry(capsys):
    rc, out = run(["verify"], capsys)
    assert rc == 0
    assert out.out.count("PASS ") == len(verify.REGISTRY) >= 25


def test_verify_failure_exit_3(monkeypatch, capsys):
    broken = verify.Invariant("always_fails", "cli", 1e-12, True, lambda: 1.0)
    monkeypatch.setattr(verify, "REGISTRY", verify.REGISTRY + [broken])
    rc, out = run(["verify", "--quick"], capsys)
    assert rc == 3
    assert "FAIL cli.always_fails" in out.out


def test_bessel_rows_and_schema(tmp_path, capsys):
    path = tmp_path / "s.csv"
    rc, _ = run(["bessel", "--ell", "1,2", "--N", "8:32:x2", "--methods",
                 "tau_alpha0,jones_worland,chebyshev", "--out", str(path)], capsys)
    assert rc == 0
    rows = read_sweep_csv(path)
    assert len(rows) == 3 * 2 * 3
    assert tuple(rows[0]) == SweepRow.FIELDS
    assert all(r["wall_time_ms"] == "" for r in rows)
    tau = [r for r in rows if r["method"] == "tau_alpha0"]
    assert all(r["alpha"] == "0.0" and r["tau_variant"] == "convert_column" for r in tau)


def test_bessel_stdout_and_timing(capsys):
    rc, out = run(["bessel", "--ell", "2", "--N", "8", "--methods", "galerkin", "--timing"], capsys)
    assert rc == 0
    lines = out.out.strip().splitlines()
    assert len(lines) == 2
    assert float(lines[1].split(",")[-1]) >= 0


def test_bessel_deterministic_bytes(tmp_path, monkeypatch, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["bessel", "--ell", "1:3", "--N", "8:64:x2", "--methods", "tau_alpha0,chebyshev,galerkin"]
    run(argv + ["--out", str(a), "--jobs", "1"], capsys)
    monkeypatch.setenv("BALLSPEC_JOBS", "3")
    run(argv + ["--out", str(b)], capsys)
    assert a.read_bytes() == b.read_bytes()


def test_bessel_fixed_n_panel(tmp_path, capsys):
    path = tmp_path / "c.csv"
    rc, _ = run(["bessel", "--fixedN", "64", "--ell", "1:64", "--out", str(path), "--jobs", "2"], capsys)
    assert rc == 0
    rows = read_sweep_csv(path)
    assert len(rows) == 3 * 64
    assert {r["N"] for r in rows} == {"64"}


def test_bessel_method_ordering_pre_asymptotic(tmp_path, capsys):
    path = tmp_path / "a.csv"
    run(["bessel", "--ell", "2", "--N", "4:8:2", "--out", str(path)], capsys)
    rows = read_sweep_csv(path)
    by = {(r["method"], int(r["N"])): float(r["rel_error"]) for r in rows}
    for N in (4, 6, 8):
        assert by["tau_alpha0", N] < by["jones_worland", N] < by["chebyshev", N]


def test_jobs_env(monkeypatch):
    monkeypatch.setenv("BALLSPEC_JOBS", "4")
    assert cli._jobs(None) == 4
    assert cli._jobs(2) == 2
    monkeypatch.setenv("BALLSPEC_JOBS", "many")
    with pytest.raises(cli.ConfigError):
        cli._jobs(None)
    monkeypatch.delenv("BALLSPEC_JOBS")
    assert cli._jobs(None) == 1


@pytest.mark.parametrize("rank,Lmax,N,tol", [(1, 8, 12, 1e-11), (2, 4, 12, 1e-10), (0, 8, 12, 1e-11)])
def test_roundtrip_random(rank, Lmax, N, tol, tmp_path, capsys):
    report = tmp_path / "rt.json"
    rc, _ = run(["roundtrip", "--rank", str(rank), "--Lmax", str(Lmax), "--N", str(N),
                 "--tol", str(tol), "--json", str(report)], capsys)
    data = json.loads(report.read_text())
    assert rc == 0 and data["passed"]
    assert data["max_error"] < tol


def test_roundtrip_constant_single_coefficient(capsys):
    rc, out = run(["roundtrip", "--rank", "0", "--field", "constant", "--Lmax", "4", "--N", "6"], capsys)
    data = json.loads(out.out)
    assert rc == 0
    assert len(data["nonzero_coefficients"]) == 1
    c = data["nonzero_coefficients"][0]
    assert (c["ell"], c["m"], c["n"]) == (0, 0, 0)


def test_roundtrip_seeded(capsys):
    argv = ["roundtrip", "--rank", "1", "--Lmax", "3", "--N", "6", "--seed", "7"]
    _, first = run(argv, capsys)
    _, second = run(argv, capsys)
    assert first.out == second.out


def test_roundtrip_unmet_tolerance_exit_3(capsys):
    rc, _ = run(["roundtrip", "--rank", "1", "--Lmax", "3", "--N", "6", "--tol", "-1"], capsys)
    assert rc == 3


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "ballspec", "bessel", "--ell", "2", "--N", "16",
                           "--methods", "tau_alpha0"], capture_output=True, text=True, check=True)
    kappa = float(proc.stdout.splitlines()[1].split(",")[5])
    assert abs(kappa - 5.7634591968945498) < 1e-12 * kappa

"""CLI harness: determinism, exit codes, CSV and manifest outputs."""

from __future__ import annotations

import json
import subprocess
import sys

import numpy as np
import pytest

from gracecode import cli
from gracecode.cli import EXIT_INFEASIBLE, EXIT_OK, EXIT_USAGE, main
from gracecode.efun import error_poly, f_alphabet


def _read(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def test_parse_grid():
    assert np.allclose(cli._parse_grid("0.5"), [0.5])
    assert np.allclose(cli._parse_grid("0.2:0.8:0.3"), [0.2, 0.5, 0.8])
    with pytest.raises(ValueError):
        cli._parse_grid("1:2")
    with pytest.raises(ValueError):
        cli._parse_grid("1:2:0")


def test_usage_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["simulate"])  # missing required flags
    assert exc.value.code == EXIT_USAGE


def test_infeasible_exit_code(tmp_path):
    out = tmp_path / "sim.csv"
    status = main([
        "simulate", "--ensemble", "nosuchprofile", "--k", "10", "--rate", "0.5",
        "--alpha-grid", "1.0", "--out", str(out),
    ])
    assert status == EXIT_INFEASIBLE
    assert not out.exists()


def test_simulate_deterministic(tmp_path):
    argv = [
        "simulate", "--ensemble", "ldmc3", "--k", "200", "--rate", "0.5",
        "--bp-iters", "4", "--trials", "2", "--seed", "11",
        "--alpha-grid", "0.8:1.2:0.4", "--out", None,
    ]
    outs = []
    for name in ("a.csv", "b.csv"):
        argv[-1] = str(tmp_path / name)
        assert main(argv) == EXIT_OK
        outs.append(_read(argv[-1]))
    assert outs[0] == outs[1]
    lines = outs[0].strip().split("\n")
    assert lines[0] == "alpha,eps,ber,ber_stderr,soft_info,trials"
    assert len(lines) == 3  # alpha in {0.8, 1.2}


def test_simulate_manifest(tmp_path):
    out = tmp_path / "sim.csv"
    argv = [
        "simulate", "--ensemble", "ldmc3", "--k", "100", "--rate", "0.5",
        "--bp-iters", "2", "--trials", "1", "--seed", "3",
        "--alpha-grid", "1.0", "--out", str(out),
    ]
    assert main(argv) == EXIT_OK
    manifest = json.loads(_read(str(out) + ".manifest.json"))
    assert manifest["seed"] == 3
    assert manifest["trials"] == 1
    assert manifest["threads"] >= 1
    assert "version" in manifest and "walltime_s" in manifest


def test_simulate_eps_grid(tmp_path):
    out = tmp_path / "sim.csv"
    argv = [
        "simulate", "--ensemble", "ldgm3", "--k", "100", "--rate", "0.5",
        "--bp-iters", "2", "--trials", "1", "--seed", "0",
        "--eps-grid", "0.4:0.6:0.2", "--out", str(out),
    ]
    assert main(argv) == EXIT_OK
    rows = _read(str(out)).strip().split("\n")[1:]
    eps = [float(r.split(",")[1]) for r in rows]
    assert np.allclose(sorted(eps), [0.4, 0.6])


def test_efun_csv_matches_library(tmp_path):
    out = tmp_path / "efun.csv"
    assert main(["efun", "--family", "ldmc3-bec", "--dmax", "4", "--out", str(out)]) == EXIT_OK
    lines = _read(str(out)).strip().split("\n")
    alph = f_alphabet("ldmc3_bec")
    for line in lines[1:]:
        cells = line.split(",")
        d = int(float(cells[0]))
        coeffs = np.array([float(c) for c in cells[1:]])
        ref = error_poly(alph, d).as_array()
        assert np.allclose(coeffs[: ref.shape[0]], ref, atol=1e-12)
        assert np.all(coeffs[ref.shape[0] :] == 0.0)


def test_devo_smoke(tmp_path):
    out = tmp_path / "devo.csv"
    argv = [
        "devo", "--family", "ldmc3", "--alpha-grid", "1.0", "--ell", "5",
        "--x0", "1.0", "--out", str(out),
    ]
    assert main(argv) == EXIT_OK
    rows = _read(str(out)).strip().split("\n")[1:]
    assert len(rows) == 6  # t = 0 .. 5
    qs = [float(r.split(",")[2]) for r in rows]
    assert qs[0] == 1.0
    assert all(0.0 <= q <= 1.0 for q in qs)


def test_devo_mixture_profile_file(tmp_path):
    prof = tmp_path / "mix.profile"
    prof.write_text("XOR 1 0.08\nXOR 2 0.22\nXOR 3 0.70\n", encoding="utf-8")
    out = tmp_path / "devo.csv"
    argv = ["devo", "--family", str(prof), "--alpha-grid", "1.0", "--ell", "200",
            "--x0", "1.0", "--out", str(out)]
    assert main(argv) == EXIT_OK
    final = float(_read(str(out)).strip().split("\n")[-1].split(",")[2])
    assert abs((1.0 - final) / 2.0 - 0.06336) < 1e-3


def test_devo_bad_combination(tmp_path):
    out = tmp_path / "devo.csv"
    argv = ["devo", "--family", "ldgm3", "--alpha-grid", "1.0",
            "--surrogate", "BSC", "--out", str(out)]
    assert main(argv) == EXIT_INFEASIBLE


def test_converse_curves(tmp_path):
    out = tmp_path / "conv.csv"
    argv = ["converse", "--bound", "linear2", "--rate", "0.5",
            "--anchor-eps", "0.75", "--anchor-delta", "0.2501",
            "--eps-grid", "0.5:0.9:0.2", "--out", str(out)]
    assert main(argv) == EXIT_OK
    rows = _read(str(out)).strip().split("\n")[1:]
    vals = {float(r.split(",")[1]): float(r.split(",")[3]) for r in rows}
    assert abs(vals[0.5] - 0.08326666666666671) < 1e-10
    out2 = tmp_path / "sh.csv"
    assert main(["converse", "--bound", "shannon", "--rate", "0.5",
                 "--eps-grid", "0.75", "--out", str(out2)]) == EXIT_OK
    val = float(_read(str(out2)).strip().split("\n")[1].split(",")[3])
    assert abs(val - 0.1100278644385071) < 1e-9


def test_converse_area_skips_below_anchor(tmp_path):
    out = tmp_path / "area.csv"
    argv = ["converse", "--bound", "area", "--rate", "0.5",
            "--anchor-eps", "0.475", "--anchor-delta", "0.0",
            "--eps-grid", "0.4:0.6:0.1", "--out", str(out)]
    assert main(argv) == EXIT_OK
    rows = _read(str(out)).strip().split("\n")[1:]
    xs = [float(r.split(",")[1]) for r in rows]
    assert min(xs) > 0.475
    vals = {round(x, 3): float(r.split(",")[3]) for x, r in zip(xs, rows)}
    assert abs(vals[0.6] - 0.18) < 1e-6


def test_optimize_outputs(tmp_path):
    out = tmp_path / "opt.profile"
    argv = ["optimize", "--components", "XOR:1,XOR:2", "--targets", "1.0",
            "--ell", "5", "--multistart", "2", "--seed", "0", "--out", str(out)]
    assert main(argv) == EXIT_OK
    from gracecode.ensemble import parse_profile

    prof = parse_profile(_read(str(out)))
    total = sum(lam for _, lam in prof.entries)
    assert abs(total - 1.0) < 1e-6
    log = _read(str(out) + ".log")
    assert log.startswith("objective ")
    assert "start 0" in log


def test_histogram_counts(tmp_path):
    out = tmp_path / "hist.csv"
    argv = ["histogram", "--ensemble", "ldmc3", "--k", "100", "--rate", "0.5",
            "--bp-iters", "3", "--trials", "2", "--seed", "1",
            "--alpha", "1.0", "--bins", "10", "--out", str(out)]
    assert main(argv) == EXIT_OK
    rows = _read(str(out)).strip().split("\n")[1:]
    assert len(rows) == 10
    total = sum(int(float(r.split(",")[2])) for r in rows)
    assert total == 200  # k * trials


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "gracecode.cli", "--version"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0

    import gracecode

    assert proc.stdout.strip() == gracecode.__version__

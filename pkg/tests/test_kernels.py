"""Backend equivalence: numba kernels versus the pure-numpy fallbacks."""

from __future__ import annotations

import os
import subprocess
import sys

import numpy as np
import pytest

from gracecode import _kernels
from gracecode._kernels import (
    Gf2Workspace,
    _gf2_rank_forced_py,
    gf2_rank_forced,
)

needs_numba = pytest.mark.skipif(not _kernels.HAS_NUMBA, reason="numba not available")


def _random_columns(rng, k, m, density=0.4):
    cols = [np.flatnonzero(rng.random(k) < density).astype(np.int64) for _ in range(m)]
    indptr = np.zeros(m + 1, dtype=np.int64)
    for c, col in enumerate(cols):
        indptr[c + 1] = indptr[c] + col.shape[0]
    rowidx = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    return indptr, rowidx


@needs_numba
def test_gf2_backends_agree():
    rng = np.random.default_rng(4)
    for _ in range(25):
        k = int(rng.integers(1, 70))
        m = int(rng.integers(1, 80))
        indptr, rowidx = _random_columns(rng, k, m)
        keep = (rng.random(m) < 0.8).astype(np.uint8)
        rank_nb, forced_nb = gf2_rank_forced(indptr, rowidx, keep, k)
        rank_py, forced_py = _gf2_rank_forced_py(indptr, rowidx, keep, k, True)
        assert rank_nb == rank_py
        assert np.array_equal(forced_nb, forced_py)


@needs_numba
def test_gf2_workspace_reuse():
    rng = np.random.default_rng(5)
    k, m = 40, 50
    ws = Gf2Workspace(k, min(k, m))
    for _ in range(5):
        indptr, rowidx = _random_columns(rng, k, m)
        keep = np.ones(m, dtype=np.uint8)
        rank_ws, forced_ws = gf2_rank_forced(indptr, rowidx, keep, k, workspace=ws)
        rank_py, forced_py = _gf2_rank_forced_py(indptr, rowidx, keep, k, True)
        assert rank_ws == rank_py
        assert np.array_equal(forced_ws, forced_py)


@needs_numba
def test_var_extrinsic_backends_agree():
    from gracecode._kernels import LLR_CLAMP, _bp_var_extrinsic_nb, _bp_var_extrinsic_py

    rng = np.random.default_rng(6)
    k, ne = 12, 60
    evar = rng.integers(0, k, size=ne).astype(np.int64)
    c2v = rng.normal(scale=3.0, size=ne)
    c2v[rng.random(ne) < 0.1] = np.inf
    c2v[rng.random(ne) < 0.1] = -np.inf
    args = lambda: (
        np.zeros(k),
        np.zeros(k, dtype=np.int64),
        np.zeros(k, dtype=np.int64),
        np.zeros(ne),
    )
    tot, npos, nneg, lam_nb = args()
    bad_nb = _bp_var_extrinsic_nb(evar, c2v, tot, npos, nneg, lam_nb, LLR_CLAMP)
    tot, npos, nneg, lam_py = args()
    bad_py = _bp_var_extrinsic_py(evar, c2v, tot, npos, nneg, lam_py, LLR_CLAMP)
    assert bad_nb == bad_py
    assert np.allclose(lam_nb, lam_py, atol=1e-12, equal_nan=True)


def _run_simulate(env_numba: str, out: str) -> None:
    env = dict(os.environ, GRACECODE_NUMBA=env_numba)
    argv = [
        sys.executable, "-m", "gracecode.cli", "simulate",
        "--ensemble", "ldmc3", "--k", "300", "--rate", "0.5",
        "--bp-iters", "5", "--trials", "2", "--seed", "17",
        "--alpha-grid", "0.8:1.2:0.4", "--out", out,
    ]
    subprocess.run(argv, check=True, env=env, capture_output=True)


@needs_numba
def test_backends_byte_identical_end_to_end(tmp_path):
    a = str(tmp_path / "numba.csv")
    b = str(tmp_path / "numpy.csv")
    _run_simulate("1", a)
    _run_simulate("0", b)
    with open(a, "rb") as fa, open(b, "rb") as fb:
        assert fa.read() == fb.read()


def test_env_flag_disables_numba():
    env = dict(os.environ, GRACECODE_NUMBA="0")
    code = "from gracecode._kernels import USING_NUMBA; print(USING_NUMBA)"
    proc = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert proc.stdout.strip() == "False"


def test_numpy_fallback_suite_smoke():
    # the fallback backend passes the exact-decoder unit tests too
    env = dict(os.environ, GRACECODE_NUMBA="0")
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", "tests/test_exactdec.py", "tests/test_bp.py", "-q", "-x"],
        env=env, capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stdout[-2000:]

"""Benchmark the numba kernels against the pure-numpy fallbacks.

Runs the same workloads in two subprocesses (GRACECODE_NUMBA=1 and =0) and
prints a comparison table.  Usage: python3 benchmarks/bench_kernels.py
"""

from __future__ import annotations

import json
import os
import subprocess
import sys
import time

import numpy as np


def _bench_gf2(reps: int = 5) -> float:
    from gracecode.exactdec import BitMatrix, rank_hrank, subsample

    rng = np.random.default_rng(0)
    A = BitMatrix.from_dense((rng.random((600, 1200)) < 0.01).astype(np.uint8))
    rank_hrank(A)  # warm-up (JIT compilation)
    t0 = time.perf_counter()
    for _ in range(reps):
        rank_hrank(subsample(A, 0.7, 0.7, rng))
    return (time.perf_counter() - t0) / reps


def _bench_bp(reps: int = 3) -> float:
    from gracecode.bp import run_bp
    from gracecode.channels import ChannelParam, transmit
    from gracecode.ensemble import CheckKind, DegreeProfile, EnsembleSpec, encode, sample_graph

    rng = np.random.default_rng(1)
    prof = DegreeProfile.single(CheckKind.maj(3))
    graph = sample_graph(EnsembleSpec(k=30_000, rate=0.5, profile=prof, seed=0))
    src = rng.integers(0, 2, size=30_000).astype(np.int8)
    received = transmit(encode(graph, src), ChannelParam.bec(0.5), rng)
    run_bp(graph, received, 1)  # warm-up
    t0 = time.perf_counter()
    for _ in range(reps):
        run_bp(graph, received, 10)
    return (time.perf_counter() - t0) / reps


def _worker() -> None:
    from gracecode._kernels import USING_NUMBA

    print(json.dumps({
        "numba": USING_NUMBA,
        "gf2_rank_s": _bench_gf2(),
        "bp_10iter_s": _bench_bp(),
    }))


def main() -> None:
    if "--worker" in sys.argv:
        _worker()
        return
    results = {}
    for flag in ("1", "0"):
        env = dict(os.environ, GRACECODE_NUMBA=flag)
        proc = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--worker"],
            env=env, capture_output=True, text=True, check=True,
        )
        results[flag] = json.loads(proc.stdout.strip().splitlines()[-1])
    nb, py = results["1"], results["0"]
    backend_nb = "numba" if nb["numba"] else "numpy (numba unavailable)"
    print(f"{'workload':<28}{backend_nb:>14}{'numpy':>14}{'speedup':>10}")
    for key, label in (("gf2_rank_s", "GF(2) rank+forced"), ("bp_10iter_s", "BP 10 iters, k=30000")):
        ratio = py[key] / nb[key] if nb[key] > 0 else float("inf")
        print(f"{label:<28}{nb[key]*1e3:>11.1f} ms{py[key]*1e3:>11.1f} ms{ratio:>9.1f}x")


if __name__ == "__main__":
    main()

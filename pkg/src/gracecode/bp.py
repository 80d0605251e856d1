"""Flooding belief propagation on factor graphs over erasure observations.

Messages are log-likelihood ratios ``log P(bit=0) - log P(bit=1)`` with
explicit +/-inf for certainty; finite values saturate at +/-500 nats.  One
iteration is a full variable-to-check then check-to-variable sweep.  The
iteration-0 state is all-1/2 beliefs except variables clamped by observed
arity-1 (identity) checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .channels import ERASED, ReceivedWord, h_b
from .ensemble import CheckKind, FactorGraph
from .exactdec import ContradictionError

_CLAMP = _kernels.LLR_CLAMP


@dataclass
class BeliefState:
    """Per-variable posterior probability-of-zero at an iteration."""

    p0: np.ndarray
    iteration: int


@dataclass
class DecodeResult:
    """Decoded beliefs, hard decisions and per-iteration traces.

    ``hard`` is 0/1 with -1 for undecided (p0 exactly 1/2).  ``ber_trace``
    is the posterior-expected error (mean of min(p0, 1-p0)); on erasure
    observations this coincides with the truth-based count-undecided-as-half
    convention.  ``soft_trace`` is 1 - mean h_b(p0).  ``failed`` flags a
    contradiction (impossible observation set) for the trial.
    """

    beliefs: BeliefState
    hard: np.ndarray
    ber_trace: np.ndarray
    soft_trace: np.ndarray
    failed: bool = False


def check_message(kind: CheckKind, observed: int, incoming) -> float:
    """Reference check-to-target message in the likelihood-ratio domain.

    ``incoming`` holds the ratios P(0)/P(1) from the other arity-1 neighbors.
    An erased observation returns 1 (no message).  For a majority check with
    observed 0 the result is P(T <= (d-1)/2) / P(T <= (d-3)/2) with T the
    count of ones among the other neighbors; observed 1 is the mirror image.
    XOR/PARITY checks are informative only when every other neighbor is
    certain.
    """
    r = np.asarray(incoming, dtype=float)
    if r.shape[0] != kind.arity - 1:
        raise ValueError("incoming must hold arity-1 ratios")
    if np.any(r < 0):
        raise ValueError("likelihood ratios must lie in [0, inf]")
    if observed == ERASED:
        return 1.0
    obs = int(observed)
    if kind.kind == "MAJ":
        with np.errstate(invalid="ignore"):
            p1 = np.where(np.isinf(r), 0.0, 1.0 / (1.0 + r))
        if obs == 1:
            p1 = 1.0 - p1
        d = kind.arity
        thr = (d - 1) // 2
        dist = np.array([1.0])
        for u in p1:
            nxt = np.zeros(dist.shape[0] + 1)
            nxt[: dist.shape[0]] += dist * (1.0 - u)
            nxt[1:] += dist * u
            dist = nxt
        a_sum = float(dist[: thr + 1].sum())
        b_sum = float(dist[:thr].sum())
        if a_sum <= 0.0:
            raise ContradictionError("conflicting certain messages at a majority check")
        ratio = np.inf if b_sum <= 0.0 else a_sum / b_sum
        return ratio if obs == 0 else (0.0 if ratio == np.inf else 1.0 / ratio)
    certain = (r == 0.0) | np.isinf(r)
    if not np.all(certain):
        return 1.0
    parity = (int((r == 0.0).sum()) + obs) % 2
    return np.inf if parity == 0 else 0.0


def _active_arrays(graph: FactorGraph, received: ReceivedWord):
    """Flat arrays for the observed checks (unerased emitted + PARITY)."""
    ptr, evar, codes, arities = graph.flat
    n = len(graph.checks)
    obs_full = np.zeros(n, dtype=np.int8)
    active = codes == 2  # PARITY always active, observed 0
    emitted = graph.emitted_indices
    if emitted.shape[0] != len(received):
        raise ValueError("received length must match the emitted check count")
    sym = received.symbols
    obs_full[emitted] = np.where(sym == ERASED, 0, sym)
    active_emitted = emitted[sym != ERASED]
    active[active_emitted] = True
    idx = np.nonzero(active)[0]
    a_ar = arities[idx]
    a_ptr = np.zeros(idx.shape[0] + 1, dtype=np.int64)
    np.cumsum(a_ar, out=a_ptr[1:])
    a_evar = np.empty(int(a_ptr[-1]), dtype=np.int64)
    for out_i, ci in enumerate(idx):
        a_evar[a_ptr[out_i] : a_ptr[out_i + 1]] = evar[ptr[ci] : ptr[ci + 1]]
    a_kind = np.where(codes[idx] == 0, _kernels.KIND_MAJ, _kernels.KIND_XOR).astype(np.int8)
    a_obs = obs_full[idx]
    return a_ptr, a_evar, a_kind, a_obs, a_ar


def _build_groups(a_ptr, a_kind, a_ar):
    groups = {}
    for key in {(int(k), int(d)) for k, d in zip(a_kind, a_ar)}:
        kind, d = key
        sel = np.nonzero((a_kind == kind) & (a_ar == d))[0]
        emat = a_ptr[sel][:, None] + np.arange(d)[None, :]
        groups[key] = (sel, emat)
    return groups


def _posterior(evar, c2v, k):
    pinf = c2v == np.inf
    ninf = c2v == -np.inf
    fin = np.where(np.isfinite(c2v), c2v, 0.0)
    tot = np.bincount(evar, weights=fin, minlength=k)
    npos = np.bincount(evar, weights=pinf, minlength=k)
    nneg = np.bincount(evar, weights=ninf, minlength=k)
    contradiction = bool(np.any((npos > 0) & (nneg > 0)))
    with np.errstate(over="ignore"):
        p0 = 1.0 / (1.0 + np.exp(-np.clip(tot, -_CLAMP, _CLAMP)))
    p0 = np.where(npos > 0, 1.0, np.where(nneg > 0, 0.0, p0))
    return p0, contradiction


def run_bp(graph: FactorGraph, received: ReceivedWord, iters: int) -> DecodeResult:
    """Flooding BP for ``iters`` iterations; traces have length iters + 1."""
    if iters < 0:
        raise ValueError("iters must be >= 0")
    k = graph.k
    a_ptr, a_evar, a_kind, a_obs, a_ar = _active_arrays(graph, received)
    ne = int(a_ptr[-1])
    c2v = np.zeros(ne)
    # iteration-0 clamps: observed arity-1 checks need no incoming information
    unit = np.nonzero(a_ar == 1)[0]
    if unit.shape[0]:
        c2v[a_ptr[unit]] = np.where(a_obs[unit] == 0, np.inf, -np.inf)
    failed = False
    ber_trace = []
    soft_trace = []
    p0, bad = _posterior(a_evar, c2v, k)
    failed = failed or bad
    ber_trace.append(float(np.minimum(p0, 1.0 - p0).mean()))
    soft_trace.append(1.0 - float(np.mean(h_b(p0))))
    done = 0
    if not failed:
        use_nb = _kernels.USING_NUMBA
        tot = np.zeros(k)
        npos = np.zeros(k, dtype=np.int64)
        nneg = np.zeros(k, dtype=np.int64)
        lam = np.zeros(ne)
        if use_nb:
            maxd = int(a_ar.max()) if a_ar.shape[0] else 1
            fw = np.zeros((maxd + 1, maxd + 1))
            bwc = np.zeros((maxd + 1, maxd + 1))
            p1buf = np.zeros(maxd)
        else:
            groups = _build_groups(a_ptr, a_kind, a_ar)
        for _ in range(iters):
            if use_nb:
                bad1 = _kernels._bp_var_extrinsic_nb(a_evar, c2v, tot, npos, nneg, lam, _CLAMP)
                bad2 = _kernels._bp_check_update_nb(a_ptr, a_kind, a_obs, lam, c2v, fw, bwc, p1buf, _CLAMP)
            else:
                bad1 = _kernels._bp_var_extrinsic_py(a_evar, c2v, tot, npos, nneg, lam, _CLAMP)
                bad2 = _kernels._bp_check_update_py(groups, a_obs, lam, c2v, _CLAMP)
            p0, bad3 = _posterior(a_evar, c2v, k)
            done += 1
            ber_trace.append(float(np.minimum(p0, 1.0 - p0).mean()))
            soft_trace.append(1.0 - float(np.mean(h_b(p0))))
            if bad1 or bad2 or bad3:
                failed = True
                break
    hard = np.where(p0 > 0.5, 0, np.where(p0 < 0.5, 1, -1)).astype(np.int8)
    return DecodeResult(
        beliefs=BeliefState(p0=p0, iteration=done),
        hard=hard,
        ber_trace=np.array(ber_trace),
        soft_trace=np.array(soft_trace),
        failed=failed,
    )


def measure(result: DecodeResult, truth, bins: int = 20):
    """Truth-based BER (undecided counts 1/2), soft information, histogram."""
    truth = np.asarray(truth, dtype=np.int8)
    hard = result.hard
    if truth.shape[0] != hard.shape[0]:
        raise ValueError("truth length must equal k")
    err = np.where(hard == -1, 0.5, (hard != truth).astype(float))
    ber = float(err.mean())
    p0 = result.beliefs.p0
    iota = 1.0 - float(np.mean(h_b(p0)))
    hist, _ = np.histogram(p0, bins=bins, range=(0.0, 1.0))
    return ber, iota, hist


def observed_degrees(graph: FactorGraph, received: ReceivedWord) -> np.ndarray:
    """Per-variable membership count over observed (active) checks."""
    a_ptr, a_evar, _, _, _ = _active_arrays(graph, received)
    return np.bincount(a_evar, minlength=graph.k)


__all__ = [
    "BeliefState",
    "DecodeResult",
    "check_message",
    "run_bp",
    "measure",
    "observed_degrees",
]

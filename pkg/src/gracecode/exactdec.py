"""Exact F2 decoding tools: rank/hrank, sub-sampling, and MAP oracles.

A :class:`BitMatrix` is a k x m matrix over F2 stored column-sparse; rank and
forced-coordinate computations run on bit-packed words through the kernels in
:mod:`gracecode._kernels`.  ``hrank`` counts coordinates forced to a unique
value by the linear system — equivalently, standard basis vectors contained
in the column span.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .channels import ERASED, ReceivedWord
from .ensemble import FactorGraph


class ContradictionError(RuntimeError):
    """No source word is consistent with the observations."""


@dataclass(frozen=True)
class BitMatrix:
    """F2 matrix with ``k`` rows and ``m`` columns, stored column-sparse."""

    k: int
    m: int
    indptr: np.ndarray
    rowidx: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "indptr", np.asarray(self.indptr, dtype=np.int64))
        object.__setattr__(self, "rowidx", np.asarray(self.rowidx, dtype=np.int64))
        if self.indptr.shape[0] != self.m + 1:
            raise ValueError("indptr length must be m + 1")
        if self.rowidx.size and (self.rowidx.min() < 0 or self.rowidx.max() >= self.k):
            raise ValueError("row index out of range")

    @classmethod
    def from_dense(cls, a) -> "BitMatrix":
        a = np.asarray(a)
        k, m = a.shape
        cols = [np.nonzero(a[:, j] % 2)[0] for j in range(m)]
        lens = np.array([c.shape[0] for c in cols], dtype=np.int64)
        indptr = np.zeros(m + 1, dtype=np.int64)
        np.cumsum(lens, out=indptr[1:])
        rowidx = np.concatenate(cols) if m else np.zeros(0, dtype=np.int64)
        return cls(k=k, m=m, indptr=indptr, rowidx=rowidx)

    @classmethod
    def from_columns(cls, columns, k: int) -> "BitMatrix":
        """Build from an iterable of row-index lists, one per column."""
        cols = [np.asarray(sorted(set(int(i) for i in c)), dtype=np.int64) for c in columns]
        lens = np.array([c.shape[0] for c in cols], dtype=np.int64)
        indptr = np.zeros(len(cols) + 1, dtype=np.int64)
        np.cumsum(lens, out=indptr[1:])
        rowidx = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
        return cls(k=k, m=len(cols), indptr=indptr, rowidx=rowidx)

    @classmethod
    def identity(cls, k: int) -> "BitMatrix":
        return cls(k=k, m=k, indptr=np.arange(k + 1, dtype=np.int64), rowidx=np.arange(k, dtype=np.int64))

    @classmethod
    def repetition(cls, k: int, copies: int) -> "BitMatrix":
        """Generator of the ``copies``-fold repetition code, columns [I | I | ...]."""
        m = k * copies
        return cls(
            k=k,
            m=m,
            indptr=np.arange(m + 1, dtype=np.int64),
            rowidx=np.tile(np.arange(k, dtype=np.int64), copies),
        )

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.k, self.m), dtype=np.uint8)
        for j in range(self.m):
            out[self.rowidx[self.indptr[j] : self.indptr[j + 1]], j] = 1
        return out

    def column(self, j: int) -> np.ndarray:
        return self.rowidx[self.indptr[j] : self.indptr[j + 1]]


@dataclass(frozen=True)
class HrankResult:
    rank: int
    forced: frozenset

    @property
    def hrank(self) -> int:
        return len(self.forced)


def rank_hrank(A: BitMatrix, workspace: "_kernels.Gf2Workspace | None" = None) -> HrankResult:
    """Gaussian-elimination rank and the set of forced coordinates.

    Coordinate ``j`` is forced iff ker(A) is contained in {x : x_j = 0},
    i.e. the unit vector e_j lies in the span of A's columns.
    """
    keep = np.ones(A.m, dtype=np.uint8)
    rank, forced = _kernels.gf2_rank_forced(A.indptr, A.rowidx, keep, A.k, True, workspace)
    return HrankResult(rank=int(rank), forced=frozenset(np.nonzero(forced)[0].tolist()))


def subsample(A: BitMatrix, p: float, q: float, rng: np.random.Generator) -> BitMatrix:
    """Keep each row w.p. ``p`` and each column w.p. ``q``, independently."""
    if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0):
        raise ValueError("keep probabilities must lie in [0, 1]")
    keep_rows = rng.random(A.k) < p
    keep_cols = np.nonzero(rng.random(A.m) < q)[0]
    newrow = np.cumsum(keep_rows) - 1
    cols = []
    for j in keep_cols:
        rows = A.column(int(j))
        rows = rows[keep_rows[rows]]
        cols.append(newrow[rows])
    k_new = int(keep_rows.sum())
    lens = np.array([c.shape[0] for c in cols], dtype=np.int64)
    indptr = np.zeros(len(cols) + 1, dtype=np.int64)
    np.cumsum(lens, out=indptr[1:])
    rowidx = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    return BitMatrix(k=k_new, m=len(cols), indptr=indptr, rowidx=rowidx)


def map_ber_linear(G: BitMatrix, eps: float, trials: int, rng: np.random.Generator) -> float:
    """Monte-Carlo bit-MAP BER of the linear code with generator ``G`` over
    a BEC with erasure probability ``eps``.

    Per trial the unerased columns are kept and the BER contribution is
    (k - hrank) / (2k): forced bits are decoded exactly, the rest cannot be
    guessed better than random.
    """
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    ws = None
    if _kernels.USING_NUMBA:
        ws = _kernels.Gf2Workspace(G.k, min(G.k, G.m))
    total = 0.0
    for _ in range(trials):
        keep = (rng.random(G.m) >= eps).astype(np.uint8)
        _, forced = _kernels.gf2_rank_forced(G.indptr, G.rowidx, keep, G.k, True, ws)
        hr = int(forced.sum())
        total += (G.k - hr) / (2.0 * G.k)
    return total / trials


def brute_force_marginals(graph: FactorGraph, received: ReceivedWord) -> np.ndarray:
    """Exact posterior P(S_i = 0) by enumerating all 2^k sources (k <= 24).

    Sources inconsistent with any unerased coded bit (or PARITY constraint)
    are discarded; marginals are empirical frequencies under a uniform prior.
    """
    k = graph.k
    if k > 24:
        raise ValueError("brute force limited to k <= 24")
    n_src = 1 << k
    states = np.arange(n_src, dtype=np.int64)
    mask = np.ones(n_src, dtype=bool)
    pos = 0
    for kind, idx in graph.checks:
        if kind.emitted:
            obs = int(received.symbols[pos])
            pos += 1
            if obs == ERASED:
                continue
        else:
            obs = 0
        count = np.zeros(n_src, dtype=np.int8)
        for i in idx:
            count += ((states >> i) & 1).astype(np.int8)
        if kind.kind == "MAJ":
            out = count > (kind.arity // 2)
        else:
            out = (count % 2).astype(bool)
        mask &= out == bool(obs)
    total = int(mask.sum())
    if total == 0:
        raise ContradictionError("no source word is consistent with the observations")
    marg = np.empty(k, dtype=float)
    for i in range(k):
        ones = int((((states >> i) & 1).astype(bool) & mask).sum())
        marg[i] = 1.0 - ones / total
    return marg


__all__ = [
    "BitMatrix",
    "HrankResult",
    "ContradictionError",
    "rank_hrank",
    "subsample",
    "map_ber_linear",
    "brute_force_marginals",
]

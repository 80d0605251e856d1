"""Check-regular factor-graph ensembles: sampling, encoding, serialization.

A code instance is a :class:`FactorGraph`: ``k`` source variables and a list
of checks, each a Boolean function (majority, parity, or an always-observed
zero parity constraint) applied to a tuple of distinct variable indices.
Systematic codes carry a prefix of ``k`` arity-1 identity checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .channels import ERASED, ReceivedWord


class InfeasibleSpecError(ValueError):
    """The ensemble specification cannot be realized."""


class SamplingFailureError(RuntimeError):
    """Rejection sampling exceeded its retry budget."""


@dataclass(frozen=True)
class CheckKind:
    """Tagged check function: MAJ (odd arity >= 1), XOR (arity >= 1) or
    PARITY (a noiselessly-observed zero-valued XOR, arity >= 2)."""

    kind: str
    arity: int

    def __post_init__(self):
        if self.kind not in ("MAJ", "XOR", "PARITY"):
            raise ValueError(f"unknown check kind {self.kind!r}")
        if self.arity < 1:
            raise ValueError("arity must be >= 1")
        if self.kind == "MAJ" and self.arity % 2 == 0:
            raise ValueError("MAJ arity must be odd")
        if self.kind == "PARITY" and self.arity < 2:
            raise ValueError("PARITY arity must be >= 2")

    @classmethod
    def maj(cls, d: int) -> "CheckKind":
        return cls("MAJ", d)

    @classmethod
    def xor(cls, d: int) -> "CheckKind":
        return cls("XOR", d)

    @classmethod
    def parity(cls, d: int) -> "CheckKind":
        return cls("PARITY", d)

    @property
    def emitted(self) -> bool:
        """Whether this check produces a transmitted coded bit."""
        return self.kind != "PARITY"


@dataclass(frozen=True)
class DegreeProfile:
    """Mixture weights over check kinds; weights sum to one."""

    entries: tuple

    def __post_init__(self):
        entries = tuple((kind, float(w)) for kind, w in self.entries)
        object.__setattr__(self, "entries", entries)
        total = sum(w for _, w in entries)
        if any(w < 0 for _, w in entries):
            raise ValueError("profile weights must be non-negative")
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"profile weights must sum to 1 (got {total})")

    @classmethod
    def single(cls, kind: CheckKind) -> "DegreeProfile":
        return cls(((kind, 1.0),))

    def mean_arity(self) -> float:
        return sum(k.arity * w for k, w in self.entries)


@dataclass(frozen=True)
class EnsembleSpec:
    """Ensemble parameters; the derived block length is n = round(k / rate)."""

    k: int
    rate: float
    profile: DegreeProfile
    systematic: bool = False
    regular: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise InfeasibleSpecError("k must be >= 1")
        if not 0.0 < self.rate <= 1.0:
            raise InfeasibleSpecError("rate must lie in (0, 1]")
        if self.systematic and self.n < self.k:
            raise InfeasibleSpecError("systematic code needs n >= k")

    @property
    def n(self) -> int:
        return int(round(self.k / self.rate))


@dataclass(frozen=True)
class FactorGraph:
    """Bipartite variable/check structure with a Boolean function per check."""

    k: int
    checks: tuple
    systematic_prefix: int = 0

    def __post_init__(self):
        object.__setattr__(self, "checks", tuple((kind, tuple(int(i) for i in idx)) for kind, idx in self.checks))

    @cached_property
    def emitted_indices(self) -> np.ndarray:
        """Indices (into ``checks``) of checks that emit coded bits."""
        return np.array([i for i, (kind, _) in enumerate(self.checks) if kind.emitted], dtype=np.int64)

    @property
    def n_emitted(self) -> int:
        return int(self.emitted_indices.shape[0])

    @cached_property
    def flat(self):
        """Flattened check arrays: (ptr, evar, kindcode, arity) with kind codes
        0=MAJ, 1=XOR, 2=PARITY."""
        n = len(self.checks)
        arities = np.array([kind.arity for kind, _ in self.checks], dtype=np.int64)
        codes = np.array(
            [{"MAJ": 0, "XOR": 1, "PARITY": 2}[kind.kind] for kind, _ in self.checks], dtype=np.int8
        )
        ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(arities, out=ptr[1:])
        evar = np.empty(int(ptr[-1]), dtype=np.int64)
        for i, (_, idx) in enumerate(self.checks):
            evar[ptr[i] : ptr[i + 1]] = idx
        return ptr, evar, codes, arities


def _largest_remainder_counts(weights, total: int) -> np.ndarray:
    """Integer counts summing to ``total`` proportional to ``weights``."""
    w = np.asarray(weights, dtype=float)
    raw = w * total
    base = np.floor(raw).astype(np.int64)
    short = total - int(base.sum())
    if short > 0:
        order = np.argsort(-(raw - base), kind="stable")
        base[order[:short]] += 1
    return base


def _sample_subsets(rng: np.random.Generator, count: int, d: int, k: int) -> np.ndarray:
    """Draw ``count`` uniform d-subsets of [0, k) as rows (resampling dups)."""
    if d > k:
        raise InfeasibleSpecError(f"arity {d} exceeds variable count {k}")
    idx = rng.integers(0, k, size=(count, d), dtype=np.int64)
    if d == 1:
        return idx
    while True:
        srt = np.sort(idx, axis=1)
        bad = np.any(srt[:, 1:] == srt[:, :-1], axis=1)
        nbad = int(bad.sum())
        if nbad == 0:
            return idx
        idx[bad] = rng.integers(0, k, size=(nbad, d), dtype=np.int64)


def _sample_regular(rng: np.random.Generator, arities: np.ndarray, k: int, max_retries: int = 100) -> np.ndarray:
    """Configuration-model pairing with per-check duplicate rejection."""
    total = int(arities.sum())
    if total % k != 0:
        raise InfeasibleSpecError(f"regularity infeasible: {total} stubs over {k} variables")
    var_deg = total // k
    stubs = np.repeat(np.arange(k, dtype=np.int64), var_deg)
    rng.shuffle(stubs)
    ptr = np.zeros(arities.shape[0] + 1, dtype=np.int64)
    np.cumsum(arities, out=ptr[1:])
    for _ in range(max_retries):
        bad_slots = []
        ok = True
        for c in range(arities.shape[0]):
            seg = stubs[ptr[c] : ptr[c + 1]]
            if np.unique(seg).shape[0] != seg.shape[0]:
                ok = False
                bad_slots.append(np.arange(ptr[c], ptr[c + 1]))
        if ok:
            return stubs, ptr
        slots = np.concatenate(bad_slots)
        vals = stubs[slots].copy()
        rng.shuffle(vals)
        stubs[slots] = vals
    raise SamplingFailureError("configuration-model pairing failed within retry budget")


def sample_graph(spec: EnsembleSpec, rng: np.random.Generator | None = None) -> FactorGraph:
    """Sample a factor graph from the ensemble.

    A pure function of ``(spec, spec.seed)`` when ``rng`` is omitted.  With
    ``systematic`` set, the first ``k`` checks are identity (MAJ arity-1)
    checks.  With ``regular`` set, every variable has the same membership
    count over non-identity checks (configuration-model pairing).
    """
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    k = spec.k
    checks: list = []
    if spec.systematic:
        ident = CheckKind.maj(1)
        checks.extend((ident, (i,)) for i in range(k))
    n_ns = spec.n - (k if spec.systematic else 0)
    kinds = [kind for kind, _ in spec.profile.entries]
    counts = _largest_remainder_counts([w for _, w in spec.profile.entries], n_ns)
    if spec.regular:
        arities = np.concatenate([np.full(c, kind.arity, dtype=np.int64) for kind, c in zip(kinds, counts)]) if kinds else np.zeros(0, dtype=np.int64)
        stubs, ptr = _sample_regular(rng, arities, k)
        pos = 0
        for kind, c in zip(kinds, counts):
            for _ in range(c):
                checks.append((kind, tuple(stubs[ptr[pos] : ptr[pos + 1]])))
                pos += 1
    else:
        for kind, c in zip(kinds, counts):
            if c == 0:
                continue
            idx = _sample_subsets(rng, int(c), kind.arity, k)
            checks.extend((kind, tuple(row)) for row in idx)
    return FactorGraph(k=k, checks=tuple(checks), systematic_prefix=k if spec.systematic else 0)


class ConstraintViolationError(ValueError):
    """A PARITY constraint is violated by the supplied source."""


def encode(graph: FactorGraph, source) -> np.ndarray:
    """Apply every check to the source; returns the emitted coded bits.

    MAJ outputs 1 iff a strict majority of its inputs is 1; XOR outputs the
    parity.  PARITY checks are not emitted but must evaluate to zero.
    """
    s = np.asarray(source, dtype=np.int64)
    if s.shape[0] != graph.k:
        raise ValueError("source length must equal k")
    ptr, evar, codes, arities = graph.flat
    if evar.shape[0] == 0:
        return np.zeros(0, dtype=np.int8)
    sums = np.add.reduceat(s[evar], ptr[:-1])
    vals = np.where(codes == 0, sums > arities // 2, sums % 2).astype(np.int8)
    if np.any(vals[codes == 2] != 0):
        raise ConstraintViolationError("PARITY constraint violated by source")
    return vals[codes != 2]


def degree_stats(graph: FactorGraph) -> np.ndarray:
    """Histogram of variable degrees over non-identity-prefix checks.

    Entry ``h[d]`` counts variables belonging to exactly ``d`` checks beyond
    the systematic prefix; the mean equals (sum of arities) / k.
    """
    ptr, evar, _, _ = graph.flat
    start = int(ptr[graph.systematic_prefix])
    deg = np.bincount(evar[start:], minlength=graph.k)
    return np.bincount(deg)


def observed_subgraph(graph: FactorGraph, received: ReceivedWord) -> FactorGraph:
    """Sub-graph keeping PARITY checks and emitted checks with unerased output."""
    emitted = graph.emitted_indices
    keep = set()
    for pos, ci in enumerate(emitted):
        if received.symbols[pos] != ERASED:
            keep.add(int(ci))
    checks = []
    sys_prefix = 0
    for i, (kind, idx) in enumerate(graph.checks):
        if not kind.emitted or i in keep:
            checks.append((kind, idx))
            if i < graph.systematic_prefix:
                sys_prefix += 1
    return FactorGraph(k=graph.k, checks=tuple(checks), systematic_prefix=sys_prefix)


def serialize_graph(graph: FactorGraph) -> str:
    """Line-oriented text form: header ``k n systematic`` then one check per line."""
    lines = [f"{graph.k} {len(graph.checks)} {graph.systematic_prefix}"]
    for kind, idx in graph.checks:
        lines.append(" ".join([kind.kind, str(kind.arity)] + [str(i) for i in idx]))
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> FactorGraph:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    k, n, sysprefix = (int(t) for t in lines[0].split())
    checks = []
    for ln in lines[1 : n + 1]:
        toks = ln.split()
        kind = CheckKind(toks[0], int(toks[1]))
        idx = tuple(int(t) for t in toks[2 : 2 + kind.arity])
        if len(idx) != kind.arity:
            raise ValueError(f"check line has wrong index count: {ln!r}")
        checks.append((kind, idx))
    if len(checks) != n:
        raise ValueError("check count does not match header")
    return FactorGraph(k=k, checks=tuple(checks), systematic_prefix=sysprefix)


def serialize_profile(profile: DegreeProfile) -> str:
    """Profile file format: one ``KIND arity weight`` line per entry."""
    return "\n".join(f"{k.kind} {k.arity} {w:.12g}" for k, w in profile.entries) + "\n"


def parse_profile(text: str) -> DegreeProfile:
    entries = []
    for ln in text.strip().splitlines():
        if not ln.strip() or ln.lstrip().startswith("#"):
            continue
        toks = ln.split()
        entries.append((CheckKind(toks[0], int(toks[1])), float(toks[2])))
    return DegreeProfile(tuple(entries))


__all__ = [
    "CheckKind",
    "DegreeProfile",
    "EnsembleSpec",
    "FactorGraph",
    "InfeasibleSpecError",
    "SamplingFailureError",
    "ConstraintViolationError",
    "sample_graph",
    "encode",
    "degree_stats",
    "observed_subgraph",
    "serialize_graph",
    "parse_graph",
    "serialize_profile",
    "parse_profile",
]

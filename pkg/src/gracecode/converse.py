"""Single-point and two-point converse (lower) bounds on erasure BER.

Anchoring a code's performance at one erasure rate constrains how well it can
do at any other rate; these bounds quantify the trade-off for general codes,
linear codes, and (linear-)systematic codes, plus area-theorem tools on small
exhaustively-enumerable codes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .channels import h_b, h_b_inv
from .exactdec import BitMatrix

_GRID = 2000
_REFINE_TOL = 1e-10
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_max(f, lo: float, hi: float, tol: float = _REFINE_TOL) -> float:
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return max(fc, fd, f(0.5 * (a + b)))


def _sup(f, lo: float, hi: float, n: int = _GRID, open_ends: bool = True) -> float:
    """Grid scan + golden-section refinement; endpoints are approached but
    never evaluated when ``open_ends`` (suprema may live at open endpoints)."""
    xs = np.linspace(lo, hi, n + 2)
    if open_ends:
        xs = xs[1:-1]
    vals = np.array([f(float(x)) for x in xs])
    i = int(np.argmax(vals))
    a = float(xs[i - 1]) if i > 0 else lo
    b = float(xs[i + 1]) if i + 1 < xs.shape[0] else hi
    return max(float(vals[i]), _golden_max(f, a, b))


@dataclass(frozen=True)
class AnchorPoint:
    """Anchor: BER <= delta over BEC(eps) for a rate-R code."""

    eps: float
    delta: float
    rate: float

    def __post_init__(self):
        if not 0.0 <= self.eps <= 1.0:
            raise ValueError("anchor eps must lie in [0, 1]")
        if not 0.0 <= self.delta <= 0.5:
            raise ValueError("anchor delta must lie in [0, 1/2]")
        if not 0.0 < self.rate <= 1.0:
            raise ValueError("rate must lie in (0, 1]")

    @property
    def rho(self) -> float:
        return 1.0 / self.rate


@dataclass(frozen=True)
class BoundCurve:
    """A lower-bound curve over an erasure (or load) grid."""

    kind: str
    xs: np.ndarray
    values: np.ndarray
    anchor: AnchorPoint | None = None
    x_axis: str = "eps"

    def __post_init__(self):
        object.__setattr__(self, "xs", np.asarray(self.xs, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.xs.shape != self.values.shape:
            raise ValueError("xs and values must have matching shapes")


def shannon_single_point(R: float, C: float) -> float:
    """delta* with R(1 - h_b(delta*)) = C, clamped to 0 when C >= R."""
    if not 0.0 < R <= 1.0:
        raise ValueError("R must lie in (0, 1]")
    if not 0.0 <= C <= 1.0:
        raise ValueError("C must lie in [0, 1]")
    if C >= R:
        return 0.0
    return float(h_b_inv(1.0 - C / R))


def linear_single_point(rho: float, eps: float) -> float:
    """max(0, (1 - rho(1-eps))/2) for linear codes of rate 1/rho."""
    if rho < 1.0:
        raise ValueError("rho must be >= 1")
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    return max(0.0, (1.0 - rho * (1.0 - eps)) / 2.0)


def linear_two_point(rho: float, delta1: float, eps1: float, eps2: float) -> float:
    """Lower bound on BER(eps2) for a linear code with BER(eps1) <= delta1."""
    if rho < 1.0:
        raise ValueError("rho must be >= 1")
    if delta1 > eps1 / 2.0 + 1e-12:
        raise ValueError("anchor requires delta1 <= eps1/2")
    if eps2 == eps1:
        return min(max(delta1, 0.0), 0.5)
    if eps2 < eps1:
        gamma = eps1 - 2.0 * delta1
        inner = (eps2 / eps1) * gamma + (rho - 1.0) * (1.0 - eps1) - gamma
        kappa = (eps2 - ((1.0 - eps2) / (1.0 - eps1)) * inner) / 2.0
        return min(max(kappa, 0.0), 0.5)
    val = eps2 / 2.0 - (eps2 / (eps2 - eps1)) * (1.0 / (1.0 - eps1)) * (
        delta1 - 0.5 * (1.0 - rho * (1.0 - eps1))
    )
    return min(max(val, 0.0), 0.5)


def _eta(delta_star: float, eps: float, tau: float, R: float) -> float:
    """sup_q of [h_b_inv(clamped excess-rate expression) - q] / (1 - 2q)."""
    if delta_star >= 0.5:
        return 0.5
    base = 1.0 - (1.0 - tau) / R
    scale = (1.0 - tau) / (1.0 - eps) if eps < 1.0 else 0.0
    hd = float(h_b(delta_star))

    def val(q: float) -> float:
        if q >= 0.5 - 1e-9:
            return -math.inf
        conv = q * (1.0 - delta_star) + (1.0 - q) * delta_star
        arg = base + scale * (float(h_b(conv)) - hd)
        arg = min(max(arg, 0.0), 1.0)
        return (float(h_b_inv(arg)) - q) / (1.0 - 2.0 * q)

    # vectorized grid scan (h_b / h_b_inv broadcast), scalar golden refine
    qs = np.linspace(0.0, 0.5, _GRID + 1)[:-1]
    conv = qs * (1.0 - delta_star) + (1.0 - qs) * delta_star
    arg = np.clip(base + scale * (h_b(conv) - hd), 0.0, 1.0)
    vals = (h_b_inv(arg) - qs) / (1.0 - 2.0 * qs)
    i = int(np.argmax(vals))
    a = float(qs[i - 1]) if i > 0 else 0.0
    b = float(qs[i + 1]) if i + 1 < qs.shape[0] else 0.5
    best = max(float(vals[i]), _golden_max(val, a, b))
    return min(max(best, 0.0), 0.5)


def general_two_point(R: float, delta_a: float, eps_a: float, eps: float) -> float:
    """Lower bound on achievable BER(eps) given BER(eps_a) <= delta_a.

    Degraded side (eps >= eps_a): eta(delta_a, eps_a, eps).  Upgraded side:
    the smallest y whose implied anchor performance eta(y, eps, eps_a) stays
    <= delta_a; an empty feasible set returns 0 (conservative).
    """
    if not 0.0 < R <= 1.0:
        raise ValueError("R must lie in (0, 1]")
    floor = shannon_single_point(R, 1.0 - eps_a)
    if delta_a < floor - 1e-9:
        raise ValueError("anchor lies below the Shannon limit at eps_a")
    if eps >= eps_a:
        return _eta(delta_a, eps_a, eps, R)
    ys = np.linspace(0.0, 0.5, _GRID + 1)
    prev_y = None
    for y in ys:
        if _eta(float(y), eps, eps_a, R) <= delta_a + 1e-12:
            if prev_y is None:
                return float(y)
            lo, hi = prev_y, float(y)
            while hi - lo > _REFINE_TOL:
                mid = 0.5 * (lo + hi)
                if _eta(mid, eps, eps_a, R) <= delta_a + 1e-12:
                    hi = mid
                else:
                    lo = mid
            return hi
        prev_y = float(y)
    return 0.0


def _zeta(x: float, eps2: float, eps1: float, R: float) -> float:
    """sup over eps0 in (0, eps2) of the area-theorem excess expression."""

    def val(e0: float) -> float:
        if eps2 - e0 <= 0.0 or eps1 - e0 <= 0.0:
            return -math.inf
        term = R - (1.0 - eps1) - e0 * x * R / (eps2 - e0)
        return (term / (eps1 - e0) - 1.0 + R) / R

    return _sup(val, 0.0, eps2)


def area_two_point(R: float, delta2: float, eps2: float, eps1: float, mode: str = "linear_systematic") -> float:
    """Area-theorem lower bound on BER(eps1) given BER(eps2) <= delta2 (eps2 < eps1)."""
    if not 0.0 < R <= 1.0:
        raise ValueError("R must lie in (0, 1]")
    if not eps2 < eps1:
        raise ValueError("requires eps2 < eps1")
    if mode == "linear_systematic":
        z = _zeta(2.0 * delta2, eps2, eps1, R)
        return min(max((eps1 / 2.0) * z, 0.0), 0.5) if z > 0.0 else 0.0
    if mode == "systematic":
        z = _zeta(float(h_b(delta2)), eps2, eps1, R)
        if z <= 0.0:
            return 0.0
        return min(max(eps1 * float(h_b_inv(min(z, 1.0))), 0.0), 0.5)
    raise ValueError(f"unknown mode {mode!r}")


def repetition_domination(eps2: float, t: float) -> float:
    """Smallest usable eps* = max(eps2, 1 - (1-t) eps2^2 / (1-eps2))."""
    if eps2 >= 1.0 or eps2 < 0.0:
        raise ValueError("eps2 must lie in [0, 1)")
    if t >= 1.0:
        raise ValueError("t must be < 1")
    return max(eps2, 1.0 - (1.0 - t) * eps2 * eps2 / (1.0 - eps2))


def threshold_comparison(eps_star: float):
    """(BSC lower, BSC upper) thresholds from a BEC threshold eps*."""
    if not 0.0 <= eps_star <= 1.0:
        raise ValueError("eps* must lie in [0, 1]")
    lower = (1.0 - math.sqrt(1.0 - eps_star * eps_star)) / 2.0
    upper = (1.0 - math.sqrt(1.0 - eps_star)) / 2.0
    return lower, upper


@dataclass(frozen=True)
class ExitResult:
    """Exact per-coordinate EXIT data of a small linear code.

    ``counts[i, a]`` counts erasure patterns of the other m-1 coordinates
    with exactly ``a`` erasures under which coordinate i is NOT forced.
    """

    k: int
    m: int
    counts: np.ndarray

    @property
    def rate(self) -> float:
        return self.k / self.m

    def h(self, eps):
        """Average EXIT value (1/m) sum_i h_i(eps)."""
        e = np.asarray(eps, dtype=float)
        a = np.arange(self.m)
        basis = np.power.outer(e, a) * np.power.outer(1.0 - e, self.m - 1 - a)
        tot = basis @ self.counts.sum(axis=0)
        out = tot / self.m
        return float(out) if e.ndim == 0 else out

    def p_b(self, eps):
        """Coded-bit BER eps * h(eps) / 2."""
        e = np.asarray(eps, dtype=float)
        out = e * np.asarray(self.h(eps)) / 2.0
        return float(out) if e.ndim == 0 else out

    @property
    def area(self) -> float:
        """Exact integral of h over [0, 1] (rational arithmetic)."""
        total = Fraction(0)
        mfact = math.factorial(self.m)
        csum = self.counts.sum(axis=0)
        for a in range(self.m):
            w = Fraction(math.factorial(a) * math.factorial(self.m - 1 - a), mfact)
            total += int(csum[a]) * w
        return float(total / self.m)


def exit_tools(G: BitMatrix) -> ExitResult:
    """Exhaustive EXIT analysis of the code generated by ``G`` (m <= 20)."""
    k, m = G.k, G.m
    if m > 20:
        raise ValueError("exhaustive EXIT analysis limited to m <= 20 coordinates")
    cols = []
    for j in range(m):
        v = 0
        for r in G.column(j):
            v |= 1 << int(r)
        cols.append(v)
    counts = np.zeros((m, m), dtype=np.int64)
    others = [[j for j in range(m) if j != i] for i in range(m)]
    for i in range(m):
        ci = cols[i]
        for mask in range(1 << (m - 1)):
            pivots: dict[int, int] = {}
            for b, j in enumerate(others[i]):
                if (mask >> b) & 1:
                    continue
                v = cols[j]
                while v:
                    low = (v & -v).bit_length() - 1
                    row = pivots.get(low)
                    if row is None:
                        pivots[low] = v
                        break
                    v ^= row
            v = ci
            while v:
                low = (v & -v).bit_length() - 1
                row = pivots.get(low)
                if row is None:
                    break
                v ^= row
            if v:
                counts[i, bin(mask).count("1")] += 1
    return ExitResult(k=k, m=m, counts=counts)


__all__ = [
    "AnchorPoint",
    "BoundCurve",
    "ExitResult",
    "shannon_single_point",
    "linear_single_point",
    "linear_two_point",
    "general_two_point",
    "area_two_point",
    "repetition_domination",
    "threshold_comparison",
    "exit_tools",
]

"""Binary erasure/symmetric channels, BMS metrics, and matched surrogates.

All entropies are in bits (base-2 logarithms).  Erased symbols are encoded as
``ERASED`` (-1) in received words.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ERASED = -1


def h_b(x):
    """Binary entropy in bits; accepts scalars or arrays, h_b(0)=h_b(1)=0."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros_like(arr)
    mask = (arr > 0.0) & (arr < 1.0)
    xm = arr[mask]
    out[mask] = -xm * np.log2(xm) - (1.0 - xm) * np.log2(1.0 - xm)
    if np.isscalar(x) or np.asarray(x).ndim == 0:
        return float(out[0])
    return out


def h_b_inv(y, tol: float = 1e-12):
    """Inverse of binary entropy on [0, 1/2] by bisection to ``tol``."""
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(y_arr < -1e-9) or np.any(y_arr > 1.0 + 1e-9):
        raise ValueError("h_b_inv argument must lie in [0, 1]")
    y_arr = np.clip(y_arr, 0.0, 1.0)
    lo = np.zeros_like(y_arr)
    hi = np.full_like(y_arr, 0.5)
    for _ in range(64):
        if np.all(hi - lo <= tol):
            break
        mid = 0.5 * (lo + hi)
        below = h_b(mid) < y_arr
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out = 0.5 * (lo + hi)
    out = np.where(y_arr >= 1.0, 0.5, out)
    out = np.where(y_arr <= 0.0, 0.0, out)
    if np.isscalar(y) or np.asarray(y).ndim == 0:
        return float(out[0])
    return out


@dataclass(frozen=True)
class ChannelParam:
    """Tagged channel parameter: BEC(erasure eps) or BSC(crossover delta)."""

    kind: str
    param: float

    def __post_init__(self):
        if self.kind not in ("BEC", "BSC"):
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if self.kind == "BEC" and not 0.0 <= self.param <= 1.0:
            raise ValueError("BEC erasure probability must lie in [0, 1]")
        if self.kind == "BSC" and not 0.0 <= self.param <= 0.5:
            raise ValueError("BSC crossover must lie in [0, 1/2]")

    @classmethod
    def bec(cls, eps: float) -> "ChannelParam":
        return cls("BEC", float(eps))

    @classmethod
    def bsc(cls, delta: float) -> "ChannelParam":
        return cls("BSC", float(delta))


@dataclass
class ReceivedWord:
    """Per-position channel output: 0, 1 or ERASED (-1)."""

    symbols: np.ndarray
    channel: ChannelParam

    def __post_init__(self):
        self.symbols = np.asarray(self.symbols, dtype=np.int8)
        if self.channel.kind == "BSC" and np.any(self.symbols == ERASED):
            raise ValueError("BSC outputs contain no erasures")

    def __len__(self) -> int:
        return int(self.symbols.shape[0])


@dataclass(frozen=True)
class BMSummary:
    """Error probability, capacity (bits) and chi-square capacity of a BMS."""

    pe: float
    capacity: float
    chi2_capacity: float


def transmit(codeword, ch: ChannelParam, rng: np.random.Generator) -> ReceivedWord:
    """Send a bit sequence through the channel with i.i.d. per-symbol noise."""
    bits = np.asarray(codeword, dtype=np.int8)
    if ch.kind == "BEC":
        erased = rng.random(bits.shape[0]) < ch.param
        out = np.where(erased, np.int8(ERASED), bits)
    else:
        flips = rng.random(bits.shape[0]) < ch.param
        out = np.where(flips, 1 - bits, bits).astype(np.int8)
    return ReceivedWord(out, ch)


def bms_metrics(ch: ChannelParam) -> BMSummary:
    """Closed-form BMS metrics: BEC_eps -> (eps/2, 1-eps, 1-eps);
    BSC_delta -> (delta, 1-h_b(delta), (1-2 delta)^2)."""
    if ch.kind == "BEC":
        eps = ch.param
        return BMSummary(pe=eps / 2.0, capacity=1.0 - eps, chi2_capacity=1.0 - eps)
    delta = ch.param
    return BMSummary(pe=delta, capacity=1.0 - h_b(delta), chi2_capacity=(1.0 - 2.0 * delta) ** 2)


def matched_surrogates(value, matching: str):
    """Extremal BEC/BSC pair matched to a channel or metric value.

    ``matching`` selects the matched quantity: ``degradation`` (error
    probability delta -> (BEC(2 delta), BSC(delta))), ``capacity``
    (C -> (BEC(1-C), BSC(h_b_inv(1-C)))) or ``chi2``
    (eta -> (BEC(1-eta), BSC((1-sqrt(eta))/2))).  ``value`` may be a float or
    a ChannelParam whose corresponding metric is used.
    """
    if isinstance(value, ChannelParam):
        metrics = bms_metrics(value)
        value = {"degradation": metrics.pe, "capacity": metrics.capacity, "chi2": metrics.chi2_capacity}[matching]
    v = float(value)
    if matching == "degradation":
        if not 0.0 <= v <= 0.5:
            raise ValueError("error probability must lie in [0, 1/2]")
        return ChannelParam.bec(min(2.0 * v, 1.0)), ChannelParam.bsc(v)
    if matching == "capacity":
        if not 0.0 <= v <= 1.0:
            raise ValueError("capacity must lie in [0, 1]")
        return ChannelParam.bec(1.0 - v), ChannelParam.bsc(h_b_inv(1.0 - v))
    if matching == "chi2":
        if not 0.0 <= v <= 1.0:
            raise ValueError("chi-square capacity must lie in [0, 1]")
        return ChannelParam.bec(1.0 - v), ChannelParam.bsc((1.0 - np.sqrt(v)) / 2.0)
    raise ValueError(f"unknown matching {matching!r}")


def binary_divergence(a, b):
    """KL divergence d(a || b) between Bernoulli parameters, in nats."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = np.where(a > 0, a * np.log(a / b), 0.0)
        t2 = np.where(a < 1, (1.0 - a) * np.log((1.0 - a) / (1.0 - b)), 0.0)
    return t1 + t2


def _f_surface(u, v):
    """The auxiliary two-variable function whose diagonal vanishes."""
    term1 = 2.0 * np.log((1.0 - u) * (1.0 + v) / ((1.0 + u) * (1.0 - v)))
    term2 = -4.0 * (v / (u * (1.0 - v**2))) * (u + v)
    term3 = 4.0 * u / (1.0 - u**2)
    term4 = (4.0 * v**2 / (u * (1.0 - v**2) ** 2)) * (2.0 * (1.0 - u) * v + (1.0 - v) ** 2)
    return term1 + term2 + term3 + term4


def mgl_variant_check(p: float, q: float, grid_size: int):
    """Numeric convexity probe of x -> d(p * delta(x) || q * delta(x)).

    ``delta(x) = (1 - sqrt(x))/2`` and ``*`` is binary convolution.  Returns
    ``(min_second_difference, max |f(u,u)|)`` over an open-interval grid;
    convexity holds when the first value is >= -tolerance and the diagonal
    identity when the second is ~0.
    """
    if not (0.0 < p < 1.0 and 0.0 < q < 1.0):
        raise ValueError("p, q must lie in (0, 1)")
    if grid_size < 3:
        raise ValueError("grid_size must be >= 3")
    xs = np.linspace(0.0, 1.0, grid_size + 2)[1:-1]
    delta = (1.0 - np.sqrt(xs)) / 2.0
    a = p * (1.0 - delta) + (1.0 - p) * delta
    b = q * (1.0 - delta) + (1.0 - q) * delta
    vals = binary_divergence(a, b)
    second = vals[:-2] - 2.0 * vals[1:-1] + vals[2:]
    us = np.linspace(0.0, 1.0, grid_size + 2)[1:-1]
    diag = np.abs(_f_surface(us, us))
    return float(second.min()), float(diag.max())


__all__ = [
    "ERASED",
    "ChannelParam",
    "ReceivedWord",
    "BMSummary",
    "transmit",
    "bms_metrics",
    "matched_surrogates",
    "mgl_variant_check",
    "binary_divergence",
    "h_b",
    "h_b_inv",
]

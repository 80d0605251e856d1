"""Error/entropy polynomial machinery for majority and LDGM ensembles.

A degree-d variable sees d messages drawn from a :class:`MessageAlphabet`:
likelihood-ratio magnitudes m >= 1 with q-dependent weights (events that fully
determine the bit carry zero error and are dropped from the alphabet).  The
d-th error polynomial E_d(q) averages a payoff of the posterior error over
all message-type and agreement patterns; truncated ensemble averages over a
degree law give the E-functions driving density evolution, alongside closed
forms for LDGM, mixed, and systematic-regular ensembles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np
from scipy.special import gammaln
from scipy.stats import binom as _binom
from scipy.stats import poisson as _poisson

from .channels import h_b
from .ensemble import DegreeProfile

_MAX_DEGREE = 14
_MAX_ENTRIES = 7
_BSC_MIN_P = 1e-12


@dataclass(frozen=True)
class EPolynomial:
    """Power-basis polynomial in q; coeffs[i] multiplies q**i."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def as_array(self) -> np.ndarray:
        return np.array(self.coeffs)

    def __call__(self, q):
        return np.polynomial.polynomial.polyval(q, self.as_array())


@dataclass(frozen=True)
class MessageAlphabet:
    """Message types for one check seen from a variable: (magnitude, weight).

    Magnitudes are likelihood ratios folded to m >= 1; weights are
    polynomials in q (constants for BSC alphabets built at a fixed crossover).
    Total retained mass may be < 1: the remainder is fully-determining events.
    """

    channel: str
    entries: tuple

    def __post_init__(self):
        if self.channel not in ("BEC", "BSC"):
            raise ValueError(f"unknown channel tag {self.channel!r}")
        if len(self.entries) > _MAX_ENTRIES:
            raise ValueError(f"alphabet limited to {_MAX_ENTRIES} entries")
        ent = []
        for m, w in self.entries:
            m = float(m)
            if not math.isfinite(m) or m < 1.0:
                raise ValueError("magnitudes must be finite and >= 1")
            if not isinstance(w, EPolynomial):
                w = EPolynomial(tuple(np.atleast_1d(w)))
            ent.append((m, w))
        object.__setattr__(self, "entries", tuple(ent))


def f_alphabet(family: str, p: float | None = None) -> MessageAlphabet:
    """Built-in message alphabets: LDMC3_BEC, LDMC5_BEC, LDMC3_BSC(p)."""
    tag = family.upper().replace("-", "_")
    if tag == "LDMC3_BEC":
        return MessageAlphabet(
            "BEC",
            (
                (1.0, EPolynomial((0.0, 0.0, 0.5))),
                (2.0, EPolynomial((0.0, 1.5, -1.5))),
                (3.0, EPolynomial((1.0, -2.0, 1.0))),
            ),
        )
    if tag == "LDMC5_BEC":
        return MessageAlphabet(
            "BEC",
            (
                (1.0, EPolynomial((0.0, 0.0, 0.0, 1.0, -0.375))),
                (2.0, EPolynomial((0.0, 0.0, 0.0, 2.25, -2.25))),
                (4.0 / 3.0, EPolynomial((0.0, 0.0, 2.625, -5.25, 2.625))),
                (3.0, EPolynomial((0.0, 0.0, 3.0, -6.0, 3.0))),
                (7.0 / 4.0, EPolynomial((0.0, 2.75, -8.25, 8.25, -2.75))),
                (4.0, EPolynomial((0.0, 1.25, -3.75, 3.75, -1.25))),
                (11.0 / 5.0, EPolynomial((1.0, -4.0, 6.0, -4.0, 1.0))),
            ),
        )
    if tag == "LDMC3_BSC":
        if p is None or not 0.0 < p <= 0.5:
            raise ValueError("LDMC3_BSC requires a crossover p in (0, 1/2]")
        rho = (1.0 - p) / p
        return MessageAlphabet(
            "BSC",
            (
                (1.0 + rho + 1.0 / rho, EPolynomial((0.5,))),
                (1.0 + 2.0 * rho, EPolynomial((p / 2.0,))),
                (1.0 + 2.0 / rho, EPolynomial(((1.0 - p) / 2.0,))),
            ),
        )
    raise ValueError(f"unknown alphabet family {family!r}")


def _apply_payoff(e: np.ndarray, payoff: str) -> np.ndarray:
    if payoff == "error":
        return e
    if payoff == "entropy":
        return np.atleast_1d(h_b(e))
    if payoff == "chi2":
        return 1.0 - (1.0 - 2.0 * e) ** 2
    raise ValueError(f"unknown payoff {payoff!r}")


_LATTICE_CACHE: dict = {}
_LATTICE_CACHE_MAX_ROWS = 200_000


def _compositions(d: int, K: int):
    """All weak compositions of d into K parts with log-multinomial weights."""
    key = (d, K)
    hit = _LATTICE_CACHE.get(key)
    if hit is not None:
        return hit
    if K == 0:
        z = np.zeros((1, 0), dtype=np.int16)
        logc = np.zeros(1)
    else:
        bars = np.array(list(combinations(range(d + K - 1), K - 1)), dtype=np.int64)
        bars = bars.reshape(-1, K - 1)
        left = np.full((bars.shape[0], 1), -1, dtype=np.int64)
        right = np.full((bars.shape[0], 1), d + K - 1, dtype=np.int64)
        z = (np.diff(np.hstack([left, bars, right]), axis=1) - 1).astype(np.int16)
        logc = gammaln(d + 1) - gammaln(z.astype(np.float64) + 1.0).sum(axis=1)
    if z.shape[0] <= _LATTICE_CACHE_MAX_ROWS:
        _LATTICE_CACHE[key] = (z, logc)
    return z, logc


def _columns(entries):
    """Per-lattice-column scalars: log-ratio increment, branch log-prob, owner.

    Unit-magnitude entries occupy one column; larger magnitudes split into
    agree/disagree columns with probabilities 1/(1+m) and m/(1+m).
    """
    col_l, col_logq, col_entry = [], [], []
    for j, (m, _) in enumerate(entries):
        if m == 1.0:
            col_l.append(0.0)
            col_logq.append(0.0)
            col_entry.append(j)
        else:
            col_l.append(-math.log(m))
            col_logq.append(math.log(1.0 / (1.0 + m)))
            col_entry.append(j)
            col_l.append(math.log(m))
            col_logq.append(math.log(m / (1.0 + m)))
            col_entry.append(j)
    return np.array(col_l), np.array(col_logq), np.array(col_entry, dtype=np.int64)


def _check_degree(d: int) -> None:
    if not 0 <= d <= _MAX_DEGREE:
        raise ValueError(f"degree must lie in [0, {_MAX_DEGREE}]")


@lru_cache(maxsize=512)
def _term_rep(alphabet: MessageAlphabet, d: int, payoff: str):
    """Nonnegative term representation: E_d(q) = sum_c coef_c prod_j w_j(q)^c_j.

    Returned as (type-count matrix, coefficients).  All coefficients are
    >= 0, so evaluation through this form is free of the catastrophic
    cancellation the expanded power basis exhibits at larger d.
    """
    entries = alphabet.entries
    col_l, col_logq, col_entry = _columns(entries)
    z, logc = _compositions(d, col_l.shape[0])
    llr = z @ col_l
    logp = logc + z @ col_logq
    e = 1.0 / (1.0 + np.exp(np.abs(llr)))
    vals = np.exp(logp) * _apply_payoff(e, payoff)
    n = len(entries)
    c_mat = np.zeros((z.shape[0], n), dtype=np.int16)
    for col in range(col_entry.shape[0]):
        c_mat[:, col_entry[col]] += z[:, col]
    uniq, inv = np.unique(c_mat, axis=0, return_inverse=True)
    coefs = np.bincount(inv, weights=vals, minlength=uniq.shape[0])
    return uniq, coefs


def eval_degree(alphabet: MessageAlphabet, d: int, payoff: str, q) -> np.ndarray:
    """Evaluate E_d at q through the stable nonnegative term representation."""
    uniq, coefs = _term_rep(alphabet, d, payoff)
    qa = np.atleast_1d(np.asarray(q, dtype=float))
    w = np.array([[max(float(wp(v)), 0.0) for _, wp in alphabet.entries] for v in qa])
    logw = np.log(np.maximum(w, 1e-300))  # zero weights become ~exp(-690) ~ 0
    expo = uniq.astype(float) @ logw.T  # (terms, nq)
    out = coefs @ np.exp(expo)
    if np.isscalar(q) or np.asarray(q).ndim == 0:
        return float(out[0])
    return out


@lru_cache(maxsize=512)
def _error_poly_cached(alphabet: MessageAlphabet, d: int, payoff: str) -> EPolynomial:
    entries = alphabet.entries
    n = len(entries)
    uniq, coefs = _term_rep(alphabet, d, payoff)
    powers = [[np.array([1.0]), entries[j][1].as_array()] for j in range(n)]

    def power(j: int, exp: int) -> np.ndarray:
        while len(powers[j]) <= exp:
            powers[j].append(np.convolve(powers[j][-1], powers[j][1]))
        return powers[j][exp]

    total = np.zeros(1)
    for row, cf in zip(uniq, coefs):
        poly = np.array([cf])
        for j in range(n):
            if row[j]:
                poly = np.convolve(poly, power(j, int(row[j])))
        if poly.shape[0] > total.shape[0]:
            total = np.concatenate([total, np.zeros(poly.shape[0] - total.shape[0])])
        total[: poly.shape[0]] += poly
    return EPolynomial(tuple(total))


def error_poly(alphabet: MessageAlphabet, d: int, payoff: str = "error") -> EPolynomial:
    """Degree-d payoff polynomial of the alphabet (payoff: error/entropy/chi2)."""
    _check_degree(d)
    if payoff not in ("error", "entropy", "chi2"):
        raise ValueError(f"unknown payoff {payoff!r}")
    return _error_poly_cached(alphabet, d, payoff)


@dataclass(frozen=True)
class DegreeLaw:
    """Degree distribution of a variable: Poisson(arity*alpha),
    Binomial(trials, alpha*rate), or an explicit pmf over 0..len-1."""

    kind: str
    arity: int = 0
    trials: int = 0
    rate: float = 0.0
    weights: tuple = ()

    def __post_init__(self):
        if self.kind not in ("poisson", "binomial", "explicit"):
            raise ValueError(f"unknown degree law {self.kind!r}")

    @classmethod
    def poisson(cls, arity: int) -> "DegreeLaw":
        return cls("poisson", arity=int(arity))

    @classmethod
    def binomial(cls, trials: int, rate: float) -> "DegreeLaw":
        return cls("binomial", trials=int(trials), rate=float(rate))

    @classmethod
    def explicit(cls, weights) -> "DegreeLaw":
        return cls("explicit", weights=tuple(float(w) for w in weights))

    def probabilities(self, alpha: float, D: int):
        """(pmf over degrees 0..D, P(Deg > D)) at load alpha."""
        ds = np.arange(D + 1)
        if self.kind == "poisson":
            mu = self.arity * alpha
            return _poisson.pmf(ds, mu), float(_poisson.sf(D, mu))
        if self.kind == "binomial":
            pr = alpha * self.rate
            if pr > 1.0 + 1e-12:
                raise ValueError("binomial degree law needs alpha*rate <= 1")
            pr = min(pr, 1.0)
            return _binom.pmf(ds, self.trials, pr), float(_binom.sf(D, self.trials, pr))
        w = np.array(self.weights)
        pmf = np.zeros(D + 1)
        upto = min(D + 1, w.shape[0])
        pmf[:upto] = w[:upto]
        return pmf, float(w[D + 1 :].sum())


@dataclass(frozen=True)
class EFunctionFamily:
    """Truncated ensemble E/H-function: degree-law average of E_d up to D.

    Tail convention: BEC families drop the mass beyond D (each dropped term
    only lowers the error); BSC families add 1/2 * P(Deg > D) for the error
    payoff and 1 * P(Deg > D) for entropy-type payoffs.
    """

    base: str
    channel: str
    payoff: str
    D: int
    law: DegreeLaw

    def __post_init__(self):
        if self.base not in ("ldmc3", "ldmc5"):
            raise ValueError(f"unknown family base {self.base!r}")
        if self.channel not in ("BEC", "BSC"):
            raise ValueError(f"unknown channel tag {self.channel!r}")
        if self.channel == "BSC" and self.base != "ldmc3":
            raise ValueError("BSC alphabets are available for ldmc3 only")
        if self.D < 0:
            raise ValueError("truncation D must be >= 0")

    @property
    def arity(self) -> int:
        return 3 if self.base == "ldmc3" else 5

    def degree_poly(self, d: int) -> EPolynomial:
        if self.channel != "BEC":
            raise ValueError("per-degree polynomials exist for BEC families only")
        return error_poly(f_alphabet(f"{self.base}_bec"), d, self.payoff)

    def evaluate(self, alpha: float, q):
        pmf, tail_p = self.law.probabilities(alpha, self.D)
        if self.channel == "BEC":
            qa = np.asarray(q, dtype=float)
            alph = f_alphabet(f"{self.base}_bec")
            tot = np.zeros_like(qa, dtype=float)
            for d in range(self.D + 1):
                if pmf[d] > 0.0:
                    tot = tot + pmf[d] * np.asarray(eval_degree(alph, d, self.payoff, qa))
            return float(tot) if np.isscalar(q) or np.asarray(q).ndim == 0 else tot
        tail_val = 0.5 if self.payoff == "error" else 1.0

        def one(p: float) -> float:
            p = min(max(float(p), _BSC_MIN_P), 0.5)
            alph = f_alphabet("ldmc3_bsc", p)
            s = sum(
                pmf[d] * eval_degree(alph, d, self.payoff, 0.0)
                for d in range(self.D + 1)
                if pmf[d] > 0.0
            )
            return s + tail_val * tail_p

        qa = np.asarray(q, dtype=float)
        if qa.ndim == 0:
            return one(float(qa))
        return np.array([one(v) for v in qa.ravel()]).reshape(qa.shape)


def build_family(
    base: str,
    channel: str = "BEC",
    payoff: str = "error",
    D: int = 10,
    law: DegreeLaw | None = None,
) -> EFunctionFamily:
    """Convenience constructor; the default law is Poisson(arity * alpha)."""
    base = base.lower().replace("-", "").replace("_", "")
    if base not in ("ldmc3", "ldmc5"):
        raise ValueError(f"unknown family base {base!r}")
    if law is None:
        law = DegreeLaw.poisson(3 if base == "ldmc3" else 5)
    return EFunctionFamily(base=base, channel=channel, payoff=payoff, D=D, law=law)


def closed_form_efun(
    kind: str,
    alpha: float,
    q,
    *,
    d: int | None = None,
    profile: DegreeProfile | None = None,
    rate: float | None = None,
    D: int = 10,
):
    """Closed-form BEC error functions.

    LDGM(d): (1/2) e^{-alpha d q^(d-1)}.  Mixed(profile): product form
    (1/2) prod_j 2 E_j(alpha*lambda_j, q) with XOR components in closed form
    and MAJ components through the truncated Poisson family.  SysRegular(d,
    R): (1 - alpha R) * E[Bin(d(1-R)/R, alpha R)-degree error].
    """
    tag = kind.lower()
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    qa = np.asarray(q, dtype=float)
    scalar = qa.ndim == 0
    if tag == "ldgm":
        if d is None or d < 1:
            raise ValueError("LDGM requires an arity d >= 1")
        out = 0.5 * np.exp(-alpha * d * qa ** (d - 1))
        return float(out) if scalar else out
    if tag == "sysregular":
        if d is None or rate is None:
            raise ValueError("SysRegular requires d and rate")
        m_real = d * (1.0 - rate) / rate
        m = round(m_real)
        if abs(m_real - m) > 1e-9:
            raise ValueError("SysRegular requires d(1-R)/R to be an integer")
        pr = alpha * rate
        if pr > 1.0 + 1e-12:
            raise ValueError("SysRegular requires alpha*R <= 1")
        pr = min(pr, 1.0)
        alph = f_alphabet(f"ldmc{d}_bec")
        pmf = _binom.pmf(np.arange(m + 1), m, pr)
        tot = np.zeros_like(qa, dtype=float)
        for i in range(m + 1):
            if pmf[i] > 0.0:
                tot = tot + pmf[i] * np.asarray(eval_degree(alph, i, "error", qa))
        out = (1.0 - pr) * tot
        return float(out) if scalar else out
    if tag == "mixed":
        if profile is None:
            raise ValueError("Mixed requires a degree profile")
        acc = np.full_like(qa, 0.5, dtype=float)
        for ck, lam in profile.entries:
            if lam == 0.0:
                continue
            if ck.kind == "XOR":
                factor = np.exp(-alpha * lam * ck.arity * qa ** (ck.arity - 1))
            elif ck.kind == "MAJ":
                fam = build_family(f"ldmc{ck.arity}", D=D)
                factor = 2.0 * np.asarray(fam.evaluate(alpha * lam, qa), dtype=float)
            else:
                raise ValueError("Mixed profiles use XOR and MAJ components only")
            acc = acc * factor
        return float(acc) if scalar else acc
    raise ValueError(f"unknown closed form kind {kind!r}")


def d_function(family, alpha: float, q):
    """D(alpha, q) = (1-q)/2 - E(alpha, q); zeros are BP fixed points."""
    qa = np.asarray(q, dtype=float)
    out = (1.0 - qa) / 2.0 - np.asarray(family.evaluate(alpha, qa), dtype=float)
    return float(out) if qa.ndim == 0 else out


def first_zero(family, alpha: float, grid: int = 2001, tol: float = 1e-10):
    """Smallest root of q -> D(alpha, q) in (0, 1], or None."""
    qs = np.linspace(0.0, 1.0, grid)[1:]
    vals = np.asarray(d_function(family, alpha, qs), dtype=float)
    for i in range(vals.shape[0]):
        if vals[i] == 0.0:
            return float(qs[i])
        if i > 0 and vals[i - 1] * vals[i] < 0.0:
            lo, hi = float(qs[i - 1]), float(qs[i])
            flo = vals[i - 1]
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                fm = d_function(family, alpha, mid)
                if fm == 0.0:
                    return mid
                if (flo > 0) == (fm > 0):
                    lo, flo = mid, fm
                else:
                    hi = mid
            return 0.5 * (lo + hi)
    return None


@dataclass(frozen=True)
class ClosedFormFamily:
    """Adapter exposing a closed-form E-function as a family with evaluate()."""

    kind: str
    d: int | None = None
    profile: DegreeProfile | None = None
    rate: float | None = None
    D: int = 10
    channel: str = "BEC"
    payoff: str = "error"

    def evaluate(self, alpha: float, q):
        return closed_form_efun(
            self.kind, alpha, q, d=self.d, profile=self.profile, rate=self.rate, D=self.D
        )


__all__ = [
    "EPolynomial",
    "MessageAlphabet",
    "EFunctionFamily",
    "DegreeLaw",
    "ClosedFormFamily",
    "f_alphabet",
    "error_poly",
    "eval_degree",
    "build_family",
    "closed_form_efun",
    "d_function",
    "first_zero",
]

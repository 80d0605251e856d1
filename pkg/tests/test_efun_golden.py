"""Golden coefficient vectors and structural identities for E-polynomials."""

from __future__ import annotations

import numpy as np
import pytest

from gracecode.channels import h_b
from gracecode.efun import (
    DegreeLaw,
    EPolynomial,
    MessageAlphabet,
    build_family,
    closed_form_efun,
    d_function,
    error_poly,
    eval_degree,
    f_alphabet,
    first_zero,
)

# Reference coefficients (ascending powers of q) for the LDMC(3)/BEC
# erasure polynomials E_d, d = 0..10.
GOLDEN_LDMC3 = {
    0: [0.5],
    1: [0.25],
    2: [0.25, -0.25, 0.25, -0.25, 0.125],
    3: [0.15625, -0.09375, 4.440892e-16, -0.1875, 0.46875, -0.46875, 0.1875],
    4: [0.15625, -0.3125, 0.65625, -1.6875, 3.28125, -4.3125, 3.71875, -1.9375, 0.46875],
    5: [
        0.103515625, -0.126953125, 0.0390625, -0.4296875, 2.24609375, -6.15234375,
        10.9765625, -13.0859375, 10.087890625, -4.58007812500001, 0.9375,
    ],
    6: [
        0.103515625, -0.310546875, 0.981445312499996, -3.99414062499997,
        13.5791015624999, -34.7460937499998, 66.5722656249995, -95.5664062499994,
        102.12890625, -79.5214843749996, 42.9462890624997, -14.455078125, 2.2900390625,
    ],
    7: [
        0.070556640625, -0.131591796874999, 0.0820312499999894, -0.68359374999993,
        5.18676757812476, -22.3791503906245, 68.3422851562493, -156.953124999999,
        274.061279296874, -361.612548828124, 354.7236328125, -251.26171875,
        121.872802734375, -36.368896484375, 5.05517578125,
    ],
    8: [
        0.070556640625, -0.282226562499999, 1.18603515624997, -6.56933593749975,
        31.8554687499987, -121.303710937495, 361.467285156233, -849.672851562463,
        1587.56103515619, -2368.68652343741, 2821.08544921866, -2661.41503906243,
        1953.12304687496, -1078.21191406248, 421.901855468746, -104.389648437499,
        12.2824707031249,
    ],
    9: [
        0.0489273071289062, -0.122840881347652, 0.115905761718657, -0.913879394530327,
        8.86129760741628, -51.2509460448973, 216.904724121012, -722.934997558378,
        1938.88133239697, -4200.8187103263, 7337.84271240106, -10284.0617065415,
        11474.6510925279, -10066.1437683096, 6803.52593994091, -3426.34039306621,
        1213.44797515864, -270.209632873528, 28.517944335937,
    ],
    10: [
        0.0489273071289063, -0.244636535644538, 1.28042221069343, -8.95305633544941,
        56.3512229919426, -285.082305908195, 1154.60105895993, -3780.88119506833,
        10117.3594665529, -22326.4821624763, 40908.980049135, -62487.5754547145,
        79613.6392593413, -84300.01968384, 73535.9429168715, -52039.3605651862,
        29158.0880355837, -12453.0257034302, 3808.84984970093, -742.947502136231,
        69.4315452575683,
    ],
}

LDMC3 = f_alphabet("ldmc3_bec")
LDMC5 = f_alphabet("ldmc5_bec")


def test_golden_coefficients():
    for d, ref in GOLDEN_LDMC3.items():
        poly = error_poly(LDMC3, d)
        width = max(len(ref), len(poly.coeffs))
        got = np.zeros(width)
        got[: len(poly.coeffs)] = poly.coeffs
        want = np.zeros(width)
        want[: len(ref)] = ref
        assert np.max(np.abs(got - want)) < 1e-6, f"degree {d}"


def test_e1_constant_quarter():
    qs = np.linspace(0.0, 1.0, 101)
    vals = eval_degree(LDMC3, 1, "error", qs)
    assert np.max(np.abs(vals - 0.25)) < 1e-12


def test_e1_ldmc5_constant():
    qs = np.linspace(0.0, 1.0, 101)
    vals = eval_degree(LDMC5, 1, "error", qs)
    assert np.max(np.abs(vals - 5.0 / 16.0)) < 1e-12


def test_e0_is_half():
    assert eval_degree(LDMC3, 0, "error", 0.37) == 0.5
    assert eval_degree(LDMC5, 0, "error", 0.37) == 0.5


def test_eval_degree_matches_power_basis_ldmc3():
    qs = np.linspace(0.0, 1.0, 21)
    for d in range(11):
        poly = error_poly(LDMC3, d)
        assert np.max(np.abs(eval_degree(LDMC3, d, "error", qs) - poly(qs))) < 1e-9


def test_monotone_decreasing_in_degree():
    for alph in (LDMC3, LDMC5):
        for q in (0.1, 0.5, 0.92):
            vals = [eval_degree(alph, d, "error", q) for d in range(11)]
            assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))


def test_monotone_decreasing_in_q():
    qs = np.linspace(0.0, 1.0, 201)
    for alph in (LDMC3, LDMC5):
        for d in (2, 5, 10):
            vals = eval_degree(alph, d, "error", qs)
            assert np.all(np.diff(vals) <= 1e-12)


def test_entropy_payoff_bounds():
    # Jensen/Fano: averaging h_b over patterns lies below h_b of the mean,
    # and above twice the error payoff (h_b(x) >= 2x on [0, 1/2]).
    qs = np.linspace(0.0, 1.0, 51)
    for d in (1, 3, 6):
        e = eval_degree(LDMC3, d, "error", qs)
        h = eval_degree(LDMC3, d, "entropy", qs)
        assert np.all(h <= h_b(e) + 1e-9)
        assert np.all(h >= 2.0 * e - 1e-9)


def test_bsc_alphabet_single_message_identities():
    p = 0.11
    alph = f_alphabet("ldmc3_bsc", p)
    # total retained mass is 1 for BSC (no fully-determining events)
    mass = sum(float(w(0.0)) for _, w in alph.entries)
    assert abs(mass - 1.0) < 1e-12
    # chi2 payoff of a single uninformative message: weights already certain
    e1 = eval_degree(alph, 1, "error", 0.0)
    assert 0.0 < e1 < 0.5


def test_retained_mass_ldmc5():
    # at q = 1/2 the fully-determining mass is 3/32
    mass = sum(float(w(0.5)) for _, w in LDMC5.entries)
    assert abs(mass - 0.90625) < 1e-12


def test_alphabet_validation():
    with pytest.raises(ValueError):
        MessageAlphabet("BEC", ((0.5, EPolynomial((1.0,))),))  # magnitude < 1
    with pytest.raises(ValueError):
        f_alphabet("ldmc7_bec")
    with pytest.raises(ValueError):
        f_alphabet("ldmc3_bsc")  # missing crossover
    with pytest.raises(ValueError):
        error_poly(LDMC3, 15)  # beyond the supported truncation
    with pytest.raises(ValueError):
        error_poly(LDMC3, 3, "nonsense")


def test_degree_law_probabilities():
    pois = DegreeLaw.poisson(3)
    pmf, tail = pois.probabilities(1.0, 10)
    assert abs(pmf.sum() + tail - 1.0) < 1e-12
    assert abs(pmf[0] - np.exp(-3.0)) < 1e-12
    binom = DegreeLaw.binomial(6, 0.5)
    pmf, tail = binom.probabilities(1.0, 10)
    assert tail == 0.0
    assert abs(pmf[3] - 0.3125) < 1e-12
    with pytest.raises(ValueError):
        DegreeLaw.binomial(6, 0.9).probabilities(1.2, 10)
    expl = DegreeLaw.explicit([0.25, 0.5, 0.25])
    pmf, tail = expl.probabilities(2.0, 1)
    assert abs(tail - 0.25) < 1e-12


def test_family_evaluate_is_degree_mixture():
    fam = build_family("ldmc3", D=10)
    alpha, q = 1.3, 0.4
    pmf, _ = DegreeLaw.poisson(3).probabilities(alpha, 10)
    ref = sum(pmf[d] * eval_degree(LDMC3, d, "error", q) for d in range(11))
    assert abs(fam.evaluate(alpha, q) - ref) < 1e-14


def test_family_channel_payoff_validation():
    with pytest.raises(ValueError):
        build_family("ldmc5", channel="BSC")  # no arity-5 BSC alphabet
    with pytest.raises(ValueError):
        build_family("ldmc7")


def test_closed_form_ldgm():
    q = 0.6
    val = closed_form_efun("ldgm", 1.2, q, d=3)
    assert abs(val - 0.5 * np.exp(-1.2 * 3 * q * q)) < 1e-15
    with pytest.raises(ValueError):
        closed_form_efun("ldgm", 1.0, 0.5)  # missing d


def test_closed_form_mixed_reduces_to_components():
    from gracecode.ensemble import CheckKind, DegreeProfile

    prof = DegreeProfile(((CheckKind.xor(3), 1.0),))
    assert abs(
        closed_form_efun("mixed", 0.9, 0.5, profile=prof)
        - closed_form_efun("ldgm", 0.9, 0.5, d=3)
    ) < 1e-15
    prof = DegreeProfile(((CheckKind.maj(3), 1.0),))
    fam = build_family("ldmc3", D=10)
    assert abs(closed_form_efun("mixed", 0.9, 0.5, profile=prof, D=10) - fam.evaluate(0.9, 0.5)) < 1e-14


def test_closed_form_sysregular_validation():
    # d(1-R)/R must be an integer
    with pytest.raises(ValueError):
        closed_form_efun("sysregular", 1.0, 0.5, d=3, rate=0.4)
    val = closed_form_efun("sysregular", 1.0, 0.5, d=3, rate=0.5)
    assert 0.0 < val < 0.5


def test_d_function_and_first_zero():
    fam = build_family("ldmc3", D=10)
    q0 = first_zero(fam, 1.0)
    assert q0 is not None
    assert abs(d_function(fam, 1.0, q0)) < 1e-8
    # trivially-zero E never crosses (1-q)/2 in (0, 1)

    class ZeroFam:
        channel = "BEC"
        payoff = "error"

        def evaluate(self, alpha, q):
            return np.zeros_like(np.asarray(q, dtype=float))

    assert first_zero(ZeroFam(), 1.0) == 1.0  # (1-q)/2 hits 0 exactly at q=1

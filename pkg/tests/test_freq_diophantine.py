from __future__ import annotations

import itertools
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lindborel.freq_diophantine import (QI, FrequencyVector, ScaleOutOfRange, ScaleSequence, build_scale_sequence,
                                        diophantine_constant, golden_frequency, mode_scale, modes_on_scale,
                                        scale_of, small_divisor, verify_scale_sequence)

mpmath.mp.prec = 200
SQRT5 = mpmath.sqrt(5)


def _oracle_min(nu_max):
    # brute force over all modes with 200-bit floats
    w2 = (SQRT5 - 1) / 2
    best = mpmath.inf
    for n1, n2 in itertools.product(range(-nu_max, nu_max + 1), repeat=2):
        if (n1, n2) == (0, 0):
            continue
        best = min(best, abs(n1 + n2 * w2) * max(abs(n1), abs(n2)))
    return best


# --- exact arithmetic -------------------------------------------------


def test_small_divisor_golden():
    fr = golden_frequency()
    x, xm = small_divisor(fr, (-1, 2))
    assert x == QI(-2, 1, 1, 5)
    assert abs(xm - (SQRT5 - 2)) < mpmath.mpf(2) ** -190
    assert small_divisor(fr, (0, 0))[0] == 0
    assert small_divisor(fr, (1, 0))[0] == 1


def test_quadratic_canonical_form():
    assert QI(2, 2, 4, 5) == QI(1, 1, 2, 5)
    assert QI(0, 1, 1, 4) == 2
    assert QI(1, 1, 1, 5) * QI(1, -1, 1, 5) == -4
    assert (QI(1, 1, 2, 5) * QI(-1, 1, 2, 5)) == 1


@settings(max_examples=200, deadline=None)
@given(st.integers(-10**6, 10**6), st.integers(-10**6, 10**6), st.integers(1, 1000))
def test_sign_matches_high_precision(a, b, c):
    x = QI(a, b, c, 5)
    ref = (a + b * SQRT5) / c
    assert x.sign() == (0 if ref == 0 else (1 if ref > 0 else -1))
    assert abs(x.to_mpf() - ref) <= abs(ref) * mpmath.mpf(2) ** -180 + mpmath.mpf(2) ** -190


@settings(max_examples=100, deadline=None)
@given(st.integers(-50, 50), st.integers(-50, 50))
def test_small_divisor_matches_float(n1, n2):
    fr = golden_frequency()
    x, xm = small_divisor(fr, (n1, n2))
    ref = n1 + n2 * (SQRT5 - 1) / 2
    assert abs(xm - ref) < mpmath.mpf(2) ** -180 * (1 + abs(ref))
    assert float(x) == pytest.approx(float(ref), abs=1e-14)


# --- Diophantine constant ---------------------------------------------


def test_diophantine_constant_unit_box():
    fr = golden_frequency()
    assert diophantine_constant(fr, 1) == QI(3, -1, 2, 5)


@pytest.mark.parametrize("nu_max", [2, 5, 13, 40])
def test_diophantine_constant_oracle(nu_max):
    fr = golden_frequency()
    val = diophantine_constant(fr, nu_max).to_mpf()
    assert abs(val - _oracle_min(nu_max)) < mpmath.mpf(2) ** -180


def test_diophantine_constant_monotone():
    fr = golden_frequency()
    vals = [diophantine_constant(fr, n) for n in (1, 2, 8, 64, 512)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_golden_C0_frozen():
    # floor of min |omega.nu||nu| over |nu| <= 2^15 to 12 decimals
    assert golden_frequency().C0 == Fraction(305572809, 800000000)


def test_frequency_json_roundtrip():
    fr = golden_frequency()
    again = FrequencyVector.from_json(fr.to_json(), C0=fr.C0)
    assert again.dot((3, -5)) == fr.dot((3, -5))


# --- scale sequences --------------------------------------------------


@pytest.mark.parametrize("P", [0, 3, 5, 8])
def test_build_passes_verification(P):
    fr = golden_frequency()
    seq = build_scale_sequence(fr, P)
    assert seq.P == P
    assert verify_scale_sequence(seq, fr).ok


def test_build_deterministic():
    fr = golden_frequency()
    assert build_scale_sequence(fr, 6).gammas == build_scale_sequence(fr, 6).gammas


def test_csv_roundtrip():
    fr = golden_frequency()
    seq = build_scale_sequence(fr, 4)
    again = ScaleSequence.from_csv(seq.to_csv(), seq.C0)
    assert again.gammas == seq.gammas


def test_planted_separation_violation():
    fr = golden_frequency()
    seq = build_scale_sequence(fr, 6)
    gammas = list(seq.gammas)
    # |omega.(-2,3)| = 0.1458..., inside the p = 0 window
    gammas[0] = Fraction(1458980338, 10**10)
    rep = verify_scale_sequence(ScaleSequence(gammas, seq.C0), fr)
    assert not rep.ok
    assert rep.first_violation == {"kind": "separation", "n": 5, "p": 0, "nu": [-2, 3]}


def test_window_violation():
    fr = golden_frequency()
    seq = build_scale_sequence(fr, 3)
    gammas = list(seq.gammas)
    gammas[2] = gammas[1]
    rep = verify_scale_sequence(ScaleSequence(gammas, seq.C0), fr)
    assert not rep.ok and rep.first_violation["kind"] == "window"


def test_scale_labels(seq12, freq):
    assert scale_of(freq.dot((1, 0)), seq12) == 0
    assert scale_of(0, seq12, (0, 0)) == -1
    assert mode_scale(freq, seq12, (-3, 5)) == 1
    assert mode_scale(freq, seq12, (-8, 13)) == 3
    for n in range(1, 5):
        for nu in modes_on_scale(freq, seq12, n, nu_max=60):
            assert mode_scale(freq, seq12, nu) == n
    with pytest.raises(ScaleOutOfRange):
        scale_of(QI(1, 0, 10**9), seq12)


def test_scale_monotone_in_divisor(seq12, freq):
    # smaller divisors never sit on a lower scale
    modes = [nu for nu in itertools.product(range(-30, 31), range(0, 31)) if nu != (0, 0)]
    pairs = sorted((float(abs(freq.dot(nu))), mode_scale(freq, seq12, nu)) for nu in modes)
    labels = [p for _, p in pairs]
    assert all(a >= b for a, b in zip(labels, labels[1:]))

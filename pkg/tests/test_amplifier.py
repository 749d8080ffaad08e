import math

import numpy as np
import pytest

from tracesum.amplifier import (
    AmplifierFamily,
    PrimePairMeasure,
    choose_hmax,
    decompose_FO,
    family_value,
    measure_average,
    nu_count,
    optimal_parameters,
    scale_parameter,
)
from tracesum.errors import EmptyMeasure, TruncationTooCoarse
from tracesum.periodic import PeriodicFunction
from tracesum.sums import SmoothWindow
from tracesum.tracefn import build, parse_trace


# -- the twisted family -------------------------------------------------------


def test_detector_identity():
    """h = 0 recovers the function minus its mean term."""
    rng = np.random.default_rng(8)
    for q in (7, 101):
        K = PeriodicFunction(q, rng.standard_normal(q) + 1j * rng.standard_normal(q))
        hat0 = K.dft_values()[0]
        fam = AmplifierFamily(K)
        for n in (0, 1, q // 2):
            expect = K.values[n] - hat0 / math.sqrt(q)
            assert fam.value(n, 0) == pytest.approx(expect, abs=1e-10)


def test_constant_function_has_trivial_family():
    q = 11
    K = PeriodicFunction(q, np.ones(q))
    fam = AmplifierFamily(K)
    for n in range(0, q, 3):
        for h in range(0, q, 2):
            assert abs(fam.value(n, h)) < 1e-10


def test_additive_character_twists_to_shift():
    q = 7
    K = build(parse_trace("additive:1", q))
    for n in range(q):
        for h in range(q):
            expect = np.exp(2j * np.pi * ((n + h) % q) / q)
            assert family_value(K, n, h) == pytest.approx(expect, abs=1e-10)


def test_table_matches_pointwise_values():
    rng = np.random.default_rng(13)
    q = 31
    K = PeriodicFunction(q, rng.standard_normal(q) + 1j * rng.standard_normal(q))
    fam = AmplifierFamily(K)
    M = fam.table()
    assert M.shape == (q, q)
    for c in (0, 1, 5, 30):
        for n in (0, 2, 17):
            assert M[c, n] == pytest.approx(fam.value(n, c), abs=1e-10)


def test_family_double_sum_oracle():
    q = 101
    K = build(parse_trace("legendre", q))
    hat = K.dft_values()
    n, h = 5, 2
    direct = 0j
    for z in range(1, q):
        zbar = pow(z, q - 2, q)
        direct += hat[z] * np.exp(-2j * np.pi * (h * zbar % q) / q) * np.exp(
            -2j * np.pi * (n * z % q) / q
        )
    direct /= math.sqrt(q)
    assert family_value(K, n, h) == pytest.approx(direct, abs=1e-9)


# -- prime-pair measures ------------------------------------------------------


def test_measure_widening():
    M = PrimePairMeasure(2, 2, 101)
    assert M.p_set == (5,)  # first prime = 1 (mod 4) at or past 2
    assert M.l_set == (3,)
    assert M.pairs() == [(5, 3)]


def test_measure_validation():
    with pytest.raises(ValueError):
        PrimePairMeasure(2, 2, 101, p_set=(5,), l_set=(5,))
    with pytest.raises(ValueError):
        PrimePairMeasure(2, 2, 7, p_set=(5,), l_set=(3,))  # 5 >= 7/2
    with pytest.raises(EmptyMeasure):
        PrimePairMeasure(2, 2, 5)


def test_twist_residues():
    M = PrimePairMeasure(2, 2, 101)
    lbar = pow(3, 99, 101)
    assert M.twist_residues(4) == [4 * 5 * lbar % 101]


def test_measure_average_at_h_zero_is_measure_free():
    rng = np.random.default_rng(3)
    q = 101
    K = PeriodicFunction(q, rng.standard_normal(q) + 0j)
    fam = AmplifierFamily(K)
    M1 = PrimePairMeasure(2, 2, q)
    M2 = PrimePairMeasure(7, 3, q)
    for n in (1, 50):
        a = measure_average(fam, M1, n, 0)
        b = measure_average(fam, M2, n, 0)
        assert a == pytest.approx(b, abs=1e-10)
        assert a == pytest.approx(fam.value(n, 0), abs=1e-10)


# -- truncation and parameters ------------------------------------------------


def test_choose_hmax_monotone_in_width():
    W = SmoothWindow(1.0)
    small = choose_hmax(W, 4.0, 1.0)
    large = choose_hmax(W, 40.0, 1.0)
    assert small <= large
    assert large & (large - 1) == 0  # power of two


def test_choose_hmax_cap():
    W = SmoothWindow(1.0)
    with pytest.raises(TruncationTooCoarse):
        choose_hmax(W, 1e6, 1e12, cap=2**10)


def test_optimal_parameters_consistency():
    q, X, Z = 101.0, 1015.0, 2.0
    params = optimal_parameters(q, X, Z)
    assert params["H"] == pytest.approx(
        scale_parameter(q, X, params["P"], params["L"])
    )


# -- the decomposition --------------------------------------------------------


def test_decompose_identity_small_modulus(hecke4k):
    q = 31
    X = float(q) ** 1.5
    V = SmoothWindow(2.0)
    M = PrimePairMeasure(2, 2, q)
    Hparam = scale_parameter(q, X, M.p_set[0], M.l_set[0])
    W = SmoothWindow(1.0)
    hmax = choose_hmax(W, Hparam, 10.0)
    for fam in ("legendre", "kl2"):
        K = build(parse_trace(fam, q))
        F, O, S, defect = decompose_FO(K, hecke4k, V, X, M, Hparam, hmax, W=W)
        assert defect <= 1e-6 * (abs(S) + 1), fam
        assert F - O == pytest.approx(S - complex(K.dft_values()[0]) / math.sqrt(q)
                                      * _plain_mass(hecke4k, V, X), abs=1e-8)


def _plain_mass(H, V, X):
    from tracesum.sums import _support_range

    ns = _support_range(X)
    tab = H.lambda_sym2_table(int(ns[-1]))
    return float(np.sum(tab[ns] * V(ns / X)))


def test_decompose_rejects_tiny_truncation(hecke4k):
    q = 31
    X = float(q) ** 1.5
    M = PrimePairMeasure(2, 2, q)
    Hparam = scale_parameter(q, X, 5, 3)
    K = build(parse_trace("legendre", q))
    with pytest.raises(TruncationTooCoarse):
        decompose_FO(K, hecke4k, SmoothWindow(2.0), X, M, Hparam, 2)


# -- the multiplicity profile -------------------------------------------------


def test_nu_count_against_triple_loop():
    q = 101
    M = PrimePairMeasure(2, 2, q, p_set=(5, 13), l_set=(3, 7))
    W = SmoothWindow(1.0)
    Hp = 6

    def weight(h):
        return W.fourier_normalized(h / 20.0).real

    nu = nu_count(M, Hp, weight, q)
    expect = np.zeros(q)
    for p in (5, 13):
        for l in (3, 7):
            lbar = pow(l, q - 2, q)
            for h in range(Hp, 2 * Hp):
                if math.gcd(h, l) == 1:
                    expect[p * h * lbar % q] += weight(h)
    assert np.max(np.abs(nu.values - expect)) < 1e-12


def test_nu_count_mass_identity():
    """Total nu mass = sum of weights over admissible (l, h), times |p_set|."""
    q = 101
    M = PrimePairMeasure(2, 2, q, p_set=(5,), l_set=(3, 7))
    Hp = 5
    nu = nu_count(M, Hp, lambda h: 1.0, q)
    expected = sum(
        1 for l in (3, 7) for h in range(Hp, 2 * Hp) if math.gcd(h, l) == 1
    )
    assert float(np.sum(nu.values.real)) == pytest.approx(expected)
    assert float(np.max(np.abs(nu.values.imag))) == 0.0

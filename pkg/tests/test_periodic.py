import math

import numpy as np
import pytest

from tracesum.errors import NotCoprime
from tracesum.periodic import (
    PeriodicFunction,
    correlation_K2hat,
    correlation_L,
    dft,
    from_csv,
    from_json,
    inverse_dft,
    plancherel_defect,
    sup_norm_dft,
    to_csv,
    to_json,
)
from tracesum.tracefn import build, parse_trace


def random_function(q, rng):
    return PeriodicFunction(q, rng.standard_normal(q) + 1j * rng.standard_normal(q))


def test_transform_of_ones():
    K = PeriodicFunction(5, np.ones(5))
    hat = K.dft_values()
    assert abs(hat[0] - math.sqrt(5)) < 1e-12
    assert np.max(np.abs(hat[1:])) < 1e-12


def test_delta_constant_duality():
    q = 7
    K = build(parse_trace("delta:0", q))
    assert np.max(np.abs(K.dft_values() - 1.0)) < 1e-12


def test_legendre_transform_is_unimodular():
    K = build(parse_trace("legendre", 5))
    hat = K.dft_values()
    assert abs(hat[0]) < 1e-12
    assert np.max(np.abs(np.abs(hat[1:]) - 1.0)) < 1e-12


@pytest.mark.parametrize("q", [5, 101, 499, 2053])
def test_roundtrip_and_plancherel(q):
    rng = np.random.default_rng(q)
    K = random_function(q, rng)
    back = inverse_dft(dft(K))
    assert np.max(np.abs(back.values - K.values)) < 1e-9 * max(
        1.0, float(np.max(np.abs(K.values)))
    )
    assert plancherel_defect(K) < 1e-9 * K.l2_norm_sq()


def test_sup_norm_dft():
    rng = np.random.default_rng(3)
    K = random_function(11, rng)
    assert sup_norm_dft(K) == pytest.approx(float(np.max(np.abs(K.dft_values()))))


def test_autocorrelation_of_constant():
    K = PeriodicFunction(5, np.ones(5))
    L = correlation_L(K)
    assert np.max(np.abs(L.values - math.sqrt(5))) < 1e-9


def test_autocorrelation_random_inputs_verify():
    rng = np.random.default_rng(17)
    for q in (11, 101):
        for _ in range(5):
            correlation_L(random_function(q, rng))  # raises on any mismatch


def test_autocorrelation_matches_brute_force():
    """L(x) = q^{-1/2} [ sum_{u != 0} |hat K(u)|^2 e(-ubar x / q) + |hat K(0)|^2 ]."""
    rng = np.random.default_rng(23)
    q = 13
    K = random_function(q, rng)
    L = correlation_L(K)
    hat = K.dft_values()
    for x in range(q):
        direct = abs(hat[0]) ** 2
        for u in range(1, q):
            ubar = pow(u, -1, q)
            direct += abs(hat[u]) ** 2 * np.exp(-2j * np.pi * ubar * x / q)
        assert abs(L.values[x] - direct / math.sqrt(q)) < 1e-9


def test_pair_correlation_transform():
    rng = np.random.default_rng(5)
    q = 11
    K = random_function(q, rng)
    # direct definition: hat of n -> K(d^2 m1 n) conj(K(d^2 m2 n))
    d, m1, m2 = 2, 3, 5
    prod = PeriodicFunction(
        q,
        np.array(
            [
                K.values[d * d * m1 * n % q] * np.conj(K.values[d * d * m2 * n % q])
                for n in range(q)
            ]
        ),
    )
    got = correlation_K2hat(K, d, m1, m2)
    assert np.max(np.abs(got.values - prod.dft_values())) < 1e-9


def test_pair_correlation_rejects_shared_factor():
    K = PeriodicFunction(11, np.ones(11))
    with pytest.raises(NotCoprime):
        correlation_K2hat(K, 11, 1, 1)


def test_csv_and_json_roundtrip(tmp_path):
    rng = np.random.default_rng(9)
    K = random_function(17, rng)
    path = tmp_path / "fn.csv"
    path.write_text(to_csv(K))
    back = from_csv(path.read_text())
    assert np.array_equal(back.values, K.values)
    back2 = from_json(to_json(K))
    assert np.array_equal(back2.values, K.values)


def test_values_are_immutable():
    K = PeriodicFunction(5, np.ones(5))
    with pytest.raises(ValueError):
        K.values[0] = 2.0

"""End-to-end acceptance runs for the whole package.

Eight timed suites, ordered roughly by layer: transform identities, bound
checks, the character-sum grid, the amplifier decomposition, completion
defects, the cancellation scan, square-sum telescoping, and mean-square
ratios.  Each prints a single summary line (visible with -s) and enforces
both its numeric tolerance and a generous wall-clock budget.
"""

import itertools
import math
import time

import numpy as np
import pytest

from tracesum.amplifier import (
    AmplifierFamily,
    PrimePairMeasure,
    choose_hmax,
    decompose_FO,
    scale_parameter,
)
from tracesum.bilinear import BilinearInstance, bilinear_form, bound_ratio
from tracesum.charsums import default_grid, lemma_audit
from tracesum.errors import TruncationTooCoarse
from tracesum.heckecoef import HeckeSystem
from tracesum.modarith import prime_sieve
from tracesum.periodic import (
    PeriodicFunction,
    correlation_L,
    dft,
    inverse_dft,
    plancherel_defect,
)
from tracesum.sums import (
    ScanConfig,
    SmoothWindow,
    corollary_sums,
    exponent_scan,
    poisson_defect,
)
from tracesum.tracefn import (
    build,
    hyper_kloosterman_table,
    kl3_twist,
    kloosterman_table,
    parse_trace,
)

TOL = 1e-8


@pytest.fixture(scope="module")
def hecke_big():
    return HeckeSystem(10**6)


def _report(line, elapsed, budget):
    print(f"{line} ({elapsed:.1f}s < {budget}s)")
    assert elapsed < budget, f"runtime {elapsed:.1f}s over budget {budget}s"


def _function_roster(q, count=50):
    """Structured members of the constructor catalog plus seeded randoms."""
    specs = ["legendre", "kl2", "kl3", "delta:0", "delta:1",
             "additive:1", "additive:2",
             f"mixed:j={(q - 1) // 2};f=1,2", "mixed:g=0,0,1"]
    fns = [build(parse_trace(s, q)) for s in specs]
    rng = np.random.default_rng(q)
    while len(fns) < count:
        fns.append(
            PeriodicFunction(q, rng.standard_normal(q) + 1j * rng.standard_normal(q))
        )
    return fns


def test_1_exact_identities(hecke_big):
    t0 = time.perf_counter()
    worst = 0.0
    n_fns = 0
    for q in (5, 101, 499):
        for K in _function_roster(q):
            n_fns += 1
            scale = max(1.0, float(np.max(np.abs(K.values))))
            # transform round trip and unitarity
            back = inverse_dft(dft(K))
            worst = max(worst, float(np.max(np.abs(back.values - K.values))) / scale)
            worst = max(worst, plancherel_defect(K))
            # correlation profile: both the L formula and its transform
            correlation_L(K, tol=TOL)
            # detector identity at sampled arguments
            fam = AmplifierFamily(K)
            hat0 = K.dft_values()[0]
            for n in (0, 1, q - 1):
                d = abs(fam.value(n, 0) - (K.values[n] - hat0 / math.sqrt(q)))
                worst = max(worst, d / scale)
            # spectral identity for the associated bilinear form
            B = BilinearInstance(q, K.values, np.roll(K.values, 1), K)
            bilinear_form(B, tol=TOL)
            # degree-3 twist: direct and dual evaluations compared internally
            kl3_twist(K)
    # eigenvalue identities: convolution square, square argument, inversion
    rep = hecke_big.verify_identities(2000)
    worst = max(worst, rep["max_defect"])
    assert worst <= TOL
    elapsed = time.perf_counter() - t0
    _report(
        f"[1/8] exact identities: PASS ({n_fns} functions, max defect {worst:.2e})",
        elapsed, 60,
    )


def test_2_bound_suite(hecke_big):
    t0 = time.perf_counter()
    # randomized spectral-bound ratios
    rng = np.random.default_rng(20240)
    q = 101
    worst_ratio = 0.0
    for _ in range(200):
        alpha = rng.standard_normal(q) + 1j * rng.standard_normal(q)
        beta = rng.standard_normal(q) + 1j * rng.standard_normal(q)
        kv = rng.standard_normal(q) + 1j * rng.standard_normal(q)
        r = bound_ratio(BilinearInstance(q, alpha, beta, PeriodicFunction(q, kv)))
        worst_ratio = max(worst_ratio, r)
        assert r <= 1 + TOL
    # exhaustive sign patterns at q = 5
    signs = [np.array(s, dtype=np.float64) for s in itertools.product((-1.0, 1.0), repeat=5)]
    kernels = [PeriodicFunction(5, s) for s in signs]
    checked = 0
    for a, b, Kp in itertools.product(signs, signs, kernels):
        r = bound_ratio(BilinearInstance(5, a, b, Kp))
        worst_ratio = max(worst_ratio, r)
        assert r <= 1 + TOL
        checked += 1
    assert checked == 32**3
    # square-root cancellation bounds, exhaustive over small prime moduli
    for p in prime_sieve(500):
        p = int(p)
        assert float(np.max(np.abs(kloosterman_table(p)))) <= 2 + 1e-9
        assert float(np.max(np.abs(hyper_kloosterman_table(p, 3)))) <= 3 + 1e-9
    # prime eigenvalue bound with explicit margin
    rep = hecke_big.verify_identities(10**4)
    assert rep["kim_sarnak_margin"] > 0
    elapsed = time.perf_counter() - t0
    _report(
        f"[2/8] bound suite: PASS (max ratio {worst_ratio:.6f}, "
        f"eigenvalue margin {rep['kim_sarnak_margin']:.3f})",
        elapsed, 120,
    )


def test_3_character_sum_grid():
    t0 = time.perf_counter()
    grid = default_grid()
    rep = lemma_audit(grid)
    assert rep["violations"] == 0
    assert rep["checked"] == len(grid)
    assert rep["max_diag_ratio"] <= 8.0
    elapsed = time.perf_counter() - t0
    _report(
        f"[3/8] character-sum grid: PASS ({rep['checked']} instances, "
        f"diag ratio {rep['max_diag_ratio']:.4f}, general ratio "
        f"{rep['max_general_ratio']:.4f})",
        elapsed, 60,
    )


def test_4_amplifier_decomposition(hecke_big):
    t0 = time.perf_counter()
    V = SmoothWindow(2.0)
    W = SmoothWindow(1.0)
    worst = 0.0
    runs = 0
    for q, P, L in ((101, 2, 2), (211, 3, 2)):
        X = float(q) ** 1.5
        M = PrimePairMeasure(P, L, q)
        Hparam = scale_parameter(q, X, P, L)
        hmax = choose_hmax(W, Hparam, 10.0)
        for fam in ("legendre", "kl2"):
            K = build(parse_trace(fam, q))
            while True:
                try:
                    F, O, S, defect = decompose_FO(
                        K, hecke_big, V, X, M, Hparam, hmax, W=W
                    )
                    break
                except TruncationTooCoarse:
                    hmax *= 2
            rel = defect / (abs(S) + 1)
            worst = max(worst, rel)
            assert rel <= 1e-6, (q, fam)
            runs += 1
    elapsed = time.perf_counter() - t0
    _report(
        f"[4/8] amplifier decomposition: PASS ({runs} runs, max defect {worst:.2e})",
        elapsed, 300,
    )


def test_5_completion_defect():
    t0 = time.perf_counter()
    W = SmoothWindow(2.0)
    worst = 0.0
    combos = 0
    for q in (101, 211, 499):
        X = float(q) ** 1.5
        for fam in ("legendre", "kl2", "kl3"):
            K = build(parse_trace(fam, q))
            d = poisson_defect(K, W, X)
            worst = max(worst, d)
            assert d <= 1e-6, (q, fam)
            combos += 1
    assert combos == 9
    elapsed = time.perf_counter() - t0
    _report(
        f"[5/8] completion defect: PASS (9 combos, max defect {worst:.2e})",
        elapsed, 30,
    )


def test_6_cancellation_scan(hecke_big):
    t0 = time.perf_counter()
    cfg = ScanConfig(
        q_list=(101, 211, 401, 809),
        x_rule="q**1.5",
        z=2.0,
        families=("legendre", "kl2", "kl3"),
    )
    rows = exponent_scan(cfg, hecke_big)
    assert len(rows) == 12
    worst = max(r["ratio"] for r in rows)
    assert worst <= 10
    for fam in cfg.families:
        first = next(r for r in rows if r["family"] == fam and r["q"] == 101)
        last = next(r for r in rows if r["family"] == fam and r["q"] == 809)
        assert last["trivial_ratio"] < first["trivial_ratio"], fam
    elapsed = time.perf_counter() - t0
    _report(
        f"[6/8] cancellation scan: PASS (12 rows, max ratio {worst:.4f})",
        elapsed, 600,
    )


def test_7_square_sum_telescoping(hecke_big):
    t0 = time.perf_counter()
    K = build(parse_trace("kl2", 101))
    rep = corollary_sums(K, hecke_big, SmoothWindow(2.0), 2000.0, tol=TOL)
    worst = max(rep.defect_square_arg, rep.defect_squared)
    assert worst <= TOL
    elapsed = time.perf_counter() - t0
    _report(
        f"[7/8] square-sum telescoping: PASS (max defect {worst:.2e})",
        elapsed, 60,
    )


def test_8_mean_square_ratios(hecke_big):
    t0 = time.perf_counter()
    results = {}
    for X in (10**3, 10**4, 10**5):
        first, second = hecke_big.rankin_selberg_ratios(X)
        assert 0.05 <= first <= 20, (X, first)
        assert 0.05 <= second <= 20, (X, second)
        results[X] = (first, second)
    elapsed = time.perf_counter() - t0
    pairs = ", ".join(f"X=1e{int(math.log10(X))}: ({a:.3f}, {b:.3f})"
                      for X, (a, b) in results.items())
    _report(f"[8/8] mean-square ratios: PASS ({pairs})", elapsed, 30)

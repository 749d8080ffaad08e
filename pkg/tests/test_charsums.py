import math

import numpy as np
import pytest

from tracesum.charsums import (
    CInstance,
    c_sum,
    default_grid,
    lemma_audit,
    ramanujan_sum,
)
from tracesum.errors import InvalidInstance
from tracesum.modarith import euler_phi, mod_inverse
from tracesum.tracefn import kloosterman


def test_ramanujan_sum_values():
    assert ramanujan_sum(1, 6) == 1
    assert ramanujan_sum(2, 4) == -2
    assert ramanujan_sum(0, 12) == euler_phi(12)
    assert ramanujan_sum(3, 9) == -3
    assert ramanujan_sum(0, 9) == 6


def test_ramanujan_sum_against_exponential():
    for m in range(1, 31):
        for n in range(m):
            direct = sum(
                np.exp(2j * np.pi * a * n / m)
                for a in range(1, m + 1)
                if math.gcd(a, m) == 1
            )
            assert ramanujan_sum(n, m) == pytest.approx(direct.real, abs=1e-8)
            assert abs(direct.imag) < 1e-8


def test_c_sum_pure_phase_case():
    # p1 = p2, l1 = l2, n = 0: the Kloosterman factors cancel to |.|^2 and the
    # sum telescopes to a Ramanujan-type count; s = 6 here, C(0) = phi(6) = 2
    inst = CInstance(0, 5, 5, 3, 3, 2, 1, 17)
    assert c_sum(inst) == pytest.approx(2.0, abs=1e-9)


def test_c_sum_brute_force():
    for inst in (
        CInstance(3, 5, 13, 3, 7, 2, 1, 17),
        CInstance(1, 5, 5, 3, 3, 4, 2, 101),
        CInstance(0, 13, 5, 7, 3, 6, 3, 17),
    ):
        S = inst.beta_modulus
        total = 0j
        for beta in range(S):
            term = 1 + 0j
            for p, s, conj in ((inst.p1, inst.s1, False), (inst.p2, inst.s2, True)):
                if s == 1:
                    continue
                arg = mod_inverse(p, s) * inst.q % s * beta % s
                v = kloosterman(arg, s)
                term *= np.conj(v) if conj else v
            total += term * np.exp(2j * np.pi * beta * inst.n / S)
        assert c_sum(inst) == pytest.approx(total, abs=1e-8), inst


def test_instance_validation():
    with pytest.raises(InvalidInstance):
        CInstance(0, 6, 5, 3, 3, 2, 1, 17)  # p1 not prime
    with pytest.raises(InvalidInstance):
        CInstance(0, 5, 5, 3, 3, 2, 5, 17)  # m does not divide r*l
    with pytest.raises(InvalidInstance):
        CInstance(0, 3, 5, 3, 3, 1, 1, 17)  # p1 = l1 = 3 share a factor


def test_off_diagonal_vanishing():
    for r in (1, 2, 4):
        inst = CInstance(0, 5, 13, 3, 7, r, 1, 17)
        assert abs(c_sum(inst)) < 1e-6 * inst.beta_modulus


def test_discriminant_formula():
    inst = CInstance(0, 5, 13, 3, 7, 2, 1, 17)
    g = math.gcd(3, 7)
    assert inst.discriminant == 17 * (7**2 * 13 - 3**2 * 5) // g**2
    same = CInstance(0, 5, 5, 7, 7, 2, 1, 17)
    assert same.discriminant == 0


def test_small_grid_audit_clean():
    grid = default_grid(q_values=(17,), r_max=4, l_values=(3, 7), p_values=(5, 13), n_max=4)
    report = lemma_audit(grid)
    assert report["violations"] == 0
    assert report["checked"] == len(grid)
    assert report["max_diag_ratio"] <= 8.0
    parts = {r.part for r in report["rows"]}
    assert "off_diagonal_zero" in parts and "diagonal_ramanujan" in parts


def test_collect_all_adds_logged_rows():
    grid = default_grid(q_values=(17,), r_max=2, l_values=(3, 7), p_values=(5,), n_max=2)
    lean = lemma_audit(grid)
    full = lemma_audit(grid, collect_all=True)
    assert len(full["rows"]) > len(lean["rows"])
    assert any(r.part == "general_logged" for r in full["rows"])
    assert full["max_general_ratio"] == lean["max_general_ratio"]


def test_diagonal_gcd_bound_sharp_case():
    # p1 != p2 on the diagonal: |C(0)| <= gcd(s, p2 - p1)
    inst = CInstance(0, 5, 13, 3, 3, 4, 1, 17)
    bound = math.gcd(inst.s1, 13 - 5)
    assert abs(c_sum(inst)) <= bound + 1e-6

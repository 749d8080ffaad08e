"""Twisted family of a trace function, prime-pair averaging, and the exact
decomposition of its weighted sum into diagonal and off-diagonal parts.

From the transform of K one manufactures the two-parameter family

    K(n, h) = q^{-1/2} sum_{z != 0} hat K(z) e_q(-h zbar) e_q(-n z),

whose h = 0 member recovers K itself up to its mean: K(n, 0) = K(n) -
hat K(0)/sqrt(q) (the detector identity — discrete Fourier inversion).
Averaging the h twist over pairs (p, l) of split primes and summing against a
unit-mass weight in h yields

    F = O + S - (hat K(0)/sqrt(q)) T        (exactly),

with S the windowed coefficient sum of K, T the same sum with K stripped, and
O the h != 0 part; decompose_FO audits that identity numerically.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import EmptyMeasure, TruncationTooCoarse
from .heckecoef import HeckeSystem
from .modarith import inverse_table, mod_inverse, primes_in_range
from .periodic import PeriodicFunction, roots_of_unity
from .sums import SmoothWindow, _support_range


class AmplifierFamily:
    """K plus its transform and the lazily built q x q table of K(n, h)."""

    def __init__(self, K: PeriodicFunction):
        self.base = K
        self.q = K.q
        self._table = None

    def value(self, n, h) -> complex:
        """K(n, h) by direct O(q) summation."""
        q = self.q
        hat = self.base.dft_values()
        inv = inverse_table(q)
        roots = roots_of_unity(q)
        z = np.arange(1, q, dtype=np.int64)
        phases = roots[(-int(h) % q) * inv[z] % q] * roots[(-int(n) % q) * z % q]
        return complex(np.dot(hat[z], phases) / math.sqrt(q))

    def table(self) -> np.ndarray:
        """M[c, n] = K(n, c) for all residues; built once, O(q^3) products."""
        if self._table is None:
            q = self.q
            hat = self.base.dft_values()
            inv = inverse_table(q)
            roots = roots_of_unity(q)
            z = np.arange(1, q, dtype=np.int64)
            c = np.arange(q, dtype=np.int64)
            left = roots[((-c[:, None] % q) * inv[z][None, :]) % q] * hat[z][None, :]
            right = roots[((-c[:, None] % q) * z[None, :]) % q]  # c reused as n index
            M = left @ right.T / math.sqrt(q)
            M.setflags(write=False)
            self._table = M
        return self._table


def family_value(K: PeriodicFunction, n, h) -> complex:
    return AmplifierFamily(K).value(n, h)


@dataclass
class PrimePairMeasure:
    """Uniform measure on pairs (p, l): p = 1 (mod 4) from ~[P, 2P), l = 3
    (mod 4) from ~[L, 2L).  An empty congruence window is widened upward
    (doubling the right endpoint) until the first qualifying prime appears —
    identity checks hold for any nonempty set; all elements must stay < q/2."""

    P: int
    L: int
    q: int
    p_set: tuple = field(default=None)
    l_set: tuple = field(default=None)

    def __post_init__(self):
        if self.p_set is None:
            self.p_set = tuple(self._window(self.P, 1))
        if self.l_set is None:
            self.l_set = tuple(self._window(self.L, 3))
        if set(self.p_set) & set(self.l_set):
            raise ValueError("prime sets must be disjoint")
        if any(2 * v >= self.q for v in self.p_set + self.l_set):
            raise ValueError(f"measure primes must stay below q/2 = {self.q / 2}")

    def _window(self, lo, residue):
        hi = 2 * lo
        while hi <= self.q:
            found = primes_in_range(lo, hi, residue=residue, mod=4)
            if found:
                return found
            hi *= 2
        raise EmptyMeasure(
            f"no prime = {residue} (mod 4) in [{lo}, q/2) for q = {self.q}"
        )

    def pairs(self):
        return [(p, l) for p in self.p_set for l in self.l_set]

    def twist_residues(self, h):
        """h p lbar mod q over all pairs."""
        q = self.q
        return [int(h) * p * mod_inverse(l, q) % q for p, l in self.pairs()]


def measure_average(F: AmplifierFamily, M: PrimePairMeasure, n, h) -> complex:
    """Average of K(n, h p lbar) over the pair measure."""
    pairs = M.pairs()
    if not pairs:
        raise EmptyMeasure("prime-pair measure has no support")
    tab = F.table()
    total = sum(tab[c, int(n) % F.q] for c in M.twist_residues(h))
    return complex(total / len(pairs))


def scale_parameter(q, X, P, L):
    """H = q^2 L / (X P), the natural width of the h aggregation."""
    return q * q * L / (X * P)


def optimal_parameters(q, X, Z=1.0):
    """The exponent-balancing choices P = q^{7/9} / (X^{1/3} Z^{10/9}),
    L = Z^{2/3} X P / q^{5/3}, and the induced H."""
    P = q ** (7 / 9) / (X ** (1 / 3) * Z ** (10 / 9))
    L = Z ** (2 / 3) * X * P / q ** (5 / 3)
    return {"P": P, "L": L, "H": scale_parameter(q, X, P, L)}


def choose_hmax(W: SmoothWindow, Hparam, scale, target=1e-10, cap=2**20):
    """Smallest power-of-two truncation with the 8-fold integration-by-parts
    tail of hat W below target * scale."""
    m8 = W.derivative_sup(8)

    def tail(hmax):
        return 2 * scale * m8 * (Hparam / (2 * math.pi)) ** 8 / (7 * hmax**7)

    hmax = 8
    while tail(hmax) > target * max(scale, 1.0):
        hmax *= 2
        if hmax > cap:
            raise TruncationTooCoarse(f"tail {tail(hmax):.2e} at cap {cap}")
    return hmax


def decompose_FO(
    K: PeriodicFunction,
    H: HeckeSystem,
    V: SmoothWindow,
    X,
    M: PrimePairMeasure,
    Hparam,
    hmax,
    W: SmoothWindow = None,
    tol=1e-6,
):
    """(F, O, S, defect) for the weighted family sum at truncation hmax.

    F aggregates S_V(K(., h p lbar), X) against the unit-mass weight
    hat W(h / Hparam) over |h| <= hmax and the pair measure; O is its h != 0
    part; S = S_V(K, X).  The three satisfy

        F - O - S + (hat K(0)/sqrt(q)) T = 0,   T = sum_n lam(1, n) V(n/X),

    exactly; defect is the left side's magnitude, required <= tol * (|S| + 1).
    TruncationTooCoarse if the hat W tail past hmax is not below 1e-10.
    """
    q = K.q
    if W is None:
        W = SmoothWindow(1.0)
    fam = AmplifierFamily(K)
    pairs = M.pairs()
    if not pairs:
        raise EmptyMeasure("prime-pair measure has no support")

    ns = _support_range(X)
    sym2 = H.lambda_sym2_table(int(ns[-1]) if len(ns) else 1)
    coeffs = sym2[ns] * V(ns / X) if len(ns) else np.zeros(0)
    w = np.zeros(q, dtype=np.float64)
    np.add.at(w, ns % q, coeffs)
    T = float(np.sum(coeffs))
    S = complex(np.dot(K.values[ns % q], coeffs)) if len(ns) else 0j

    tab = fam.table()
    S_fam = tab @ w  # S_V(K(., c), X) for every twist residue c

    sup_fam = float(np.max(np.abs(S_fam)))
    m8 = W.derivative_sup(8)
    tail = 2 * sup_fam * m8 * (Hparam / (2 * math.pi)) ** 8 / (7 * max(hmax, 1) ** 7)
    if tail > 1e-10 * (abs(S) + 1):
        raise TruncationTooCoarse(
            f"hat-weight tail {tail:.2e} beyond hmax = {hmax} exceeds 1e-10 scale"
        )

    hs = np.arange(-hmax, hmax + 1, dtype=np.int64)
    wh = W.fourier_batch(hs / Hparam) / W.fourier(0.0).real
    wh[hmax] = 1.0  # hat W(0) = 1 exactly; the h = 0 term carries the identity
    npairs = len(pairs)
    acc = np.zeros(len(hs), dtype=np.complex128)
    for p, l in pairs:
        acc += S_fam[hs * (p * mod_inverse(l, q)) % q]
    terms = wh * acc / npairs
    F = complex(np.sum(terms))
    O = F - complex(terms[hmax])

    khat0 = complex(K.dft_values()[0])
    defect = abs(F - O - S + khat0 / math.sqrt(q) * T)
    return F, O, S, defect


def nu_count(M: PrimePairMeasure, Hprime, weight, q) -> PeriodicFunction:
    """Multiplicity profile of the products p h lbar mod q:

        nu(x) = sum over p in p_set, l in l_set, h in [H', 2H') with (h, l) = 1
                and p h lbar = x (mod q), of weight(h)

    (weight is typically h -> hat W(h / H)).  Returned as a PeriodicFunction."""
    if not M.p_set or not M.l_set:
        raise EmptyMeasure("prime-pair measure has no support")
    vals = np.zeros(q, dtype=np.float64)
    Hprime = int(Hprime)
    for l in M.l_set:
        lbar = mod_inverse(l, q)
        for h in range(Hprime, 2 * Hprime):
            if math.gcd(h, l) != 1:
                continue
            wh = float(weight(h))
            for p in M.p_set:
                vals[p * h % q * lbar % q] += wh
    return PeriodicFunction(q, vals)

"""Catalog of trace functions on Z/qZ and their multiplicative-harmonic tools.

Families built here: products of multiplicative characters composed with
polynomials times an additive phase e_q(g(n)); hyper-Kloosterman sums of any
rank r >= 2 with the q^{-(r-1)/2} normalization; sqrt(q)-scaled delta masses;
additive characters; the quadratic-residue symbol; and arbitrary tables.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import IdentityViolation, InvalidSpec, TrivialCharacter
from .modarith import as_modulus, dlog_table, inverse_table, units
from .periodic import PeriodicFunction, roots_of_unity

# -- variant specs ------------------------------------------------------------


@dataclass(frozen=True)
class MixedCharacter:
    """K(n) = prod_i chi_{j_i}(f_i(n)) * e_q(g(n)).

    indices: character indices j_i against the smallest-primitive-root basis;
    polys: one integer coefficient tuple per index, constant term first;
    phase: coefficient tuple of g, constant term first (empty means g = 0).
    """

    indices: tuple
    polys: tuple
    phase: tuple = ()


@dataclass(frozen=True)
class HyperKloosterman:
    rank: int


@dataclass(frozen=True)
class Delta:
    """sqrt(q) times the indicator of a single residue class."""

    residue: int


@dataclass(frozen=True)
class AdditiveCharacter:
    multiplier: int


@dataclass(frozen=True)
class LegendreSymbol:
    pass


@dataclass(frozen=True)
class CustomTable:
    values: tuple


@dataclass(frozen=True)
class TraceFunctionSpec:
    variant: object
    modulus: object


# -- Dirichlet characters via the dlog table ----------------------------------


class DirichletCharacter:
    """chi_j mod prime q with chi_j(g^k) = e(j k / (q-1)), g the smallest
    primitive root; chi(0) = 0.  j = 0 is the trivial character."""

    def __init__(self, q, index):
        self.table = dlog_table(q)
        self.q = int(q)
        self.index = int(index) % (self.q - 1)

    def values(self):
        q = self.q
        vals = np.zeros(q, dtype=np.complex128)
        k = np.arange(q - 1)
        vals[self.table.powers] = roots_of_unity(q - 1)[(self.index * k) % (q - 1)]
        return vals

    def __call__(self, n):
        n = int(n) % self.q
        if n == 0:
            return 0j
        k = self.table.dlog(n)
        return complex(roots_of_unity(self.q - 1)[(self.index * k) % (self.q - 1)])

    def is_trivial(self):
        return self.index == 0


def gauss_sum(chi: DirichletCharacter) -> complex:
    """tau(chi) = q^{-1/2} sum_x chi(x) e_q(x); rejects the trivial character."""
    if chi.is_trivial():
        raise TrivialCharacter("normalized Gauss sum requested for the trivial character")
    return complex(all_gauss_sums(chi.q)[chi.index])


_gauss_cache = {}


def all_gauss_sums(q):
    """Array g with g[j] = q^{-1/2} sum_x chi_j(x) e_q(x), all j including 0."""
    q = int(q)
    if q not in _gauss_cache:
        table = dlog_table(q)
        b = roots_of_unity(q)[table.powers]  # e_q(g^k) in log order
        # sum_k e(jk/(q-1)) b[k] = (q-1) * ifft(b)[j]
        g = (q - 1) * np.fft.ifft(b) / math.sqrt(q)
        g.setflags(write=False)
        _gauss_cache[q] = g
    return _gauss_cache[q]


def mellin_transform(K: PeriodicFunction) -> np.ndarray:
    """M[j] = q^{-1/2} sum_{x != 0} K(x) conj(chi_j(x)), indexed like
    DirichletCharacter(q, j)."""
    q = K.q
    table = dlog_table(q)
    a = K.values[table.powers]  # K(g^k)
    return np.fft.fft(a) / math.sqrt(q)


# -- Kloosterman sums ---------------------------------------------------------

_kl2_cache = {}


def kloosterman(n, m) -> complex:
    """Kl_2(n; m) = m^{-1/2} sum_{x unit mod m} e_m(n x + xbar); composite m fine.

    Real-valued in exact arithmetic (x <-> -x pairs); the imaginary residue of
    the returned complex stays below 1e-9.
    """
    return complex(kloosterman_table(m)[int(n) % max(int(m), 1)])


def kloosterman_table(m) -> np.ndarray:
    """All of Kl_2(.; m) at once; Kl_2(.; 1) = 1 by the empty-product convention."""
    m = int(m)
    if m not in _kl2_cache:
        if m == 1:
            tab = np.ones(1, dtype=np.complex128)
        else:
            u = units(m)
            inv = inverse_table(m)[u]
            roots = roots_of_unity(m)
            tab = np.empty(m, dtype=np.complex128)
            n = np.arange(m, dtype=np.int64)
            # row blocks keep the phase matrix modest for large m
            step = max(1, 2**22 // max(len(u), 1))
            for lo in range(0, m, step):
                hi = min(lo + step, m)
                phases = (np.outer(n[lo:hi], u) + inv[None, :]) % m
                tab[lo:hi] = roots[phases].sum(axis=1)
            tab /= math.sqrt(m)
        tab.setflags(write=False)
        _kl2_cache[m] = tab
    return _kl2_cache[m]


def hyper_kloosterman_table(q, r) -> np.ndarray:
    """Kl_r(n; q) for all n mod prime q: rank-r multiplicative convolution of
    e_q over the unit group, normalized by q^{-(r-1)/2}; Kl_r(0) = 0."""
    q, r = int(q), int(r)
    if r < 2:
        raise InvalidSpec(f"hyper-Kloosterman rank must be >= 2, got {r}")
    if r == 2:
        return kloosterman_table(q)
    table = dlog_table(q)
    a = roots_of_unity(q)[table.powers]
    conv = np.fft.ifft(np.fft.fft(a) ** r)
    vals = np.zeros(q, dtype=np.complex128)
    vals[table.powers] = conv
    vals /= q ** ((r - 1) / 2)
    return vals


# -- building trace functions -------------------------------------------------


def _poly_eval_mod(coeffs, q):
    """Values of the integer polynomial (constant term first) at 0..q-1 mod q."""
    n = np.arange(q, dtype=np.int64)
    acc = np.zeros(q, dtype=np.int64)
    for c in reversed(coeffs):
        acc = (acc * n + int(c) % q) % q
    return acc


def build(spec: TraceFunctionSpec) -> PeriodicFunction:
    """Materialize a trace-function spec as a table on Z/qZ."""
    mod = as_modulus(spec.modulus)
    q = mod.value
    v = spec.variant
    if isinstance(v, CustomTable):
        vals = np.asarray(v.values, dtype=np.complex128)
        if vals.shape != (q,):
            raise InvalidSpec(f"custom table has {vals.shape} values for modulus {q}")
        return PeriodicFunction(mod, vals)
    if isinstance(v, Delta):
        vals = np.zeros(q, dtype=np.complex128)
        vals[int(v.residue) % q] = math.sqrt(q)
        return PeriodicFunction(mod, vals)
    if isinstance(v, AdditiveCharacter):
        vals = roots_of_unity(q)[(int(v.multiplier) % q) * np.arange(q) % q]
        return PeriodicFunction(mod, vals)
    if not mod.is_prime:
        raise InvalidSpec(f"variant {type(v).__name__} needs a prime modulus, got {q}")
    if isinstance(v, LegendreSymbol):
        table = dlog_table(q)
        vals = np.zeros(q, dtype=np.complex128)
        vals[table.powers] = np.where(np.arange(q - 1) % 2 == 0, 1.0, -1.0)
        return PeriodicFunction(mod, vals)
    if isinstance(v, HyperKloosterman):
        return PeriodicFunction(mod, hyper_kloosterman_table(q, v.rank))
    if isinstance(v, MixedCharacter):
        if len(v.indices) != len(v.polys):
            raise InvalidSpec("one polynomial needed per character index")
        vals = np.ones(q, dtype=np.complex128)
        table = dlog_table(q)
        for j, coeffs in zip(v.indices, v.polys):
            j = int(j)
            if not 0 <= j <= q - 2:
                raise InvalidSpec(f"character index {j} outside 0..{q - 2}")
            if len(coeffs) == 0:
                raise InvalidSpec("empty polynomial in character composition")
            f = _poly_eval_mod(coeffs, q)
            chivals = DirichletCharacter(q, j).values()
            vals *= chivals[f]
        if v.phase:
            vals *= roots_of_unity(q)[_poly_eval_mod(v.phase, q)]
        return PeriodicFunction(mod, vals)
    raise InvalidSpec(f"unknown trace-function variant {type(v).__name__}")


def parse_trace(text, q) -> TraceFunctionSpec:
    """CLI syntax: kl2 | kl3 | ... | legendre | delta:a | additive:a |
    mixed:j=J1,J2;f=C0,C1|C0,C1;g=C0,C1,C2  (poly coefficients constant-first)."""
    text = text.strip()
    head, _, arg = text.partition(":")
    head = head.lower()
    if head.startswith("kl"):
        try:
            r = int(head[2:])
        except ValueError:
            raise InvalidSpec(f"bad hyper-Kloosterman spec {text!r}") from None
        return TraceFunctionSpec(HyperKloosterman(r), as_modulus(q))
    if head == "legendre":
        return TraceFunctionSpec(LegendreSymbol(), as_modulus(q))
    if head == "delta":
        return TraceFunctionSpec(Delta(int(arg or 0)), as_modulus(q))
    if head == "additive":
        return TraceFunctionSpec(AdditiveCharacter(int(arg or 1)), as_modulus(q))
    if head == "mixed":
        fields = {}
        for part in arg.split(";"):
            key, _, val = part.partition("=")
            fields[key.strip()] = val.strip()
        indices = tuple(int(s) for s in fields.get("j", "").split(",") if s)
        polys = tuple(
            tuple(int(c) for c in poly.split(",") if c)
            for poly in fields.get("f", "").split("|")
            if poly
        )
        phase = tuple(int(c) for c in fields.get("g", "").split(",") if c)
        return TraceFunctionSpec(MixedCharacter(indices, polys, phase), as_modulus(q))
    raise InvalidSpec(f"unknown trace family {text!r}")


# -- rank-3 twist identity ----------------------------------------------------


def kl3_twist(K: PeriodicFunction, tol=1e-8) -> PeriodicFunction:
    """L(n) = q^{-1/2} sum_x K(x) Kl_3(n x; q), n != 0, with L(0) = 0.

    Computed both directly and through the multiplicative-spectrum form

        L(n) = (sqrt(q)/(q-1)) sum_chi tau(chi)^3 M(chi) conj(chi(n)),

    which must agree within tol * max(1, ||K||_2); IdentityViolation otherwise.
    """
    q = K.q
    if not K.modulus.is_prime:
        raise ValueError("rank-3 twist needs a prime modulus")
    kl3 = hyper_kloosterman_table(q, 3)
    n = np.arange(q, dtype=np.int64)
    vals = np.zeros(q, dtype=np.complex128)
    for m in range(1, q):
        vals[m] = kl3[(m * n) % q].dot(K.values)
    vals /= math.sqrt(q)

    taus = all_gauss_sums(q)
    M = mellin_transform(K)
    c = taus**3 * M
    table = dlog_table(q)
    # sum_j c[j] conj(chi_j(g^t)) = sum_j c[j] e(-jt/(q-1)) = fft(c)[t]
    dual = np.zeros(q, dtype=np.complex128)
    dual[table.powers] = np.fft.fft(c)
    dual *= math.sqrt(q) / (q - 1)

    scale = max(1.0, math.sqrt(K.l2_norm_sq()))
    defect = float(np.max(np.abs(vals - dual)))
    if defect > tol * scale:
        raise IdentityViolation(
            f"rank-3 twist dual forms disagree by {defect:.3e} (> {tol:.1e} * {scale:.3e})"
        )
    return PeriodicFunction(K.modulus, vals)

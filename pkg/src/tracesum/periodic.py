"""Periodic functions on Z/qZ and their unitary discrete Fourier transforms.

Conventions: e_q(x) = exp(2*pi*i*x/q) and

    hat K(n) = q^{-1/2} * sum_x K(x) e_q(n x),

so the transform is unitary (Plancherel: sum|K|^2 = sum|hat K|^2) and the
inversion formula carries e_q(-n x).
"""

import csv
import io
import json
import math

import numpy as np

from .errors import IdentityViolation, NotCoprime
from .modarith import Modulus, as_modulus, inverse_table, mod_inverse

_roots_cache = {}
_INDEX_MATRIX_MAX = 2048


def roots_of_unity(q):
    """Array r with r[k] = e_q(k), cached per modulus."""
    q = int(q)
    if q not in _roots_cache:
        _roots_cache[q] = np.exp(2j * np.pi * np.arange(q) / q)
    return _roots_cache[q]


_index_cache = {}


def _product_indices(q):
    # (n*x) mod q for all n, x; only built for small q, O(q^2) memory
    if q not in _index_cache:
        n = np.arange(q, dtype=np.int64)
        _index_cache[q] = (np.outer(n, n) % q).astype(np.int32)
    return _index_cache[q]


def _dft_matrix_apply(values, sign):
    """sum_x values[x] * e_q(sign * n * x) for all n, divided by sqrt(q)."""
    q = len(values)
    roots = roots_of_unity(q)
    if sign < 0:
        roots = roots.conj()
    if q <= _INDEX_MATRIX_MAX:
        return roots[_product_indices(q)].dot(values) / math.sqrt(q)
    out = np.empty(q, dtype=np.complex128)
    x = np.arange(q, dtype=np.int64)
    for n in range(q):
        out[n] = roots[(n * x) % q].dot(values)
    return out / math.sqrt(q)


class PeriodicFunction:
    """Immutable complex-valued function on Z/qZ with a lazy DFT cache."""

    def __init__(self, modulus, values):
        self.modulus = as_modulus(modulus)
        vals = np.asarray(values, dtype=np.complex128).copy()
        if vals.shape != (self.modulus.value,):
            raise ValueError(f"need {self.modulus.value} values, got shape {vals.shape}")
        vals.setflags(write=False)
        self.values = vals
        self._dft_values = None

    @property
    def q(self):
        return self.modulus.value

    def __call__(self, n):
        return self.values[int(n) % self.q]

    def dft_values(self):
        if self._dft_values is None:
            out = _dft_matrix_apply(self.values, +1)
            out.setflags(write=False)
            self._dft_values = out
        return self._dft_values

    def dft(self):
        """The transform as a PeriodicFunction (computed once, then cached)."""
        out = PeriodicFunction(self.modulus, self.dft_values())
        # inverse of the transform is the conjugate-kernel sum; share the cache
        return out

    def l2_norm_sq(self):
        return float(np.sum(np.abs(self.values) ** 2))


def dft(K: PeriodicFunction) -> PeriodicFunction:
    return K.dft()


def inverse_dft(K: PeriodicFunction) -> PeriodicFunction:
    """q^{-1/2} sum_n values[n] e_q(-n x); inverts dft()."""
    return PeriodicFunction(K.modulus, _dft_matrix_apply(K.values, -1))


def sup_norm_dft(K: PeriodicFunction) -> float:
    return float(np.max(np.abs(K.dft_values())))


def plancherel_defect(K: PeriodicFunction) -> float:
    """| sum|K|^2 - sum|hat K|^2 |, absolute; tiny relative to the L2 mass."""
    return abs(K.l2_norm_sq() - float(np.sum(np.abs(K.dft_values()) ** 2)))


def correlation_L(K: PeriodicFunction, tol=1e-9) -> PeriodicFunction:
    """Autocorrelation profile built from the transform:

        L(x) = q^{-1/2} sum_{u != 0} |hat K(u)|^2 e_q(-ubar x) + q^{-1/2} |hat K(0)|^2.

    Verifies the closed form of its transform, hat L(h) = |hat K(0)|^2 for h = 0
    and |hat K(hbar)|^2 otherwise, and raises IdentityViolation past tol
    (relative to sum |hat K|^2).
    """
    if not K.modulus.is_prime:
        raise ValueError("correlation profile needs a prime modulus")
    q = K.q
    hat = K.dft_values()
    w = np.abs(hat) ** 2
    inv = inverse_table(q)
    vals = np.zeros(q, dtype=np.complex128)
    roots = roots_of_unity(q)
    x = np.arange(q)
    for u in range(1, q):
        vals += w[u] * roots[(-inv[u] * x) % q]
    vals += w[0]
    vals /= math.sqrt(q)
    L = PeriodicFunction(K.modulus, vals)
    # check the transform pointwise against the closed form
    hatL = L.dft_values()
    expected = np.empty(q, dtype=np.complex128)
    expected[0] = w[0]
    for h in range(1, q):
        expected[h] = w[inv[h]]
    scale = max(float(np.sum(w)), 1e-300)
    defect = float(np.max(np.abs(hatL - expected)))
    if defect > tol * scale:
        raise IdentityViolation(
            f"correlation transform defect {defect:.3e} exceeds {tol:.1e} * {scale:.3e}"
        )
    return L


def correlation_K2hat(K: PeriodicFunction, d, m1, m2) -> PeriodicFunction:
    """h -> q^{-1/2} sum_n K(d^2 m1 n) conj(K(d^2 m2 n)) e_q(n h).

    The dilation arguments d, m1, m2 must be units mod q (NotCoprime otherwise).
    """
    q = K.q
    for a, name in ((d, "d"), (m1, "m1"), (m2, "m2")):
        if math.gcd(int(a), q) != 1:
            raise NotCoprime(f"{name} = {a} shares a factor with q = {q}")
    n = np.arange(q, dtype=np.int64)
    a1 = K.values[(int(d) ** 2 * int(m1) % q) * n % q]
    a2 = K.values[(int(d) ** 2 * int(m2) % q) * n % q]
    prod = a1 * np.conj(a2)
    return PeriodicFunction(K.modulus, _dft_matrix_apply(prod, +1))


# -- serialization ------------------------------------------------------------

def to_csv(K: PeriodicFunction, stream=None) -> str:
    """Write (residue, re, im) rows with a header; returns the text."""
    buf = stream if stream is not None else io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["residue", "re", "im"])
    for n, v in enumerate(K.values):
        w.writerow([n, f"{v.real:.17g}", f"{v.imag:.17g}"])
    return buf.getvalue() if stream is None else None


def from_csv(text) -> PeriodicFunction:
    rows = list(csv.reader(io.StringIO(text)))
    if rows[0] != ["residue", "re", "im"]:
        raise ValueError("missing residue,re,im header")
    body = rows[1:]
    vals = np.zeros(len(body), dtype=np.complex128)
    for res, re, im in body:
        vals[int(res)] = float(re) + 1j * float(im)
    return PeriodicFunction(Modulus(len(body)), vals)


def to_json(K: PeriodicFunction) -> str:
    return json.dumps(
        {
            "modulus": K.q,
            "values": [[f"{v.real:.17g}", f"{v.imag:.17g}"] for v in K.values],
        }
    )


def from_json(text) -> PeriodicFunction:
    doc = json.loads(text)
    vals = np.array([float(re) + 1j * float(im) for re, im in doc["values"]])
    return PeriodicFunction(Modulus(int(doc["modulus"])), vals)

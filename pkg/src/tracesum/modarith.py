"""Modular arithmetic primitives: inverses, primitive roots, Mobius, CRT, dlog tables."""

from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np

from .errors import NotInvertible, OutOfRange

_SIEVE_LIMIT = 10**6
_sieve_cache = {}


def prime_sieve(limit=_SIEVE_LIMIT):
    """Primes up to limit (inclusive) as an int64 array, cached."""
    if limit not in _sieve_cache:
        mask = np.ones(limit + 1, dtype=bool)
        mask[:2] = False
        for p in range(2, int(limit**0.5) + 1):
            if mask[p]:
                mask[p * p:: p] = False
        _sieve_cache[limit] = np.flatnonzero(mask).astype(np.int64)
    return _sieve_cache[limit]


def is_prime(n):
    n = int(n)
    if n < 2:
        return False
    for p, _ in factorize(n):
        return p == n
    return False


def factorize(n):
    """Factor n ≥ 1 by trial division over the cached sieve: list of (p, e)."""
    n = int(n)
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    out = []
    for p in prime_sieve():
        p = int(p)
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
    if n > 1:
        if n > _SIEVE_LIMIT**2:
            raise OutOfRange(f"trial division exhausted below remaining factor {n}")
        out.append((n, 1))
    return out


@dataclass(frozen=True)
class Modulus:
    """A modulus with its factorization held alongside."""

    value: int
    factorization: tuple = field(default=None)
    is_prime: bool = field(default=None)

    def __post_init__(self):
        if self.value < 1:
            raise ValueError(f"modulus must be >= 1, got {self.value}")
        if self.factorization is None:
            object.__setattr__(self, "factorization", tuple(factorize(self.value)))
        if self.is_prime is None:
            fac = self.factorization
            object.__setattr__(self, "is_prime", len(fac) == 1 and fac[0][1] == 1)

    def __int__(self):
        return self.value


def as_modulus(m):
    return m if isinstance(m, Modulus) else Modulus(int(m))


def mod_inverse(x, m):
    """Inverse of x modulo m (extended Euclid, composite m fine)."""
    m = int(m)
    try:
        return pow(int(x), -1, m)
    except ValueError:
        raise NotInvertible(f"{x} is not invertible mod {m}") from None


def euler_phi(n):
    phi = 1
    for p, e in factorize(n):
        phi *= (p - 1) * p ** (e - 1)
    return phi


def mobius(n):
    """Mobius function of n ≥ 1."""
    mu = 1
    for _, e in factorize(n):
        if e > 1:
            return 0
        mu = -mu
    return mu


@lru_cache(maxsize=None)
def primitive_root(q):
    """Smallest primitive root modulo a prime q."""
    q = int(q)
    if not is_prime(q):
        raise ValueError(f"{q} is not prime")
    if q == 2:
        return 1
    prime_divs = [p for p, _ in factorize(q - 1)]
    for g in range(2, q):
        if all(pow(g, (q - 1) // p, q) != 1 for p in prime_divs):
            return g
    raise AssertionError("unreachable: every prime has a primitive root")


def crt_split(x, m):
    """Residues of x modulo each prime power of m, in factorization order."""
    m = as_modulus(m)
    return [int(x) % p**e for p, e in m.factorization]


def crt_combine(residues, m):
    """Inverse of crt_split: the unique residue mod m matching all components."""
    m = as_modulus(m)
    parts = [p**e for p, e in m.factorization]
    if len(residues) != len(parts):
        raise ValueError("component count does not match factorization")
    x = 0
    for r, pe in zip(residues, parts):
        rest = m.value // pe
        x += r * rest * mod_inverse(rest, pe)
    return x % m.value


class DlogTable:
    """Discrete-log table for the full unit group of a prime q.

    log[x-1] holds k with generator^k = x (mod q); a bijection onto 0..q-2.
    """

    def __init__(self, q):
        q = int(q)
        if not is_prime(q):
            raise ValueError(f"{q} is not prime")
        self.modulus = Modulus(q)
        self.generator = primitive_root(q)
        log = np.empty(q - 1, dtype=np.int64)
        acc = 1
        for k in range(q - 1):
            log[acc - 1] = k
            acc = acc * self.generator % q
        self.log = log
        # powers[k] = generator^k, handy for walking the unit group in log order
        self.powers = np.empty(q - 1, dtype=np.int64)
        self.powers[self.log] = np.arange(1, q)

    @property
    def q(self):
        return self.modulus.value

    def dlog(self, x):
        x = int(x) % self.q
        if x == 0:
            raise NotInvertible(f"0 has no discrete log mod {self.q}")
        return int(self.log[x - 1])


_dlog_cache = {}


def dlog_table(q):
    """Cached DlogTable for prime q."""
    q = int(q)
    if q not in _dlog_cache:
        _dlog_cache[q] = DlogTable(q)
    return _dlog_cache[q]


def inverse_table(m):
    """Array inv with inv[x] = x^{-1} mod m for units, 0 elsewhere; inv[0] = 0."""
    m = int(m)
    inv = np.zeros(m, dtype=np.int64)
    if m == 1:
        return inv
    for x in range(1, m):
        if math.gcd(x, m) == 1:
            inv[x] = pow(x, -1, m)
    return inv


def units(m):
    """Units modulo m as an int64 array (empty for m = 1: the single class is 0)."""
    m = int(m)
    if m == 1:
        return np.zeros(0, dtype=np.int64)
    x = np.arange(1, m, dtype=np.int64)
    return x[np.frompyfunc(math.gcd, 2, 1)(x, m).astype(np.int64) == 1]


def primes_in_range(lo, hi, residue=None, mod=4):
    """Primes p in [lo, hi) with p ≡ residue (mod mod) when residue is given."""
    ps = prime_sieve(max(int(hi), 10))
    sel = ps[(ps >= lo) & (ps < hi)]
    if residue is not None:
        sel = sel[sel % mod == residue]
    return [int(p) for p in sel]

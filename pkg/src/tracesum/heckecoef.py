"""Hecke eigenvalue tables for the discriminant cusp form and its symmetric square.

The weight-12 coefficients tau(n) come from the eta product

    Delta = q * prod_{n>=1} (1 - q^n)^24,

expanded exactly: the cube of the product is the sparse series
sum_k (-1)^k (2k+1) q^{k(k+1)/2}, and its eighth power is taken by three
truncated squarings with polynomial coefficients packed into one big integer
(160-bit balanced limbs, gmpy2).  Everything downstream is normalized:
lam(n) = tau(n)/n^{11/2}, so |lam(p)| <= 2 and the local parameters alpha_p
sit on the unit circle with alpha_p + conj(alpha_p) = lam(p).

Degree-3 coefficients lam(m, n) of the symmetric square are Schur polynomial
values s_{(a+b, b, 0)} at {alpha_p^2, 1, alpha_p^{-2}}, evaluated through the
Jacobi-Trudi determinant in complete homogeneous sums.  Because the parameter
multiset is closed under inversion, lam(m, n) = lam(n, m) and all values are
real.
"""

import math
import os
import struct
from pathlib import Path

import gmpy2
import numpy as np

from .errors import IdentityViolation, OutOfRange, Overflow
from .modarith import factorize, mobius, prime_sieve

_LIMB_BITS = 160
_CACHE_MAGIC = b"TAUT"
_CACHE_VERSION = 1


def _tau_eta_product(N):
    """tau(1..N) as exact ints via the packed eta-product expansion."""
    L = _LIMB_BITS
    Lb = L // 8
    pos = bytearray(N * Lb)
    neg = bytearray(N * Lb)
    k = 0
    while k * (k + 1) // 2 < N:
        e = k * (k + 1) // 2
        buf = pos if k % 2 == 0 else neg
        buf[e * Lb : e * Lb + 4] = (2 * k + 1).to_bytes(4, "little")
        k += 1
    J = gmpy2.mpz(int.from_bytes(bytes(pos), "little")) - gmpy2.mpz(
        int.from_bytes(bytes(neg), "little")
    )
    mask = (gmpy2.mpz(1) << (L * N)) - 1
    # J holds prod(1-q^n)^3; three squarings give the 24th power
    J = (J * J) & mask
    J = (J * J) & mask
    J = (J * J) & mask
    # balanced-digit decode: shift every limb by 2^{L-1}, then slice bytes
    ones = mask // ((gmpy2.mpz(1) << L) - 1)
    v = (J + (ones << (L - 1))) & mask
    raw = v.to_bytes(N * Lb, "little")
    half = 1 << (L - 1)
    mv = memoryview(raw)
    taus = [0] * (N + 1)
    for n in range(1, N + 1):
        taus[n] = int.from_bytes(mv[(n - 1) * Lb : n * Lb], "little") - half
    return taus


# -- on-disk cache ------------------------------------------------------------


def cache_path(cache_dir=None):
    d = cache_dir or os.environ.get("TRACESUM_CACHE_DIR")
    if d is None:
        d = Path.home() / ".cache" / "tracesum"
    return Path(d) / "tau.bin"


def write_tau_cache(path, taus):
    """Header: magic 'TAUT', u32 version, u64 N; body: N signed 128-bit LE values."""
    N = len(taus) - 1
    bound = 1 << 127
    body = bytearray(16 * N)
    for n in range(1, N + 1):
        t = taus[n]
        if not -bound <= t < bound:
            raise Overflow(f"tau({n}) needs more than 128 bits")
        body[16 * (n - 1) : 16 * n] = (t & ((1 << 128) - 1)).to_bytes(16, "little")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(_CACHE_MAGIC + struct.pack("<IQ", _CACHE_VERSION, N))
        fh.write(bytes(body))


def read_tau_cache(path):
    """Cached tau values, or None when the file is absent/foreign/outdated."""
    path = Path(path)
    if not path.is_file():
        return None
    raw = path.read_bytes()
    if len(raw) < 16 or raw[:4] != _CACHE_MAGIC:
        return None
    version, N = struct.unpack("<IQ", raw[4:16])
    if version != _CACHE_VERSION or len(raw) != 16 + 16 * N:
        return None
    sign_bit = 1 << 127
    wrap = 1 << 128
    mv = memoryview(raw)[16:]
    taus = [0] * (N + 1)
    for n in range(1, N + 1):
        t = int.from_bytes(mv[16 * (n - 1) : 16 * n], "little")
        taus[n] = t - wrap if t & sign_bit else t
    return taus


def tau_table(N, cache_dir=None, use_cache=True):
    """tau(0..N) as exact ints (index 0 is a zero placeholder)."""
    N = int(N)
    if use_cache:
        path = cache_path(cache_dir)
        cached = read_tau_cache(path)
        if cached is not None and len(cached) - 1 >= N:
            return cached[: N + 1]
        taus = _tau_eta_product(N)
        try:
            write_tau_cache(path, taus)
        except OSError:
            pass  # read-only cache location: still return the table
        return taus
    return _tau_eta_product(N)


# -- the eigenvalue system ----------------------------------------------------


class HeckeSystem:
    """tau table plus derived normalized eigenvalues, with prime-power caches."""

    def __init__(self, N, cache_dir=None, use_cache=True):
        self.limit = int(N)
        self.tau = tau_table(self.limit, cache_dir=cache_dir, use_cache=use_cache)
        n = np.arange(self.limit + 1, dtype=np.float64)
        n[0] = 1.0
        self.lam = np.array([float(t) for t in self.tau]) / n**5.5
        self.lam[0] = 0.0
        self._spf = None
        self._pp_gl2 = {}
        self._pp_sym2 = {}
        self._schur = {}
        self._sym2_table = None

    # smallest-prime-factor sieve, built on first use
    def spf(self):
        if self._spf is None:
            N = self.limit
            spf = np.zeros(N + 1, dtype=np.int64)
            for p in prime_sieve(N) if N >= 2 else []:
                sl = spf[p::p]
                sl[sl == 0] = p
            self._spf = spf
        return self._spf

    def _factor(self, n):
        if n <= self.limit:
            spf = self.spf()
            out = []
            while n > 1:
                p = int(spf[n])
                e = 0
                while n % p == 0:
                    n //= p
                    e += 1
                out.append((p, e))
            return out
        return factorize(n)

    def lambda_gl2(self, n):
        """lam(n) = tau(n)/n^{11/2} straight from the table."""
        if not 1 <= n <= self.limit:
            raise OutOfRange(f"n = {n} outside table range 1..{self.limit}")
        return float(self.lam[n])

    def lambda_gl2_pp(self, p, k):
        """lam(p^k) via lam(p^{k+1}) = lam(p) lam(p^k) - lam(p^{k-1}); any k >= 0."""
        if k == 0:
            return 1.0
        key = (p, k)
        if key not in self._pp_gl2:
            c = self.lambda_gl2(p)
            seq = [1.0, c]
            while len(seq) <= k:
                seq.append(c * seq[-1] - seq[-2])
            for i, v in enumerate(seq):
                self._pp_gl2.setdefault((p, i), v)
        return self._pp_gl2[key]

    def lambda_gl2_any(self, n):
        """lam at arbitrary n (multiplicative assembly; primes must be <= limit)."""
        out = 1.0
        for p, e in self._factor(int(n)):
            out *= self.lambda_gl2_pp(p, e)
        return out

    def lambda_gl2_square(self, n):
        """lam(n^2) without tabulating up to n^2."""
        out = 1.0
        for p, e in self._factor(int(n)):
            out *= self.lambda_gl2_pp(p, 2 * e)
        return out

    def satake(self, p):
        """alpha_p on the unit circle with alpha_p + conj(alpha_p) = lam(p)."""
        c = self.lambda_gl2(p)
        if abs(c) > 2:
            raise IdentityViolation(f"|lam({p})| = {abs(c):.6f} > 2")
        return complex(c / 2, math.sqrt(max(0.0, 1 - (c / 2) ** 2)))

    # -- symmetric-square coefficients ----------------------------------------

    def _h_sequence(self, p, top):
        """Complete homogeneous sums h_0..h_top of {a^2, 1, a^-2}: with
        x = lam(p)^2 - 1 the elementary sums are e1 = e2 = x, e3 = 1, so
        h_k = x (h_{k-1} - h_{k-2}) + h_{k-3}."""
        c = self.lambda_gl2(p)
        x = c * c - 1.0
        h = [1.0, x]
        while len(h) <= top:
            h3 = h[-3] if len(h) >= 3 else 0.0
            h.append(x * (h[-1] - h[-2]) + h3)
        return h

    def schur(self, p, a, b):
        """s_{(a+b, b, 0)} at the degree-3 local parameters of p."""
        key = (p, a, b)
        if key not in self._schur:
            l1, l2 = a + b, b
            h = self._h_sequence(p, l1 + 2)

            def hh(k):
                return h[k] if 0 <= k <= l1 + 2 else 0.0

            # Jacobi-Trudi: det [ h_{l_i - i + j} ]_{i,j=1..3} with l3 = 0
            m = [
                [hh(l1), hh(l1 + 1), hh(l1 + 2)],
                [hh(l2 - 1), hh(l2), hh(l2 + 1)],
                [hh(-2), hh(-1), hh(0)],
            ]
            det = (
                m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
            )
            self._schur[key] = det
        return self._schur[key]

    def lambda_sym2_pp(self, p, a):
        """lam(1, p^a) = sum_{2j <= a} lam((p^{a-2j})^2); equals schur(p, 0, a)."""
        key = (p, a)
        if key not in self._pp_sym2:
            total = 0.0
            for j in range(a // 2 + 1):
                total += self.lambda_gl2_pp(p, 2 * (a - 2 * j))
            self._pp_sym2[key] = total
        return self._pp_sym2[key]

    def gl3_coefficient(self, m, n):
        """lam(m, n), multiplicative over primes: product of s_{(a+b, b, 0)}."""
        m, n = int(m), int(n)
        if m < 1 or n < 1:
            raise OutOfRange(f"coefficients indexed by positive integers, got ({m}, {n})")
        ex = {}
        for p, e in self._factor(m):
            ex[p] = [e, 0]
        for p, e in self._factor(n):
            ex.setdefault(p, [0, 0])[1] = e
        out = 1.0
        for p, (a, b) in ex.items():
            out *= self.schur(p, a, b)
        return out

    def lambda_sym2(self, n):
        """lam(1, n) through the prime-power route (no Schur determinant)."""
        out = 1.0
        for p, e in self._factor(int(n)):
            out *= self.lambda_sym2_pp(p, e)
        return out

    def lambda_sym2_table(self, N):
        """lam(1, n) for n = 0..N as a float array (index 0 unused); the largest
        table built so far is kept, so repeated calls just slice it."""
        N = int(N)
        if N > self.limit:
            raise OutOfRange(f"table limit {self.limit} below requested {N}")
        if self._sym2_table is None or len(self._sym2_table) - 1 < N:
            spf = self.spf()
            out = np.zeros(N + 1, dtype=np.float64)
            out[1] = 1.0
            for n in range(2, N + 1):
                p = int(spf[n])
                rest = n
                e = 0
                while rest % p == 0:
                    rest //= p
                    e += 1
                out[n] = out[rest] * self.lambda_sym2_pp(p, e)
            self._sym2_table = out
        return self._sym2_table[: N + 1]

    # -- identity audit --------------------------------------------------------

    def verify_identities(self, N, tol=1e-9):
        """Numerically audit the four coefficient identities up to N:

        (a) lam(n)^2 = sum_{ab=n} lam(a^2)
        (b) lam(1, n) = sum_{d^2 | n} lam((n/d^2)^2)
        (c) lam(n^2) = sum_{d^2 | n} mu(d) lam(1, n/d^2)
        (d) |lam(1, p)| <= 3 p^{5/14}

        Defects are relative to max(1, |lhs|); IdentityViolation on failure.
        Returns {"checked": N, "max_defect": ..., "kim_sarnak_margin": ...}.
        """
        N = int(N)
        if N > self.limit:
            raise OutOfRange(f"table limit {self.limit} below requested {N}")
        worst = 0.0
        worst_case = None
        for n in range(1, N + 1):
            fac = self._factor(n)
            divs = [1]
            for p, e in fac:
                divs = [d * p**k for d in divs for k in range(e + 1)]
            lhs_a = self.lambda_gl2(n) ** 2
            rhs_a = sum(self.lambda_gl2_square(a) for a in divs)
            square_divs = [d for d in divs if all(e % 2 == 0 for _, e in self._factor(d))]
            sq_roots = [math.isqrt(d) for d in square_divs]
            lhs_b = self.lambda_sym2(n)
            rhs_b = sum(self.lambda_gl2_square(n // (d * d)) for d in sq_roots)
            lhs_c = self.lambda_gl2_square(n)
            rhs_c = sum(mobius(d) * self.lambda_sym2(n // (d * d)) for d in sq_roots)
            for tag, lhs, rhs in (("a", lhs_a, rhs_a), ("b", lhs_b, rhs_b), ("c", lhs_c, rhs_c)):
                defect = abs(lhs - rhs) / max(1.0, abs(lhs))
                if defect > worst:
                    worst, worst_case = defect, (tag, n)
        if worst > tol:
            raise IdentityViolation(
                f"identity ({worst_case[0]}) fails at n = {worst_case[1]}: defect {worst:.3e}"
            )
        margin = 1.0
        for p in prime_sieve(N):
            p = int(p)
            ratio = abs(self.lambda_sym2_pp(p, 1)) / (3 * p ** (5 / 14))
            margin = min(margin, 1 - ratio)
            if ratio > 1:
                raise IdentityViolation(f"spectral-parameter bound fails at p = {p}")
        return {"checked": N, "max_defect": worst, "kim_sarnak_margin": margin}

    def rankin_selberg_ratios(self, X):
        """(sum_{n<=X} lam(1,n)^2 / X, sum_{m^2 n <= X} m lam(m,n)^2 / X)."""
        X = int(X)
        tab = self.lambda_sym2_table(X)
        first = float(np.sum(tab[1:] ** 2)) / X
        second = 0.0
        m = 1
        while m * m <= X:
            for n in range(1, X // (m * m) + 1):
                second += m * self.gl3_coefficient(m, n) ** 2
            m += 1
        return first, second / X


# module-level conveniences matching the operation signatures


def gl3_coefficient(m, n, H: HeckeSystem):
    return H.gl3_coefficient(m, n)


def verify_identities(H: HeckeSystem, N, tol=1e-9):
    return H.verify_identities(N, tol=tol)


def rankin_selberg_ratios(H: HeckeSystem, X):
    return H.rankin_selberg_ratios(X)

"""Smooth cutoff windows and the complete/incomplete sums built from them.

The window V_Z lives on (1, 2), equals 1 on [1 + 1/Z', 2 - 1/Z'] with
Z' = max(Z, 2), and is glued from the standard exp(-1/t) bump:

    sigma(t) = exp(-1/t) (t > 0),   S(t) = sigma(t) / (sigma(t) + sigma(1-t)),
    V_Z(x) = S(Z'(x - 1)) * S(Z'(2 - x)).

Derivatives grow like Z^i; they are computed by central finite differences
(Fornberg weights) and feed only truncation heuristics, never identities.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import IdentityViolation, OutOfRange, QuadratureFailure, TruncationTooCoarse
from .heckecoef import HeckeSystem
from .modarith import mobius
from .periodic import PeriodicFunction
from . import tracefn

# -- quadrature ---------------------------------------------------------------


def adaptive_simpson(f, a, b, tol=1e-12, max_depth=48, seed_panels=8):
    """Integral of complex-valued f over [a, b], absolute target tol.

    Adaptive Simpson with the classic |S_fine - S_coarse|/15 estimate, run
    breadth-first: all panels failing their error test are bisected together
    and f is evaluated on the whole batch of new nodes at once (f must accept
    numpy arrays).  The interval is pre-split into seed_panels so an
    oscillatory integrand cannot fool the first error estimate.
    QuadratureFailure past max_depth.
    """
    edges = np.linspace(a, b, seed_panels + 1)
    x0 = edges[:-1].copy()
    x2 = edges[1:].copy()
    xm = 0.5 * (x0 + x2)
    f0 = np.asarray(f(x0), dtype=np.complex128)
    f1 = np.asarray(f(xm), dtype=np.complex128)
    f2 = np.asarray(f(x2), dtype=np.complex128)
    whole = (x2 - x0) / 6 * (f0 + 4 * f1 + f2)
    tol_here = np.full(seed_panels, tol / seed_panels)

    total = 0j
    depth = 0
    while x0.size:
        if depth > max_depth:
            raise QuadratureFailure(f"adaptive Simpson exceeded depth {max_depth}")
        xm = 0.5 * (x0 + x2)
        xl = 0.5 * (x0 + xm)
        xr = 0.5 * (xm + x2)
        fl = np.asarray(f(xl), dtype=np.complex128)
        fr = np.asarray(f(xr), dtype=np.complex128)
        left = (xm - x0) / 6 * (f0 + 4 * fl + f1)
        right = (x2 - xm) / 6 * (f1 + 4 * fr + f2)
        err = left + right - whole
        done = np.abs(err) <= 15 * tol_here
        total += complex(np.sum(left[done] + right[done] + err[done] / 15))
        keep = ~done
        # each kept panel [x0, x2] splits at xm; children inherit midpoints fl, fr
        x0 = np.concatenate([x0[keep], xm[keep]])
        x2 = np.concatenate([xm[keep], x2[keep]])
        f0 = np.concatenate([f0[keep], f1[keep]])
        f2 = np.concatenate([f1[keep], f2[keep]])
        f1 = np.concatenate([fl[keep], fr[keep]])
        whole = np.concatenate([left[keep], right[keep]])
        half_tol = tol_here[keep] / 2
        tol_here = np.concatenate([half_tol, half_tol])
        depth += 1
    return total


def _fd_weights(order, offsets, h):
    """Finite-difference weights for the given derivative order at offset*h nodes
    (Fornberg's recurrence, evaluation point 0)."""
    x = [o * h for o in offsets]
    n = len(x)
    m = order
    d = [[[0.0] * n for _ in range(m + 1)] for _ in range(n)]
    d[0][0][0] = 1.0
    c1 = 1.0
    for i in range(1, n):
        c2 = 1.0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            for k in range(min(i, m) + 1):
                d[i][k][j] = (x[i] * d[i - 1][k][j] - k * d[i - 1][k - 1][j]) / c3
        for k in range(min(i, m) + 1):
            d[i][k][i] = c1 / c2 * (k * d[i - 1][k - 1][i - 1] - x[i - 1] * d[i - 1][k][i - 1])
        c1 = c2
    return d[n - 1][m]


# -- the window ---------------------------------------------------------------


def _bump_step(t):
    """S(t): 0 for t <= 0, 1 for t >= 1, smooth monotone glue between."""
    t = np.asarray(t, dtype=np.float64)
    out = np.zeros_like(t)
    out[t >= 1] = 1.0
    mid = (t > 0) & (t < 1)
    tm = t[mid]
    a = np.exp(-1.0 / tm)
    b = np.exp(-1.0 / (1.0 - tm))
    out[mid] = a / (a + b)
    return out


class SmoothWindow:
    """V_Z as above; callable on scalars or arrays, with derivatives and a
    cached Fourier transform hat V(y) = int V(x) e(-x y) dx."""

    def __init__(self, Z=1.0, quad_tol=1e-12):
        if Z <= 0:
            raise ValueError(f"window sharpness must be positive, got {Z}")
        self.Z = float(Z)
        self.Zp = max(float(Z), 2.0)
        self.quad_tol = float(quad_tol)
        self._fourier_cache = {}
        self._deriv_sup = {}

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        vals = _bump_step(self.Zp * (x - 1.0)) * _bump_step(self.Zp * (2.0 - x))
        return vals if vals.shape else float(vals)

    def derivative(self, x, order):
        """d^order V / dx^order at x, central differences on a fixed stencil."""
        order = int(order)
        if not 0 <= order <= 8:
            raise OutOfRange(f"derivative order must lie in 0..8, got {order}")
        if order == 0:
            return self(x)
        half = (order + 1) // 2 + 3
        offsets = range(-half, half + 1)
        h = 0.4 / (self.Zp * len(list(offsets)))
        w = _fd_weights(order, list(offsets), h)
        xs = np.asarray(x, dtype=np.float64)
        total = sum(wk * self(xs + o * h) for wk, o in zip(w, range(-half, half + 1)))
        return total

    def derivative_sup(self, order, samples=257):
        """max |V^(order)| over a uniform sample of (1, 2), cached."""
        if order not in self._deriv_sup:
            xs = np.linspace(1.0, 2.0, samples)
            self._deriv_sup[order] = float(np.max(np.abs(self.derivative(xs, order))))
        return self._deriv_sup[order]

    def fourier(self, y):
        """hat V(y) = int_1^2 V(x) exp(-2 pi i x y) dx, adaptive Simpson, cached."""
        y = float(y)
        if y not in self._fourier_cache:
            panels = max(8, 4 * int(abs(y)) + 4)
            val = adaptive_simpson(
                lambda x: self(x) * np.exp(-2j * np.pi * np.asarray(x) * y),
                1.0,
                2.0,
                tol=self.quad_tol,
                seed_panels=panels,
            )
            self._fourier_cache[y] = val
        return self._fourier_cache[y]

    def integral(self):
        return self.fourier(0.0).real

    def fourier_normalized(self, y):
        """hat of the unit-mass rescaling W = V / int V; exactly 1 at y = 0."""
        return self.fourier(y) / self.fourier(0.0).real

    def fourier_batch(self, ys, tol=1e-11):
        """hat V at many frequencies in one pass: midpoint rule on a uniform
        grid, doubled until two successive grids agree within tol.  For a
        compactly supported C-infinity window the midpoint rule converges
        faster than any power of the step, so the doubling test is sharp.
        Cross-validated against the adaptive path in the test suite."""
        ys = np.asarray(ys, dtype=np.float64)
        M = max(4096, 8 * (int(np.max(np.abs(ys))) + 1))
        M = 1 << (M - 1).bit_length()
        prev = None
        while M <= 2**22:
            x = 1.0 + (np.arange(M) + 0.5) / M
            v = self(x) / M
            vals = np.empty(len(ys), dtype=np.complex128)
            step = max(1, 2**24 // M)
            for lo in range(0, len(ys), step):
                block = ys[lo : lo + step]
                vals[lo : lo + step] = np.exp(
                    -2j * np.pi * block[:, None] * x[None, :]
                ) @ v
            if prev is not None and float(np.max(np.abs(vals - prev))) <= tol:
                return vals
            prev = vals
            M *= 2
        raise QuadratureFailure("uniform-grid transform did not stabilize")


# -- incomplete sums with coefficient weights ---------------------------------

COEFF_VARIANTS = ("gl3", "gl2_square_arg", "gl2_squared", "unit")


def _coeff_values(H: HeckeSystem, ns, variant):
    if variant == "unit":
        return np.ones(len(ns), dtype=np.float64)
    if H is None:
        raise ValueError("coefficient variant %r needs a HeckeSystem" % (variant,))
    if variant == "gl3":
        tab = H.lambda_sym2_table(int(ns[-1]))
        return tab[ns]
    if variant == "gl2_squared":
        return np.array([H.lambda_gl2(int(n)) for n in ns]) ** 2
    if variant == "gl2_square_arg":
        return np.array([H.lambda_gl2_square(int(n)) for n in ns])
    raise ValueError(f"unknown coefficient variant {variant!r}")


def _support_range(X):
    lo = int(math.floor(X)) + 1
    hi = int(math.ceil(2 * X)) - 1
    if hi < lo:
        return np.zeros(0, dtype=np.int64)
    return np.arange(lo, hi + 1, dtype=np.int64)


def s_v(K: PeriodicFunction, H, W: SmoothWindow, X, coeff="gl3") -> complex:
    """sum_n c(n) K(n) V(n/X) over the window support n in (X, 2X), where the
    coefficient c(n) is lam(1,n) / lam(n^2) / lam(n)^2 / 1 per the variant."""
    if coeff not in COEFF_VARIANTS:
        raise ValueError(f"coeff must be one of {COEFF_VARIANTS}")
    ns = _support_range(X)
    if len(ns) == 0:
        return 0j
    if coeff != "unit" and H is not None and ns[-1] > H.limit:
        raise OutOfRange(f"sum reaches n = {ns[-1]} beyond the table limit {H.limit}")
    c = _coeff_values(H, ns, coeff)
    kv = K.values[ns % K.q]
    vv = W(ns / X)
    return complex(np.sum(c * kv * vv))


def poisson_defect(K: PeriodicFunction, W: SmoothWindow, X, tail_target=1e-10):
    """Relative defect between the two sides of the complete-sum formula

        sum_n K(n) V(n/X) = (X/sqrt q) sum_{h in Z} hat K(h mod q) hat V(h X / q),

    the right side truncated once the integration-by-parts tail estimate
    (8 parts: |hat V(y)| <= sup|V^(8)| / (2 pi y)^8) drops below tail_target.
    The defect is divided by max(1, sum_n |K(n) V(n/X)|): the signed sum can
    cancel to zero, the L1 mass cannot.
    """
    q = K.q
    ns = _support_range(X)
    vv = W(ns / X)
    kv = K.values[ns % q]
    lhs = complex(np.sum(kv * vv))
    scale = max(1.0, float(np.sum(np.abs(kv * vv))))

    hat = K.dft_values()
    khat_inf = float(np.max(np.abs(hat)))
    m8 = W.derivative_sup(8)

    def tail_bound(hmax):
        # sum_{|h| > hmax} (X/sqrt q) |hat K| m8 (q/(2 pi h X))^8 <= integral comparison
        base = (X / math.sqrt(q)) * khat_inf * m8 * (q / (2 * math.pi * X)) ** 8
        return 2 * base / (7 * hmax**7)

    hmax = 4
    while tail_bound(hmax) > tail_target * scale:
        hmax *= 2
        if hmax > 2**22:
            raise TruncationTooCoarse(
                f"tail bound still {tail_bound(hmax):.2e} at hmax = {hmax}"
            )
    # V real, so hat V(-y) = conj hat V(y): one quadrature serves both signs
    rhs = hat[0] * W.fourier(0.0)
    for h in range(1, hmax + 1):
        vy = W.fourier(h * X / q)
        rhs += hat[h % q] * vy + hat[-h % q] * vy.conjugate()
    rhs *= X / math.sqrt(q)
    return abs(lhs - rhs) / scale


# -- scans over moduli --------------------------------------------------------


@dataclass
class ScanConfig:
    q_list: tuple
    x_rule: str = "q**1.5"
    z: float = 2.0
    families: tuple = ("legendre", "kl2", "kl3")
    coeff: str = "gl3"


_X_RULE_ALLOWED = set("0123456789q.*/+-() ^")


def eval_x_rule(rule, q):
    """Evaluate an X(q) rule like 'q**1.5' or '2*q' (plain arithmetic only)."""
    if set(rule) - _X_RULE_ALLOWED:
        raise ValueError(f"x-rule {rule!r} contains unsupported characters")
    val = eval(rule.replace("^", "**"), {"__builtins__": {}}, {"q": float(q)})
    val = float(val)
    if not val > 0:
        raise ValueError(f"x-rule {rule!r} gave non-positive X = {val}")
    return val


def theorem_window(q, X, Z):
    """Whether (q, X, Z) sits in the regime Z^{2/3} q^{4/3} <= X <= Z^{-2} q^2."""
    return Z ** (2 / 3) * q ** (4 / 3) <= X <= q**2 / Z**2


def exponent_scan(cfg: ScanConfig, H: HeckeSystem):
    """One row per (q, family): the windowed coefficient sum against the scaled
    power-saving benchmark ||hat K||_inf Z^{10/9} q^{2/9} X^{5/6}."""
    W = SmoothWindow(cfg.z)
    rows = []
    for q in cfg.q_list:
        q = int(q)
        X = eval_x_rule(cfg.x_rule, q)
        for fam in cfg.families:
            spec = tracefn.parse_trace(fam, q)
            K = tracefn.build(spec)
            S = s_v(K, H, W, X, coeff=cfg.coeff)
            khat_inf = float(np.max(np.abs(K.dft_values())))
            bound = khat_inf * cfg.z ** (10 / 9) * q ** (2 / 9) * X ** (5 / 6)
            rows.append(
                {
                    "q": q,
                    "X": X,
                    "Z": cfg.z,
                    "family": fam,
                    "S_re": S.real,
                    "S_im": S.imag,
                    "khat_inf": khat_inf,
                    "bound": bound,
                    "ratio": abs(S) / bound if bound > 0 else math.inf,
                    "trivial_ratio": abs(S) / X,
                }
            )
    return rows


# -- square-coefficient sums and their telescoping ----------------------------


@dataclass
class CorollaryReport:
    c_square_arg: complex
    c_squared: complex
    d_rows: list = field(default_factory=list)
    defect_square_arg: float = 0.0
    defect_squared: float = 0.0


def corollary_sums(K: PeriodicFunction, H: HeckeSystem, W: SmoothWindow, X, tol=1e-8):
    """The two square-flavored sums and the exact telescoping that reduces them
    to degree-3 sums:

        sum_n lam(n^2) K(n) V(n/X)  =  sum_d mu(d) sum_m lam(1,m) K(d^2 m) V(d^2 m/X)
        sum_n lam(n)^2 K(n) V(n/X)  =  sum_d mu(d) T_d,
        T_d = sum_{m,n} lam(1,n) K(d^2 m n) V(d^2 m n / X).

    Both routes are computed; IdentityViolation if they disagree past tol
    relative to max(1, |direct value|).
    """
    c15 = s_v(K, H, W, X, coeff="gl2_square_arg")
    c16 = s_v(K, H, W, X, coeff="gl2_squared")

    two_x = 2 * X
    dmax = int(math.isqrt(int(two_x))) + 1
    sym2 = H.lambda_sym2_table(int(two_x) + 1)

    c15_dual = 0j
    c16_dual = 0j
    d_rows = []
    q = K.q
    for d in range(1, dmax + 1):
        mu = mobius(d)
        d2 = d * d
        if d2 > two_x:
            break
        mmax = int(two_x // d2)
        ms = np.arange(1, mmax + 1, dtype=np.int64)
        # single-m slice: contributes to the square-argument telescoping
        vv = W(d2 * ms / X)
        kv = K.values[(d2 * ms) % q]
        if mu != 0:
            c15_dual += mu * complex(np.sum(sym2[ms] * kv * vv))
        # double sum T_d
        t_d = 0j
        for m in range(1, mmax + 1):
            nmax = int(two_x // (d2 * m))
            if nmax < 1:
                break
            nss = np.arange(1, nmax + 1, dtype=np.int64)
            args = d2 * m * nss
            t_d += complex(np.sum(sym2[nss] * K.values[args % q] * W(args / X)))
        d_rows.append({"d": d, "T_d_re": t_d.real, "T_d_im": t_d.imag, "mu": mu})
        if mu != 0:
            c16_dual += mu * t_d

    defect15 = abs(c15 - c15_dual) / max(1.0, abs(c15))
    defect16 = abs(c16 - c16_dual) / max(1.0, abs(c16))
    report = CorollaryReport(c15, c16, d_rows, defect15, defect16)
    if defect15 > tol or defect16 > tol:
        raise IdentityViolation(
            f"square-sum telescoping defects ({defect15:.3e}, {defect16:.3e}) exceed {tol:.1e}"
        )
    return report


def additive_twist_sum(H: HeckeSystem, W: SmoothWindow, X, alpha) -> complex:
    """sum_n lam(1,n) e(alpha n) V(n/X) for a real frequency alpha."""
    ns = _support_range(X)
    if len(ns) == 0:
        return 0j
    sym2 = H.lambda_sym2_table(int(ns[-1]))
    return complex(np.sum(sym2[ns] * np.exp(2j * np.pi * alpha * ns) * W(ns / X)))

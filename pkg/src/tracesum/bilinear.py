"""Bilinear forms with a difference kernel on Z/qZ and their spectral bound.

For alpha, beta: Z/qZ -> C and a kernel K,

    B(alpha, beta; K) = sum_{m,n} alpha(m) beta(n) K(m - n)
                      = sqrt(q) * sum_t hat alpha(-t) hat beta(t) hat K(t),

so |B| <= sqrt(q) ||hat K||_inf ||alpha||_2 ||beta||_2 by Cauchy-Schwarz and
Plancherel.  Both routes are always evaluated and compared.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DegenerateNorm, IdentityViolation
from .modarith import as_modulus
from .periodic import PeriodicFunction, _dft_matrix_apply


@dataclass
class BilinearInstance:
    modulus: object
    alpha: np.ndarray
    beta: np.ndarray
    kernel: PeriodicFunction

    def __post_init__(self):
        self.modulus = as_modulus(self.modulus)
        q = self.modulus.value
        self.alpha = np.asarray(self.alpha, dtype=np.complex128)
        self.beta = np.asarray(self.beta, dtype=np.complex128)
        if self.alpha.shape != (q,) or self.beta.shape != (q,):
            raise ValueError(f"alpha/beta must have length {q}")
        if self.kernel.q != q:
            raise ValueError("kernel modulus differs from instance modulus")


def bilinear_form(B: BilinearInstance, tol=1e-8) -> complex:
    """The form, computed by difference-grouping and through the transform;
    IdentityViolation if the two disagree beyond tol * (norm scale)."""
    q = B.modulus.value
    K = B.kernel.values
    direct = 0j
    for d in range(q):
        # roll(beta, d)[m] = beta[(m - d) % q]
        direct += K[d] * np.dot(B.alpha, np.roll(B.beta, d))

    ahat = _dft_matrix_apply(B.alpha, +1)
    bhat = _dft_matrix_apply(B.beta, +1)
    khat = B.kernel.dft_values()
    t = np.arange(q)
    spectral = math.sqrt(q) * np.sum(ahat[(-t) % q] * bhat * khat)

    scale = max(
        1.0,
        math.sqrt(q)
        * float(np.linalg.norm(B.alpha))
        * float(np.linalg.norm(B.beta))
        * max(float(np.max(np.abs(khat))), 1e-300),
    )
    if abs(direct - spectral) > tol * scale:
        raise IdentityViolation(
            f"difference-grouped and spectral forms disagree by {abs(direct - spectral):.3e}"
        )
    return complex(direct)


def bound_ratio(B: BilinearInstance, tol=1e-8) -> float:
    """|B| / (sqrt(q) ||hat K||_inf ||alpha||_2 ||beta||_2); <= 1 + tol always."""
    q = B.modulus.value
    khat_inf = float(np.max(np.abs(B.kernel.dft_values())))
    denom = (
        math.sqrt(q)
        * khat_inf
        * float(np.linalg.norm(B.alpha))
        * float(np.linalg.norm(B.beta))
    )
    if denom == 0.0:
        raise DegenerateNorm("bound denominator vanishes (zero kernel transform or zero vector)")
    return abs(bilinear_form(B, tol=tol)) / denom

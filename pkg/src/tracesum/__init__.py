"""Exact and numerical toolkit for trace functions modulo a prime, Hecke
eigenvalue tables, and the correlation sums built from them."""

__version__ = "0.1.0"

from .errors import (
    DegenerateNorm,
    EmptyMeasure,
    IdentityViolation,
    InvalidInstance,
    InvalidSpec,
    LemmaViolation,
    NotCoprime,
    NotInvertible,
    OutOfRange,
    Overflow,
    QuadratureFailure,
    TracesumError,
    TrivialCharacter,
    TruncationTooCoarse,
    VerificationError,
)
from .modarith import (
    DlogTable,
    Modulus,
    as_modulus,
    crt_combine,
    crt_split,
    dlog_table,
    euler_phi,
    factorize,
    is_prime,
    mobius,
    mod_inverse,
    primes_in_range,
    primitive_root,
)
from .periodic import (
    PeriodicFunction,
    correlation_L,
    dft,
    inverse_dft,
    plancherel_defect,
    sup_norm_dft,
)
from .tracefn import (
    DirichletCharacter,
    TraceFunctionSpec,
    build,
    gauss_sum,
    hyper_kloosterman_table,
    kl3_twist,
    kloosterman,
    kloosterman_table,
    mellin_transform,
    parse_trace,
)
from .heckecoef import HeckeSystem, tau_table
from .bilinear import BilinearInstance, bilinear_form, bound_ratio
from .charsums import CInstance, c_sum, default_grid, lemma_audit, ramanujan_sum
from .sums import (
    ScanConfig,
    SmoothWindow,
    corollary_sums,
    exponent_scan,
    poisson_defect,
    s_v,
)
from .amplifier import (
    AmplifierFamily,
    PrimePairMeasure,
    decompose_FO,
    family_value,
    measure_average,
    nu_count,
    optimal_parameters,
)

"""Numerics for Hardy spaces attached to the one-dimensional Dunkl operator.

The measure dmu = (2 lam + 1)|x|^(2 lam) dx, the Dunkl transform and its
Poisson and conjugate Poisson kernels, the grand, radial and nontangential
maximal functions, atoms, and the suites that check them.
"""

from .kernels import (
    KernelHandle,
    KernelReport,
    SamplingPlan,
    check_kernel_class,
    conj_poisson_kernel,
    hilbert_kernel,
    poisson_kernel,
    poisson_scale_kernel,
    scale_kernel_K,
    triangular_kernel,
)
from .maximal import (
    HarmonicField,
    HypothesisError,
    grand_maximal,
    lp_quasinorm,
    make_atom,
    nontangential_maximal,
    radial_maximal,
    schwartz_moment_bump,
)
from .measure import WeightedMeasure, ball_interval, hl_maximal
from .operators import DunklSpectrum, SampledFunction, dunkl_derivative, dunkl_transform, translate
from .quadrature import integrate, integrate_weighted_line
from .special import LambdaParam, bessel_j_normalized, dunkl_kernel_E, gamma
from .suites import SuiteConfig, VerificationReport

__version__ = "0.1.0"

__all__ = [
    "LambdaParam",
    "gamma",
    "bessel_j_normalized",
    "dunkl_kernel_E",
    "integrate",
    "integrate_weighted_line",
    "WeightedMeasure",
    "ball_interval",
    "hl_maximal",
    "SampledFunction",
    "DunklSpectrum",
    "dunkl_transform",
    "dunkl_derivative",
    "translate",
    "poisson_kernel",
    "conj_poisson_kernel",
    "hilbert_kernel",
    "scale_kernel_K",
    "KernelHandle",
    "KernelReport",
    "SamplingPlan",
    "check_kernel_class",
    "triangular_kernel",
    "poisson_scale_kernel",
    "HarmonicField",
    "HypothesisError",
    "grand_maximal",
    "radial_maximal",
    "nontangential_maximal",
    "lp_quasinorm",
    "make_atom",
    "schwartz_moment_bump",
    "SuiteConfig",
    "VerificationReport",
]

"""Photon-count distributions under binomial attenuation.

Exact thinning of finite-support photon-number distributions, Poisson
approximation error certificates, multi-photon risk estimation, and a
seeded Monte Carlo cross-check.
"""

from .approximation import (
    ApproxReport,
    build_report,
    predicted_delta,
    risk_approx,
    risk_exact,
    thinned_reference,
)
from .errors import (
    AllVacuumError,
    DegenerateLambdaError,
    DistributionError,
    DuplicateIndexError,
    InvalidParameterError,
    NegativeMassError,
    NotNormalizedError,
    PhotonThinError,
    TargetExceedsMeanError,
    TermOverflowError,
    ZeroMeanError,
)
from .montecarlo import McConfig, McResult, simulate_thinned
from .pmf import (
    AttenuationCoefficient,
    MomentSummary,
    Pmf,
    gf_derivative,
    make_pmf,
    moments,
    poisson_family,
    tv_distance,
)
from .thinning import eta_for_target_lambda, thin_direct, thin_via_gf

__all__ = [
    "ApproxReport",
    "AttenuationCoefficient",
    "McConfig",
    "McResult",
    "MomentSummary",
    "Pmf",
    "build_report",
    "eta_for_target_lambda",
    "gf_derivative",
    "make_pmf",
    "moments",
    "poisson_family",
    "predicted_delta",
    "risk_approx",
    "risk_exact",
    "simulate_thinned",
    "thin_direct",
    "thin_via_gf",
    "thinned_reference",
    "tv_distance",
    "AllVacuumError",
    "DegenerateLambdaError",
    "DistributionError",
    "DuplicateIndexError",
    "InvalidParameterError",
    "NegativeMassError",
    "NotNormalizedError",
    "PhotonThinError",
    "TargetExceedsMeanError",
    "TermOverflowError",
    "ZeroMeanError",
]

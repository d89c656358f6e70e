"""Poisson approximation quality of a thinned distribution.

After strong attenuation the thinned distribution is close to
Poisson(lambda) with lambda = eta * E(X). This module quantifies how
close: per-outcome deviations, the quadratic leading error lambda^2 * c
predicted from the input's moments alone, rigorous cubic remainder
recovery, and the multi-photon risk numbers used in security analysis of
faint pulsed sources.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import AllVacuumError, DegenerateLambdaError, InvalidParameterError
from .pmf import Pmf, moments, poisson_family
from .thinning import AttenuationCoefficient, _as_eta, thin_direct

_REFERENCE_TAIL_EPS = 1e-14
DEFAULT_N_REPORT = 10


@dataclass(frozen=True)
class ApproxReport:
    """Everything one run of the approximation analysis produces.

    delta[n] is the thinned mass minus the reference Poisson mass at n.
    predicted holds the quadratic leading errors (l2c, -2*l2c, l2c) for
    n = 0, 1, 2 where l2c = lambda^2 * c. bound = (d + 1) * lambda^3 is
    the envelope within which delta may deviate from predicted.
    residuals are the recovered cubic remainder coefficients, each of
    which must land in [0, d] up to numeric noise. risk_approx is
    deliberately not clamped to [0, 1]: values above one are the
    security red flag for overdispersed inputs.
    """

    lam: float
    delta: tuple[float, ...]
    predicted: tuple[float, float, float]
    bound: float
    residuals: tuple[float, float, float]
    tail3: float
    risk_exact: float
    risk_approx: float


def thinned_reference(
    p: Pmf, eta: float | AttenuationCoefficient
) -> tuple[Pmf, Pmf, float]:
    """Thinned distribution, its reference Poisson, and lambda.

    Shared by the report builder and the CSV emitter so both see
    bit-identical numbers.
    """
    eta = _as_eta(eta)
    mean = p.mean
    lam = eta * mean
    if lam <= 0.0:
        raise DegenerateLambdaError(
            f"post-attenuation mean is {lam!r}; need eta > 0 and mean > 0"
        )
    q = thin_direct(p, eta)
    ref = poisson_family(lam, _REFERENCE_TAIL_EPS)
    return q, ref, lam


def build_report(
    p: Pmf, eta: float | AttenuationCoefficient, n_report: int = DEFAULT_N_REPORT
) -> ApproxReport:
    """Full approximation analysis of thinning ``p`` by ``eta``.

    Raises:
        ZeroMeanError: if the input mean is zero.
        DegenerateLambdaError: if eta * mean is zero.
    """
    if n_report < 0:
        raise InvalidParameterError(f"n_report must be >= 0, got {n_report!r}")
    ms = moments(p)
    q, ref, lam = thinned_reference(p, eta)

    delta = tuple(q.mass(n) - ref.mass(n) for n in range(n_report + 1))
    predicted = predicted_delta(ms.c, lam)
    bound = (ms.d + 1.0) * lam**3

    lam3 = lam**3
    quad = lam * lam / 2.0 + ms.c * lam * lam
    q0, q1, q2 = q.mass(0), q.mass(1), q.mass(2)
    d0 = (1.0 - lam + quad - q0) / lam3
    d1 = (q1 - lam + lam * lam + 2.0 * ms.c * lam * lam) / lam3
    d2 = (quad - q2) / lam3
    tail3 = 1.0 - q0 - q1 - q2

    return ApproxReport(
        lam=lam,
        delta=delta,
        predicted=predicted,
        bound=bound,
        residuals=(d0, d1, d2),
        tail3=tail3,
        risk_exact=risk_exact(q),
        risk_approx=risk_approx(ms.c, lam),
    )


def predicted_delta(c: float, lam: float) -> tuple[float, float, float]:
    """Leading quadratic deviations at n = 0, 1, 2: (l2c, -2*l2c, l2c)."""
    if lam <= 0.0:
        raise InvalidParameterError(f"lambda must be positive, got {lam!r}")
    l2c = lam * lam * c
    return (l2c, -2.0 * l2c, l2c)


def risk_exact(q: Pmf) -> float:
    """P(n > 1 | n > 0): chance a non-empty pulse carries several photons.

    Raises:
        AllVacuumError: if all mass sits at zero photons.
    """
    q0 = q.mass(0)
    survived = 1.0 - q0
    if survived <= 1e-15:
        raise AllVacuumError("all mass at zero photons; conditional risk undefined")
    return (survived - q.mass(1)) / survived


def risk_approx(c: float, lam: float) -> float:
    """First-order risk estimate (1/2 + c) * lambda.

    Not clamped: a value above one signals the approximation's breakdown
    regime and must stay visible.
    """
    if lam <= 0.0:
        raise InvalidParameterError(f"lambda must be positive, got {lam!r}")
    return (0.5 + c) * lam

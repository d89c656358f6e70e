"""Finite-support photon-count distributions and their moment machinery.

The central type is :class:`Pmf`, a sparse, immutable probability mass
function over nonnegative integers. Distributions truncated from an
infinite-support family carry the discarded mass in ``tail_defect``
instead of being renormalized, so downstream tolerance budgets can track
it explicitly.

All sums that feed invariants (normalization, moments) are accumulated
with full-precision summation (``math.fsum``) in ascending index order;
anything involving factorials or binomial coefficients goes through
log-gamma to avoid overflow at support points in the thousands.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import gammaln

from .errors import (
    DuplicateIndexError,
    InvalidParameterError,
    NegativeMassError,
    NotNormalizedError,
    ZeroMeanError,
)

# Ingestion tolerance: user data is lossy decimal. Internal ops target 1e-12.
NORMALIZATION_TOL = 1e-9
DEFAULT_TAIL_EPS = 1e-12
_MAX_TAIL_EPS = 1e-6

# Largest exponent math.exp accepts; beyond it results degrade to inf.
_MAX_LOG = math.log(sys.float_info.max)


class CompensatedSum:
    """Running Neumaier-compensated sum.

    Tracks the low-order bits lost by naive ``+=`` so that long
    accumulations of same-sign terms stay accurate to the last ulp.
    """

    __slots__ = ("_sum", "_carry")

    def __init__(self) -> None:
        self._sum = 0.0
        self._carry = 0.0

    def add(self, value: float) -> None:
        t = self._sum + value
        if abs(self._sum) >= abs(value):
            self._carry += (self._sum - t) + value
        else:
            self._carry += (value - t) + self._sum
        self._sum = t

    @property
    def value(self) -> float:
        return self._sum + self._carry


@dataclass(frozen=True)
class AttenuationCoefficient:
    """Per-photon survival probability of the attenuator, in [0, 1]."""

    eta: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.eta <= 1.0):
            raise InvalidParameterError(
                f"attenuation coefficient must lie in [0, 1], got {self.eta!r}"
            )


@dataclass(frozen=True)
class Pmf:
    """Probability mass function over nonnegative integer photon counts.

    ``entries`` holds (index, mass) pairs with strictly increasing
    indices; ``tail_defect`` is the mass discarded by truncating an
    infinite-support family (0 for explicit tables). The masses plus the
    defect must sum to one within ``NORMALIZATION_TOL``.

    Instances are immutable and safe to share across threads.
    """

    entries: tuple[tuple[int, float], ...]
    tail_defect: float = 0.0

    def __post_init__(self) -> None:
        prev = -1
        for n, mass in self.entries:
            if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
                raise InvalidParameterError(f"outcome index {n!r} is not an integer")
            if n < 0:
                raise InvalidParameterError(f"outcome index {n} is negative")
            if mass < 0.0 or not math.isfinite(mass):
                raise NegativeMassError(
                    f"mass {mass!r} at index {n} must be finite and nonnegative"
                )
            if n == prev:
                raise DuplicateIndexError(f"outcome index {n} appears twice")
            if n < prev:
                raise InvalidParameterError("entries must be in ascending index order")
            prev = n
        if self.tail_defect < 0.0 or not math.isfinite(self.tail_defect):
            raise InvalidParameterError(f"tail defect {self.tail_defect!r} must be >= 0")
        total = math.fsum(m for _, m in self.entries) + self.tail_defect
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise NotNormalizedError(
                f"masses plus tail defect sum to {total!r}, expected 1 within "
                f"{NORMALIZATION_TOL}"
            )

    @cached_property
    def _lookup(self) -> dict[int, float]:
        return dict(self.entries)

    @cached_property
    def support(self) -> tuple[int, ...]:
        return tuple(n for n, _ in self.entries)

    @cached_property
    def masses(self) -> tuple[float, ...]:
        return tuple(m for _, m in self.entries)

    @property
    def max_index(self) -> int:
        return self.entries[-1][0] if self.entries else 0

    def mass(self, n: int) -> float:
        """Mass at outcome ``n``; absent indices carry zero mass."""
        return self._lookup.get(n, 0.0)

    @cached_property
    def total_mass(self) -> float:
        return math.fsum(self.masses)

    @cached_property
    def mean(self) -> float:
        return math.fsum(n * m for n, m in self.entries)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Support and mass vectors as read-only numpy arrays."""
        return self._arrays

    @cached_property
    def _arrays(self) -> tuple[np.ndarray, np.ndarray]:
        sup = np.asarray(self.support, dtype=np.int64)
        mas = np.asarray(self.masses, dtype=np.float64)
        sup.setflags(write=False)
        mas.setflags(write=False)
        return sup, mas


@dataclass(frozen=True)
class MomentSummary:
    """First three (factorial) moments and the derived error coefficients.

    ``c`` is (Var - E) / (2 E^2): it governs the leading quadratic error
    of the Poisson approximation after strong attenuation. ``d`` is the
    third factorial moment over E^3 and bounds the cubic remainders.
    """

    mean: float
    variance: float
    m3: float
    c: float
    d: float


def make_pmf(pairs: list[tuple[int, float]] | tuple[tuple[int, float], ...]) -> Pmf:
    """Validate and normalize a table of (index, mass) pairs into a Pmf.

    Input order is irrelevant; entries are sorted by index. Raises
    :class:`NegativeMassError`, :class:`DuplicateIndexError` or
    :class:`NotNormalizedError` on bad data.
    """
    cleaned: list[tuple[int, float]] = []
    for n, mass in pairs:
        if isinstance(n, float):
            if not n.is_integer():
                raise InvalidParameterError(f"outcome index {n!r} is not an integer")
            n = int(n)
        cleaned.append((int(n), float(mass)))
    cleaned.sort(key=lambda pair: pair[0])
    return Pmf(tuple(cleaned), tail_defect=0.0)


def poisson_family(mu: float, tail_eps: float = DEFAULT_TAIL_EPS) -> Pmf:
    """Truncated Poisson(mu) table with the cut mass recorded, not hidden.

    The truncation index is the smallest n_max whose upper-tail mass is
    at most ``tail_eps``; the retained masses are NOT renormalized, and
    ``tail_defect`` records exactly what was cut.

    Args:
        mu: Poisson mean, must be positive and finite.
        tail_eps: largest acceptable discarded tail mass, in (0, 1e-6].

    Raises:
        InvalidParameterError: if ``mu`` or ``tail_eps`` is out of range.
    """
    if not (math.isfinite(mu) and mu > 0.0):
        raise InvalidParameterError(f"poisson mean must be positive, got {mu!r}")
    if not (0.0 < tail_eps <= _MAX_TAIL_EPS):
        raise InvalidParameterError(
            f"tail_eps must lie in (0, {_MAX_TAIL_EPS}], got {tail_eps!r}"
        )
    log_mu = math.log(mu)
    hard_cap = int(mu + 20.0 * math.sqrt(mu + 1.0) + 400.0)
    acc = CompensatedSum()
    masses: list[float] = []
    for n in range(hard_cap + 1):
        mass = math.exp(-mu + n * log_mu - math.lgamma(n + 1))
        masses.append(mass)
        acc.add(mass)
        if 1.0 - acc.value <= tail_eps:
            break
    else:
        raise InvalidParameterError(
            f"could not reach tail mass {tail_eps} within {hard_cap} terms"
        )
    entries = tuple((n, m) for n, m in enumerate(masses))
    tail = max(0.0, 1.0 - math.fsum(masses))
    return Pmf(entries, tail_defect=tail)


def moments(p: Pmf) -> MomentSummary:
    """Mean, variance, third factorial moment and the derived c, d.

    Summation runs in ascending index order with full-precision
    accumulation; support up to 1e4 with n^3-sized terms would lose
    digits under naive addition.

    Raises:
        ZeroMeanError: if the mean is zero (c and d are undefined).
    """
    mean = math.fsum(n * m for n, m in p.entries)
    if mean <= 0.0:
        raise ZeroMeanError("distribution has zero mean; c and d are undefined")
    ex2 = math.fsum((n * n) * m for n, m in p.entries)
    variance = ex2 - mean * mean
    m3 = math.fsum((n * (n - 1) * (n - 2)) * m for n, m in p.entries)
    c = (variance - mean) / (2.0 * mean * mean)
    d = m3 / mean**3
    return MomentSummary(mean=mean, variance=variance, m3=m3, c=c, d=d)


def gf_derivative(p: Pmf, order: int, z: float) -> float:
    """Order-th derivative of the probability generating function at z.

    Computes sum over N >= order of N!/(N-order)! * p(N) * z^(N-order).
    Every term is evaluated in log space (falling factorial via
    log-gamma differences) and the terms, all nonnegative, are combined
    by max-shifted exponential summation.
    """
    if not isinstance(order, (int, np.integer)) or order < 0:
        raise InvalidParameterError(f"derivative order must be a nonnegative int, got {order!r}")
    if not (0.0 <= z <= 1.0):
        raise InvalidParameterError(f"evaluation point must lie in [0, 1], got {z!r}")
    if z == 0.0:
        # Only N == order survives: order! * p(order).
        mass = p.mass(order)
        if mass == 0.0:
            return 0.0
        return _exp_or_inf(float(gammaln(order + 1.0)) + math.log(mass))
    sup, mas = p.arrays()
    keep = sup >= order
    if not np.any(keep):
        return 0.0
    sup = sup[keep]
    mas = mas[keep]
    with np.errstate(divide="ignore"):
        log_terms = (
            gammaln(sup + 1.0)
            - gammaln(sup - order + 1.0)
            + (sup - order) * math.log(z)
            + np.log(mas)
        )
    return _sum_exp(log_terms)


def _sum_exp(log_terms: np.ndarray) -> float:
    """Sum of exp(log_terms) via max shift plus full-precision addition."""
    shift = float(np.max(log_terms))
    if shift == -np.inf:
        return 0.0
    total = math.fsum(np.exp(log_terms - shift))
    if shift + math.log(total) > _MAX_LOG:
        return math.inf
    return math.exp(shift) * total


def _exp_or_inf(log_value: float) -> float:
    """exp that degrades to inf instead of raising past the float range."""
    if log_value > _MAX_LOG:
        return math.inf
    return math.exp(log_value)


def tv_distance(p: Pmf, q: Pmf) -> float:
    """Total variation distance between two tables, defect-inclusive.

    Half the L1 distance over the union of supports, plus half of each
    tail defect as worst-case slack for the truncated mass.
    """
    union = sorted(set(p.support) | set(q.support))
    diff = math.fsum(abs(p.mass(n) - q.mass(n)) for n in union)
    return 0.5 * diff + 0.5 * (p.tail_defect + q.tail_defect)

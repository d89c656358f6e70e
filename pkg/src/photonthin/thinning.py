"""Binomial decay of a photon-count distribution, by two equivalent routes.

``thin_direct`` is the reference implementation: it sums the binomial
decay kernel over the input support. ``thin_via_gf`` reaches the same
distribution through derivatives of the generating function evaluated at
1 - eta; keeping both routes alive turns silent numeric corruption in
either one into a testable disagreement.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

from .errors import InvalidParameterError, TargetExceedsMeanError, TermOverflowError
from .pmf import AttenuationCoefficient, CompensatedSum, Pmf

# Output truncation: stop once the cumulative mass is within this of
# everything the input had to give; below double-precision resolution of
# the normalization invariant.
_TRUNCATION_SLACK = 1e-15

# Largest exponent math.exp accepts without overflow.
_MAX_LOG = math.log(np.finfo(np.float64).max)

# Cap on log-term matrix entries per chunk, to bound peak memory.
_CHUNK_CELLS = 4_000_000


def _as_eta(eta: float | AttenuationCoefficient) -> float:
    if isinstance(eta, AttenuationCoefficient):
        return eta.eta
    return AttenuationCoefficient(float(eta)).eta


def thin_direct(p: Pmf, eta: float | AttenuationCoefficient) -> Pmf:
    """Distribution of survivors when each photon independently keeps
    probability eta of passing the attenuator.

    Output mass at n is sum over N >= n of binom(N, n) eta^n (1-eta)^(N-n)
    times the input mass at N, each term formed in log space. The output
    is truncated once cumulative mass reaches 1 - tail_defect - 1e-15;
    whatever is cut joins the inherited tail defect.

    eta = 0 and eta = 1 short-circuit exactly, with no log round trip.
    """
    eta = _as_eta(eta)
    if eta == 0.0:
        return Pmf(((0, p.total_mass),), tail_defect=p.tail_defect)
    if eta == 1.0:
        return p
    if not p.entries:
        return p

    sup, mas = p.arrays()
    with np.errstate(divide="ignore"):
        log_mass = np.log(mas)
    lg_sup = gammaln(sup + 1.0)
    log_eta = math.log(eta)
    log_keep = math.log1p(-eta)
    max_n = int(sup[-1])
    target = 1.0 - p.tail_defect - _TRUNCATION_SLACK

    entries: list[tuple[int, float]] = []
    acc = CompensatedSum()
    done = False
    row_chunk = max(1, _CHUNK_CELLS // len(sup))
    for lo in range(0, max_n + 1, row_chunk):
        hi = min(max_n + 1, lo + row_chunk)
        n_col = np.arange(lo, hi, dtype=np.int64)[:, None]
        lag = sup[None, :] - n_col
        valid = lag >= 0
        lag_f = np.where(valid, lag, 0).astype(np.float64)
        log_terms = (
            lg_sup[None, :]
            - gammaln(n_col + 1.0)
            - gammaln(lag_f + 1.0)
            + n_col * log_eta
            + lag_f * log_keep
            + log_mass[None, :]
        )
        terms = np.exp(np.where(valid, log_terms, -np.inf))
        for i in range(hi - lo):
            q_n = math.fsum(terms[i])
            if q_n > 0.0:
                entries.append((lo + i, q_n))
            acc.add(q_n)
            if acc.value >= target:
                done = True
                break
        if done:
            break

    tail = max(0.0, 1.0 - math.fsum(m for _, m in entries))
    return Pmf(tuple(entries), tail_defect=tail)


def thin_via_gf(p: Pmf, eta: float | AttenuationCoefficient, n_max: int) -> Pmf:
    """Same transformation through generating-function derivatives.

    Output mass at n is (eta^n / n!) times the n-th derivative of the
    generating function at 1 - eta, for n = 0..n_max, evaluated fully in
    log space. The defect is whatever the n_max cutoff leaves uncovered.

    Raises:
        TermOverflowError: if a combined log magnitude leaves the
            representable range (n_max too large for this eta).
    """
    if not isinstance(n_max, (int, np.integer)) or n_max < 0:
        raise InvalidParameterError(f"n_max must be a nonnegative int, got {n_max!r}")
    eta = _as_eta(eta)
    if eta == 0.0:
        return Pmf(((0, p.total_mass),), tail_defect=p.tail_defect)
    if eta == 1.0:
        kept = tuple((n, m) for n, m in p.entries if n <= n_max)
        tail = max(0.0, 1.0 - math.fsum(m for _, m in kept))
        return Pmf(kept, tail_defect=tail)
    if not p.entries:
        return p

    sup, mas = p.arrays()
    with np.errstate(divide="ignore"):
        log_mass = np.log(mas)
    lg_sup = gammaln(sup + 1.0)
    log_eta = math.log(eta)
    log_z = math.log1p(-eta)

    top = min(n_max, int(sup[-1]))
    entries: list[tuple[int, float]] = []
    for n in range(top + 1):
        keep = sup >= n
        lag = (sup[keep] - n).astype(np.float64)
        log_terms = lg_sup[keep] - gammaln(lag + 1.0) + lag * log_z + log_mass[keep]
        shift = float(np.max(log_terms))
        if shift == -np.inf:
            continue
        inner = math.fsum(np.exp(log_terms - shift))
        log_q = n * log_eta - math.lgamma(n + 1) + shift + math.log(inner)
        if log_q > _MAX_LOG:
            raise TermOverflowError(
                f"log-space term {log_q:.1f} at n={n} exceeds float range; "
                f"n_max={n_max} is too large for eta={eta}"
            )
        q_n = math.exp(log_q)
        if q_n > 0.0:
            entries.append((n, q_n))

    tail = max(0.0, 1.0 - math.fsum(m for _, m in entries))
    return Pmf(tuple(entries), tail_defect=tail)


def eta_for_target_lambda(p: Pmf, target_lambda: float) -> AttenuationCoefficient:
    """Attenuation coefficient that lands the thinned mean on target.

    Expectation scales exactly linearly under thinning, so this is a
    plain division, no search.

    Raises:
        InvalidParameterError: if the target is not positive and finite.
        TargetExceedsMeanError: if the target exceeds mean(p).
    """
    if not (math.isfinite(target_lambda) and target_lambda > 0.0):
        raise InvalidParameterError(
            f"target mean must be positive and finite, got {target_lambda!r}"
        )
    mean = p.mean
    if target_lambda > mean:
        raise TargetExceedsMeanError(
            f"target mean {target_lambda} exceeds input mean {mean}"
        )
    return AttenuationCoefficient(target_lambda / mean)

"""Source transmit-power block: per-slot closed form plus a multiplier search.

For fixed jamming power and trajectory the source block maximizes

    sum_n log2(1 + a_n p_n) - log2(1 + b_n p_n)

subject to ``0 <= p_n <= pmax`` and ``sum_n p_n <= N * pbar``. ``mu`` is the
multiplier of the summed constraint, so at an interior optimum the slot
derivative ``(a/(1+a p) - b/(1+b p)) / ln 2`` equals ``mu``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scenario import Scenario, derive

__all__ = [
    "SourceCoeffs",
    "source_coeffs",
    "per_slot_power",
    "optimize_source_power",
    "source_objective",
    "SourceSolution",
]

_LN2 = math.log(2.0)
_TIE_RTOL = 1e-12


@dataclass(frozen=True)
class SourceCoeffs:
    a: np.ndarray
    b: np.ndarray


def source_coeffs(q: np.ndarray, p_u, s: Scenario) -> SourceCoeffs:
    """Coefficients of the source block for an ``(N+1, 2)`` trajectory."""
    d = derive(s)
    qn = np.asarray(q, dtype=float)[1:]
    p_u = np.asarray(p_u, dtype=float)
    g = s.altitude ** 2 + np.sum(qn * qn, axis=1)
    diff = qn - s.w_e
    m = s.altitude ** 2 + np.sum(diff * diff, axis=1)
    a = d.gamma0 / (g * (p_u * d.beta0 + 1.0))
    b = d.gamma0 * np.hypot(*s.eve_pos) ** (-s.kappa) / (d.gamma0 * p_u / m + 1.0)
    return SourceCoeffs(a, b)


def source_objective(p, a, b) -> float:
    p = np.asarray(p, dtype=float)
    return float(np.sum(np.log2(1.0 + a * p) - np.log2(1.0 + b * p)))


def _useful(a, b):
    return a > b * (1.0 + _TIE_RTOL)


def per_slot_power(a, b, mu, pmax):
    """Optimal slot power for multiplier ``mu`` (``mu == 0`` gives the peak).

    Vectorized over ``a``/``b``. Slots with ``a <= b`` get zero power.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    useful = _useful(a, b)
    if mu <= 0.0:
        return np.where(useful, float(pmax), 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_a = 1.0 / a
        inv_b = 1.0 / b
        eta = (np.sqrt((0.5 * inv_b - 0.5 * inv_a) ** 2 + (inv_b - inv_a) / (mu * _LN2))
               - 0.5 * inv_a - 0.5 * inv_b)
    p = np.minimum(np.maximum(eta, 0.0), pmax)
    return np.where(useful, p, 0.0)


@dataclass(frozen=True)
class SourceSolution:
    p: np.ndarray
    mu: float
    iterations: int


def optimize_source_power(c: SourceCoeffs, pbar: float, pmax: float,
                          max_iter: int = 400) -> SourceSolution:
    """Solve the source block; the returned ``mu`` is the summed-constraint multiplier."""
    a, b = c.a, c.b
    budget = a.size * pbar
    p0 = per_slot_power(a, b, 0.0, pmax)
    if p0.sum() <= budget:
        return SourceSolution(p0, 0.0, 0)

    lo, hi = 0.0, 1.0
    it = 0
    while per_slot_power(a, b, hi, pmax).sum() > budget:
        lo, hi = hi, 2.0 * hi
        it += 1
    p_hi = per_slot_power(a, b, hi, pmax)
    while it < max_iter:
        it += 1
        if hi - lo < 1e-12 * hi or budget - p_hi.sum() <= 1e-8 * budget:
            break
        mid = 0.5 * (lo + hi)
        p_mid = per_slot_power(a, b, mid, pmax)
        if p_mid.sum() > budget:
            lo = mid
        else:
            hi, p_hi = mid, p_mid
    return SourceSolution(p_hi, hi, it)

"""UAV jamming-power block solved by successive convex approximation.

Each slot's secrecy rate is a difference of concave functions of the
jamming power. The two subtracted concave logs are replaced by their
tangents at the current iterate, which gives a separable concave
surrogate that lower-bounds the true objective and touches it at the
expansion point. The surrogate is maximized by bisection on the
multiplier of the average-power constraint, with a closed-form root per
slot. Each SCA step is followed by a doubling search along the step
direction on the true objective, which only accepts improvements and
speeds up the otherwise linear convergence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .scenario import Scenario, derive

__all__ = [
    "JamCoeffs",
    "jam_coeffs",
    "true_objective",
    "surrogate_objective",
    "surrogate_slope",
    "solve_surrogate",
    "optimize_jamming_power",
    "JammingSolution",
]

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class JamCoeffs:
    c: np.ndarray
    d: np.ndarray
    e: np.ndarray
    beta0: float

    @property
    def active(self) -> np.ndarray:
        """Slots where jamming can change the secrecy rate at all."""
        return (self.c > 0.0) | (self.d > 0.0)


def jam_coeffs(q: np.ndarray, p_s, s: Scenario) -> JamCoeffs:
    d = derive(s)
    qn = np.asarray(q, dtype=float)[1:]
    p_s = np.asarray(p_s, dtype=float)
    g = s.altitude ** 2 + np.sum(qn * qn, axis=1)
    diff = qn - s.w_e
    m = s.altitude ** 2 + np.sum(diff * diff, axis=1)
    return JamCoeffs(
        c=p_s * d.gamma0 / g,
        d=p_s * d.gamma0 * np.hypot(*s.eve_pos) ** (-s.kappa),
        e=d.gamma0 / m,
        beta0=d.beta0,
    )


def _slot_true(p, jc: JamCoeffs):
    b0 = jc.beta0
    return (np.log2(b0 * p + 1.0 + jc.c) - np.log2(b0 * p + 1.0)
            - np.log2(jc.e * p + 1.0 + jc.d) + np.log2(jc.e * p + 1.0))


def true_objective(p_u, jc: JamCoeffs) -> float:
    """Sum of per-slot secrecy rates (bps/Hz) as a function of jamming power."""
    return float(np.sum(_slot_true(np.asarray(p_u, dtype=float), jc)))


def _tangent_slopes(p_k, jc: JamCoeffs):
    a_slope = jc.beta0 / (_LN2 * (jc.beta0 * p_k + 1.0))
    b_slope = jc.e / (_LN2 * (jc.e * p_k + 1.0 + jc.d))
    return a_slope, b_slope


def _slot_surrogate(p, p_k, jc: JamCoeffs):
    b0 = jc.beta0
    a_slope, b_slope = _tangent_slopes(p_k, jc)
    return (np.log2(b0 * p + 1.0 + jc.c) + np.log2(jc.e * p + 1.0)
            - np.log2(b0 * p_k + 1.0) - np.log2(jc.e * p_k + 1.0 + jc.d)
            - (a_slope + b_slope) * (p - p_k))


def surrogate_objective(p_u, p_k, jc: JamCoeffs) -> float:
    """Concave minorant of :func:`true_objective`, tight at ``p_k``."""
    p_u = np.asarray(p_u, dtype=float)
    p_k = np.asarray(p_k, dtype=float)
    return float(np.sum(_slot_surrogate(p_u, p_k, jc)))


def surrogate_slope(p, p_k, jc: JamCoeffs):
    """Per-slot derivative of the surrogate at ``p`` (strictly decreasing in ``p``)."""
    a_slope, b_slope = _tangent_slopes(p_k, jc)
    return ((jc.beta0 / (jc.beta0 * p + 1.0 + jc.c) + jc.e / (jc.e * p + 1.0)) / _LN2
            - a_slope - b_slope)


def _slot_argmax(lam, p_k, jc: JamCoeffs, pmax, base_slope, top_slope, k_const):
    """Per-slot maximizer of surrogate - lam * p over [0, pmax]."""
    b0, c, e = jc.beta0, jc.c, jc.e
    k = _LN2 * lam + k_const
    aq = k * b0 * e
    bq = k * (b0 + e * (1.0 + c)) - 2.0 * b0 * e
    cq = k * (1.0 + c) - b0 - e * (1.0 + c)
    disc = np.sqrt(np.maximum(bq * bq - 4.0 * aq * cq, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        root_pos_b = -2.0 * cq / (bq + disc)
        root_neg_b = (disc - bq) / (2.0 * aq)
    root = np.where(bq >= 0.0, root_pos_b, root_neg_b)
    root = np.clip(np.nan_to_num(root, nan=0.0, posinf=pmax, neginf=0.0), 0.0, pmax)
    p = np.where(base_slope <= lam, 0.0, np.where(top_slope >= lam, pmax, root))
    return p


def solve_surrogate(p_k, jc: JamCoeffs, pbar: float, pmax: float,
                    max_iter: int = 300):
    """Maximize the surrogate over ``0 <= p <= pmax``, ``sum p <= N * pbar``.

    Returns ``(p, lam)`` with ``lam`` the multiplier of the summed
    constraint. Slots that jamming cannot influence are fixed at zero.
    """
    p_k = np.asarray(p_k, dtype=float)
    n = p_k.size
    budget = n * pbar
    out = np.zeros(n)
    act = jc.active
    if not np.any(act):
        return out, 0.0
    sub = JamCoeffs(jc.c[act], jc.d[act], jc.e[act], jc.beta0)
    pk = p_k[act]
    a_slope, b_slope = _tangent_slopes(pk, sub)
    k_const = _LN2 * (a_slope + b_slope)
    base = surrogate_slope(0.0, pk, sub)
    top = surrogate_slope(pmax, pk, sub)

    def argmax(lam):
        return _slot_argmax(lam, pk, sub, pmax, base, top, k_const)

    p = argmax(0.0)
    lam = 0.0
    if p.sum() > budget:
        lo, hi = 0.0, 1.0
        p_hi = argmax(hi)
        while p_hi.sum() > budget:
            lo, hi = hi, 2.0 * hi
            p_hi = argmax(hi)
        for _ in range(max_iter):
            if hi - lo <= 1e-13 * hi or budget - p_hi.sum() <= 1e-10 * budget:
                break
            mid = 0.5 * (lo + hi)
            p_mid = argmax(mid)
            if p_mid.sum() > budget:
                lo = mid
            else:
                hi, p_hi = mid, p_mid
        p, lam = p_hi, hi
    out[act] = p
    return out, lam


@dataclass
class JammingSolution:
    p: np.ndarray
    objective: float
    iterations: int
    status: str
    history: list = field(default_factory=list)


def _max_step(p, direction, pbar, pmax) -> float:
    """Largest ``t`` keeping ``p + t * direction`` inside the box and the budget."""
    t = math.inf
    up, down = direction > 0, direction < 0
    if np.any(up):
        t = min(t, float(np.min((pmax - p[up]) / direction[up])))
    if np.any(down):
        t = min(t, float(np.min(-p[down] / direction[down])))
    total = float(direction.sum())
    if total > 0:
        t = min(t, (p.size * pbar - float(p.sum())) / total)
    return max(t, 0.0)


def _extrapolate(p, cand, cand_obj, jc, pbar, pmax):
    """Push past the surrogate maximizer while the true objective keeps rising."""
    direction = cand - p
    t_max = _max_step(p, direction, pbar, pmax)
    best, best_obj = cand, cand_obj
    t = 2.0
    while True:
        t_eff = min(t, t_max)
        if t_eff <= 1.0:
            break
        trial = np.clip(p + t_eff * direction, 0.0, pmax)
        trial_obj = true_objective(trial, jc)
        if trial_obj <= best_obj:
            break
        best, best_obj = trial, trial_obj
        if t_eff == t_max:
            break
        t *= 2.0
    return best, best_obj


def _sca(jc: JamCoeffs, p, pbar, pmax, rtol, max_iter) -> JammingSolution:
    obj = true_objective(p, jc)
    history = [obj]
    status = "iteration-cap"
    it = 0
    while it < max_iter:
        it += 1
        cand, _ = solve_surrogate(p, jc, pbar, pmax)
        cand_obj = true_objective(cand, jc)
        if cand_obj > obj:
            cand, cand_obj = _extrapolate(p, cand, cand_obj, jc, pbar, pmax)
        if cand_obj < obj:
            # the surrogate guarantees ascent; a drop is round-off, keep the incumbent
            status = "converged"
            break
        gain = cand_obj - obj
        p, obj = cand, cand_obj
        history.append(obj)
        if gain <= rtol * max(abs(obj), 1e-12):
            status = "converged"
            break
    return JammingSolution(p, obj, it, status, history)


def optimize_jamming_power(jc: JamCoeffs, p_init, pbar: float, pmax: float,
                           rtol: float = 1e-6, max_iter: int = 100,
                           zero_start: bool = True) -> JammingSolution:
    """Run the SCA loop from ``p_init`` until the true objective stalls.

    With ``zero_start`` a second SCA run starts from no jamming and the
    better of the two is returned (ties go to the zero start). At high
    self-interference the per-slot objective has a local maximum on the
    budget boundary that a single run from ``p_init`` cannot leave.
    """
    p = np.clip(np.asarray(p_init, dtype=float), 0.0, pmax)
    if p.sum() > p.size * pbar:
        p *= p.size * pbar / p.sum()
    p = np.where(jc.active, p, 0.0)
    best = _sca(jc, p, pbar, pmax, rtol, max_iter)
    if zero_start and np.any(p > 0.0):
        alt = _sca(jc, np.zeros_like(p), pbar, pmax, rtol, max_iter)
        if alt.objective >= best.objective:
            best = alt
    return best

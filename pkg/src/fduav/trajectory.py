"""Trajectory block: slack reformulation, Taylor bounds and Dinkelbach.

For fixed powers the secrecy rate of slot ``n`` is written through the
slacks ``g >= H^2 + |q_n|^2`` and ``m >= H^2 + |q_n - w_E|^2``; the first
log is convex in ``g`` and the second concave in ``m``, so tangents at the
current trajectory give a numerator that is linear in ``(g, m)`` and a
global lower bound on the secrecy-rate sum. The induced-power term gets a
slack ``s`` with the constraint ``1/s^2 <= s^2 + |d_n|^2/(v0 dt)^2`` whose
right side is replaced by its tangent. The resulting linear-over-convex
ratio is maximized with Dinkelbach's method; each parametric problem is
concave and is handed to the barrier kernel after eliminating ``g`` and
``m`` (both bind at the optimum because the numerator decreases in them).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .metrics import reporting_ee
from .scenario import Scenario, derive

__all__ = [
    "S_MIN",
    "TrajConsts",
    "TrajVars",
    "TrajExpansion",
    "traj_consts",
    "straight_line",
    "is_forced_straight",
    "init_slacks",
    "expansion_at",
    "slack_rate_sum",
    "surrogate_numerator",
    "denominator",
    "speed_slack_bound",
    "parametric_objective",
    "inner_concave_solve",
    "dinkelbach_solve",
    "optimize_trajectory",
    "DinkelbachResult",
    "TrajectorySolution",
]

log = logging.getLogger(__name__)

_LN2 = math.log(2.0)
S_MIN = 1e-3
_DEGENERATE_RTOL = 1e-9


@dataclass(frozen=True)
class TrajConsts:
    """Power-dependent coefficients of the trajectory block."""

    f: np.ndarray          # gamma0 p_S / (beta0 p_U + 1)
    d: np.ndarray          # p_S gamma0 |w_E|^-kappa
    jam: np.ndarray        # gamma0 p_U
    h2: float
    w_e: np.ndarray
    q_start: np.ndarray
    q_end: np.ndarray
    n_slots: int
    slot_len: float
    omega: float
    p0: float
    pi: float
    kq: float              # 3 P0 / (U_tip dt)^2, multiplies |d_n|^2
    kc: float              # parasite coefficient / dt^3, multiplies |d_n|^3
    c: float               # 1 / (v0 dt)^2


def traj_consts(s: Scenario, p_s, p_u) -> TrajConsts:
    dc = derive(s)
    ep = s.energy
    p_s = np.asarray(p_s, dtype=float)
    p_u = np.asarray(p_u, dtype=float)
    dt = s.slot_len
    return TrajConsts(
        f=dc.gamma0 * p_s / (dc.beta0 * p_u + 1.0),
        d=p_s * dc.gamma0 * np.hypot(*s.eve_pos) ** (-s.kappa),
        jam=dc.gamma0 * p_u,
        h2=s.altitude ** 2,
        w_e=s.w_e,
        q_start=s.start,
        q_end=s.end,
        n_slots=s.n_slots,
        slot_len=dt,
        omega=dc.omega,
        p0=ep.p0_blade,
        pi=ep.pi_induced,
        kq=3.0 * ep.p0_blade / (ep.u_tip * dt) ** 2,
        kc=0.5 * ep.drag_ratio * ep.air_density * ep.solidity * ep.disc_area / dt ** 3,
        c=1.0 / (ep.v0_rotor * dt) ** 2,
    )


@dataclass(frozen=True)
class TrajVars:
    q: np.ndarray
    g: np.ndarray
    m: np.ndarray
    s: np.ndarray


@dataclass(frozen=True)
class TrajExpansion:
    q_k: np.ndarray
    g_k: np.ndarray
    m_k: np.ndarray
    s_k: np.ndarray

    @property
    def psi(self) -> np.ndarray:
        return np.diff(self.q_k, axis=0)


def straight_line(s: Scenario) -> np.ndarray:
    """Uniform-speed straight path from ``q0`` to ``qF``."""
    frac = np.linspace(0.0, 1.0, s.n_slots + 1)[:, None]
    return s.start + frac * (s.end - s.start)


def _straight(k: TrajConsts) -> np.ndarray:
    frac = np.linspace(0.0, 1.0, k.n_slots + 1)[:, None]
    return k.q_start + frac * (k.q_end - k.q_start)


def _forced(k: TrajConsts) -> bool:
    dist = float(np.linalg.norm(k.q_end - k.q_start))
    return dist >= k.n_slots * k.omega * (1.0 - _DEGENERATE_RTOL)


def is_forced_straight(s: Scenario) -> bool:
    """True when the endpoints are exactly ``v_max * T`` apart."""
    return _forced(traj_consts(s, np.zeros(s.n_slots), np.zeros(s.n_slots)))


def _check_feasible(q: np.ndarray, k: TrajConsts) -> None:
    if q.shape != (k.n_slots + 1, 2):
        raise ValueError(f"trajectory must have shape ({k.n_slots + 1}, 2), got {q.shape}")
    if not (np.allclose(q[0], k.q_start, atol=1e-9) and np.allclose(q[-1], k.q_end, atol=1e-9)):
        raise ValueError("trajectory endpoints differ from q0/qF")
    step2 = np.sum(np.diff(q, axis=0) ** 2, axis=1)
    if np.any(step2 > k.omega ** 2 + 1e-6):
        raise ValueError("trajectory violates the per-slot travel limit")


def init_slacks(q, k: TrajConsts) -> TrajVars:
    """Slacks activated with equality at ``q``."""
    q = np.asarray(q, dtype=float)
    _check_feasible(q, k)
    qn = q[1:]
    v = np.linalg.norm(np.diff(q, axis=0), axis=1) / k.slot_len
    x = v * v * k.c * k.slot_len ** 2 / 2.0  # v^2 / (2 v0^2)
    varphi = 1.0 / (np.sqrt(1.0 + x * x) + x)
    return TrajVars(
        q=q,
        g=k.h2 + np.sum(qn * qn, axis=1),
        m=k.h2 + np.sum((qn - k.w_e) ** 2, axis=1),
        s=np.maximum(np.sqrt(varphi), S_MIN),
    )


def expansion_at(q, k: TrajConsts) -> TrajExpansion:
    tv = init_slacks(q, k)
    return TrajExpansion(tv.q, tv.g, tv.m, tv.s)


def slack_rate_sum(g, m, k: TrajConsts) -> float:
    """Secrecy-rate sum written through the slacks (bps/Hz)."""
    return float(np.sum(np.log2(1.0 + k.f / g)
                        - np.log2(1.0 + k.d * m / (k.jam + m))))


def _numerator_coeffs(exp: TrajExpansion, k: TrajConsts):
    """Per-slot ``(const, alpha, C)``: surrogate = const - alpha (g - g_k) - C (m - m_k)."""
    gk, mk = exp.g_k, exp.m_k
    alpha = k.f / (_LN2 * (gk + k.f) * gk)
    cc = k.d * k.jam / (_LN2 * (k.jam + (k.d + 1.0) * mk) * (k.jam + mk))
    const = np.log2(1.0 + k.f / gk) - np.log2(1.0 + k.d * mk / (k.jam + mk))
    return const, alpha, cc


def surrogate_numerator(tv: TrajVars, exp: TrajExpansion, k: TrajConsts) -> float:
    const, alpha, cc = _numerator_coeffs(exp, k)
    return float(np.sum(const - alpha * (tv.g - exp.g_k) - cc * (tv.m - exp.m_k)))


def denominator(tv: TrajVars, k: TrajConsts) -> float:
    """Propulsion power sum (W) with the induced term replaced by the slack."""
    d2 = np.sum(np.diff(tv.q, axis=0) ** 2, axis=1)
    return float(np.sum(k.p0 + k.kq * d2 + k.pi * tv.s + k.kc * d2 * np.sqrt(d2)))


def speed_slack_bound(tv: TrajVars, exp: TrajExpansion, k: TrajConsts) -> np.ndarray:
    """Residual ``F^k[n] - 1/s[n]^2`` of the linearized speed-slack constraint."""
    psi = exp.psi
    delta = np.diff(tv.q, axis=0)
    f_k = (exp.s_k ** 2 + 2.0 * exp.s_k * (tv.s - exp.s_k)
           - k.c * np.sum(psi * psi, axis=1)
           + 2.0 * k.c * np.sum(psi * delta, axis=1))
    return f_k - 1.0 / tv.s ** 2


def parametric_objective(tv: TrajVars, lam: float, exp: TrajExpansion, k: TrajConsts) -> float:
    return surrogate_numerator(tv, exp, k) - lam * denominator(tv, k)


def _vars_at(q: np.ndarray, exp: TrajExpansion, k: TrajConsts) -> TrajVars:
    """Variables at ``q`` with every slack at its smallest feasible value."""
    qn = q[1:]
    s = kernels.speed_slack(np.diff(q, axis=0), exp.s_k, exp.psi, k.c)
    return TrajVars(q=q,
                    g=k.h2 + np.sum(qn * qn, axis=1),
                    m=k.h2 + np.sum((qn - k.w_e) ** 2, axis=1),
                    s=np.maximum(s, S_MIN))


def _interior_start(q: np.ndarray, k: TrajConsts) -> np.ndarray:
    ref = _straight(k)
    theta = 1e-3
    while True:
        x = (1.0 - theta) * q + theta * ref
        if np.all(np.sum(np.diff(x, axis=0) ** 2, axis=1) < k.omega ** 2) or theta >= 1.0:
            return x
        theta = min(1.0, 10.0 * theta)


@dataclass
class InnerInfo:
    newton_steps: int = 0
    status: int = 0


def inner_concave_solve(lam: float, exp: TrajExpansion, k: TrajConsts,
                        start=None, info: InnerInfo | None = None) -> TrajVars:
    """Maximize ``numerator - lam * denominator`` over the convex feasible set."""
    if _forced(k):
        return _vars_at(_straight(k), exp, k)
    lam = max(float(lam), 0.0)
    const, alpha, cc = _numerator_coeffs(exp, k)
    if lam == 0.0 and not (np.any(alpha) or np.any(cc)):
        return _vars_at(exp.q_k, exp, k)

    n = k.n_slots
    quad = np.zeros(n + 1)
    lin = np.zeros((n + 1, 2))
    quad[1:] = alpha + cc
    lin[1:] = 2.0 * cc[:, None] * k.w_e
    q_init = _interior_start(np.asarray(exp.q_k if start is None else start, dtype=float), k)

    tv0 = _vars_at(q_init, exp, k)
    scale = abs(surrogate_numerator(tv0, exp, k)) + lam * denominator(tv0, k) + 1e-300
    q_opt, steps, status = kernels.barrier_solve(
        q_init, quad, lin, lam * k.kq, lam * k.kc, lam * k.pi, k.c,
        exp.s_k, exp.psi, k.omega ** 2, n / scale, 1e-10 * scale)
    if info is not None:
        info.newton_steps += steps
        info.status = max(info.status, status)
    q_opt = np.array(q_opt, dtype=float)
    q_opt[0], q_opt[-1] = k.q_start, k.q_end
    return _vars_at(q_opt, exp, k)


@dataclass
class DinkelbachResult:
    vars: TrajVars
    lam: float
    iterations: int
    status: str
    lam_history: list = field(default_factory=list)
    newton_steps: int = 0


def dinkelbach_solve(exp: TrajExpansion, k: TrajConsts, rtol: float = 1e-6,
                     max_iter: int = 50) -> DinkelbachResult:
    """Maximize surrogate numerator / denominator around the expansion ``exp``."""
    tv_best = TrajVars(exp.q_k, exp.g_k, exp.m_k, exp.s_k)
    ratio_best = surrogate_numerator(tv_best, exp, k) / denominator(tv_best, k)
    lam = ratio_best
    lam_hist = [lam]
    info = InnerInfo()
    status = "iteration-cap"
    it = 0
    start = exp.q_k
    while it < max_iter:
        it += 1
        tv = inner_concave_solve(lam, exp, k, start=start, info=info)
        num, den = surrogate_numerator(tv, exp, k), denominator(tv, k)
        ratio = num / den
        if ratio > ratio_best:
            tv_best, ratio_best = tv, ratio
        if num - lam * den <= rtol * den:
            status = "converged"
            break
        lam = ratio
        lam_hist.append(lam)
        start = tv.q
    if info.status:
        status = "inner-cap"
    return DinkelbachResult(tv_best, ratio_best, it, status, lam_hist, info.newton_steps)


@dataclass
class TrajectorySolution:
    q: np.ndarray
    ee: float
    iterations: int
    status: str
    history: list = field(default_factory=list)
    fallback_used: bool = False


def optimize_trajectory(s: Scenario, p_s, p_u, q_init, rtol: float = 1e-5,
                        max_iter: int = 50) -> TrajectorySolution:
    """SCA loop over the trajectory for fixed powers.

    Each round re-expands the Taylor bounds at the incumbent and solves the
    fractional surrogate. A round that lowers the reported EE (possible only
    through per-slot clamping or round-off) is retried along the segment
    from the incumbent to the candidate with the step halved each time.
    """
    k = traj_consts(s, p_s, p_u)
    q = np.array(q_init, dtype=float)
    _check_feasible(q, k)
    if _forced(k):
        q = _straight(k)
        ee = reporting_ee(q, p_s, p_u, s)
        return TrajectorySolution(q, ee, 0, "converged", [ee])

    ee = reporting_ee(q, p_s, p_u, s)
    history = [ee]
    status = "iteration-cap"
    fallback = False
    it = 0
    while it < max_iter:
        it += 1
        res = dinkelbach_solve(expansion_at(q, k), k)
        cand = res.vars.q
        ee_c = reporting_ee(cand, p_s, p_u, s)
        if ee_c < ee:
            fallback = True
            log.info("trajectory step lowered EE (%.12g < %.12g); halving", ee_c, ee)
            step = 0.5
            for _ in range(30):
                trial = q + step * (cand - q)
                ee_t = reporting_ee(trial, p_s, p_u, s)
                if ee_t >= ee:
                    cand, ee_c = trial, ee_t
                    break
                step *= 0.5
            else:
                status = "fallback-used"
                break
        gain = ee_c - ee
        q, ee = cand, ee_c
        history.append(ee)
        if gain <= rtol * abs(ee):
            status = "converged"
            break
    if fallback and status == "converged":
        status = "fallback-used"
    return TrajectorySolution(q, ee, it, status, history, fallback)

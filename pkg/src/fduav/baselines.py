"""Benchmark schemes: no jamming, no power control, and best-effort trajectory."""

from __future__ import annotations

import enum
import logging
import math
from typing import Optional

import numpy as np

from .bcd import SolveResult, initial_point, run_bcd, solve_pt
from .scenario import Scenario

__all__ = [
    "SchemeId",
    "solve_njt",
    "solve_npt",
    "solve_pbet",
    "solve_scheme",
    "build_best_effort_trajectory",
]

log = logging.getLogger(__name__)


class SchemeId(str, enum.Enum):
    PT = "pt"
    NJT = "njt"
    NPT = "npt"
    PBET = "pbet"

    @classmethod
    def parse(cls, text: str) -> "SchemeId":
        key = text.strip().lower().replace("&", "").replace("/", "")
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown scheme {text!r}; choose from pt, njt, npt, pbet") from None


def solve_njt(s: Scenario, max_outer: int = 100, tol: Optional[float] = None) -> SolveResult:
    """Source power and trajectory with the jammer switched off."""
    q, p_s, _ = initial_point(s)
    return run_bcd(s, ("source", "trajectory"), q, p_s, np.zeros(s.n_slots), "njt",
                   max_outer, tol)


def solve_npt(s: Scenario, max_outer: int = 100, tol: Optional[float] = None) -> SolveResult:
    """Trajectory only, both powers held at their average limits."""
    q, p_s, p_u = initial_point(s)
    return run_bcd(s, ("trajectory",), q, p_s, p_u, "npt", max_outer, tol)


def solve_pbet(s: Scenario, max_outer: int = 100, tol: Optional[float] = None) -> SolveResult:
    """Both power blocks on the fixed best-effort trajectory."""
    _, p_s, p_u = initial_point(s)
    q = build_best_effort_trajectory(s)
    return run_bcd(s, ("source", "jamming"), q, p_s, p_u, "pbet", max_outer, tol)


def solve_scheme(s: Scenario, scheme, max_outer: int = 100,
                 tol: Optional[float] = None) -> SolveResult:
    scheme = SchemeId.parse(scheme) if isinstance(scheme, str) else scheme
    if scheme is SchemeId.PT:
        return solve_pt(s, max_outer=max_outer, tol=tol)
    if scheme is SchemeId.NJT:
        return solve_njt(s, max_outer, tol)
    if scheme is SchemeId.NPT:
        return solve_npt(s, max_outer, tol)
    return solve_pbet(s, max_outer, tol)


def _legs(start, end, n_steps, step):
    """Points ``start -> end`` moving ``step`` per slot, stopping at ``end``."""
    dist = float(np.linalg.norm(end - start))
    if dist == 0.0:
        return np.repeat(start[None, :], n_steps + 1, axis=0)
    u = (end - start) / dist
    travelled = np.minimum(np.arange(n_steps + 1) * step, dist)
    pts = start + travelled[:, None] * u
    pts[-1] = end
    return pts


def _closest_in_lens(c1, r1, c2, r2):
    """Point of minimum norm in the intersection of two discs (assumed nonempty)."""
    tol = 1e-9 * max(1.0, r1 + r2)
    d = float(np.linalg.norm(c2 - c1))
    if d >= r1 + r2 - tol:
        return c1 + (r1 / d) * (c2 - c1) if d > 0 else c1.copy()
    cands = []
    for ca, ra, cb, rb in ((c1, r1, c2, r2), (c2, r2, c1, r1)):
        na = float(np.linalg.norm(ca))
        p = ca * (1.0 - ra / na) if na > ra else np.zeros(2)
        if np.linalg.norm(p - cb) <= rb + tol:
            cands.append(p)
    if d > abs(r1 - r2):
        a = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d)
        h = math.sqrt(max(r1 * r1 - a * a, 0.0))
        u = (c2 - c1) / d
        mid = c1 + a * u
        perp = np.array([-u[1], u[0]])
        cands += [mid + h * perp, mid - h * perp]
    return min(cands, key=lambda p: float(np.linalg.norm(p)))


def build_best_effort_trajectory(s: Scenario) -> np.ndarray:
    """Fly at ``v_max`` to above the source, hover, then fly at ``v_max`` to ``qF``.

    Phase boundaries sit on slot boundaries: the slot that reaches the
    source covers only the remaining distance, and the return leg starts
    with the partial slot so the final slots are at full speed. If there is
    not enough time to reach the source, the turning point is the point
    closest to the source from which ``qF`` is still reachable on time.
    """
    n, om = s.n_slots, s.omega
    q0, qf = s.start, s.end
    origin = np.zeros(2)
    d1, d2 = float(np.linalg.norm(q0)), float(np.linalg.norm(qf))
    n1 = math.ceil(d1 / om - 1e-12)
    n2 = math.ceil(d2 / om - 1e-12)
    q = np.empty((n + 1, 2))
    if n1 + n2 <= n:
        q[: n1 + 1] = _legs(q0, origin, n1, om)
        q[n1: n - n2 + 1] = origin
        q[n - n2:] = _legs(qf, origin, n2, om)[::-1]
        return q

    log.info("best-effort trajectory: %d slots cannot reach the source and return (%d needed)",
             n, n1 + n2)
    best = None
    for k in range(1, n):
        r1, r2 = k * om, (n - k) * om
        if np.linalg.norm(qf - q0) > r1 + r2 + 1e-9 * (r1 + r2):
            continue
        p = _closest_in_lens(q0, r1, qf, r2)
        dist = float(np.linalg.norm(p))
        if best is None or dist < best[0] - 1e-12:
            best = (dist, k, p)
    if best is None:
        # single slot: nothing to choose
        return np.vstack([q0, qf])
    _, k, p = best
    frac1 = np.linspace(0.0, 1.0, k + 1)[:, None]
    frac2 = np.linspace(0.0, 1.0, n - k + 1)[:, None]
    q[: k + 1] = q0 + frac1 * (p - q0)
    q[k:] = p + frac2 * (qf - p)
    return q

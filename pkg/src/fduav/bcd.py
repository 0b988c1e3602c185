"""Block coordinate ascent over source power, jamming power and trajectory."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .jamming import jam_coeffs, optimize_jamming_power
from .metrics import SlotMetrics, evaluate, reporting_ee
from .scenario import Scenario
from .source_power import optimize_source_power, source_coeffs
from .trajectory import optimize_trajectory, straight_line

__all__ = ["BLOCKS", "SolveResult", "run_bcd", "solve_pt", "initial_point"]

log = logging.getLogger(__name__)

BLOCKS = ("source", "jamming", "trajectory")


@dataclass
class SolveResult:
    scheme: str
    trajectory: np.ndarray
    p_s: np.ndarray
    p_u: np.ndarray
    ee_bits_per_joule: float
    metrics: SlotMetrics
    history: list
    status: str
    outer_iters: int
    ee_initial: float
    block_log: list = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status in ("converged", "fallback-used")


def initial_point(s: Scenario):
    """Straight line at constant speed with both powers at their averages."""
    n = s.n_slots
    return straight_line(s), np.full(n, s.pbar_s), np.full(n, s.pbar_u)


def run_bcd(s: Scenario, blocks: Sequence[str], q, p_s, p_u, scheme: str = "custom",
            max_outer: int = 100, tol: Optional[float] = None) -> SolveResult:
    """Cycle through ``blocks`` until the EE gain of a full round drops below ``tol``.

    A block result is kept only if it does not lower the reported EE, so the
    history is nondecreasing by construction.
    """
    unknown = set(blocks) - set(BLOCKS)
    if unknown:
        raise ValueError(f"unknown blocks {sorted(unknown)}")
    tol = s.tol if tol is None else tol
    q = np.array(q, dtype=float)
    p_s = np.array(p_s, dtype=float)
    p_u = np.array(p_u, dtype=float)
    n = s.n_slots
    if p_s.shape != (n,) or p_u.shape != (n,):
        raise ValueError("power vectors must have one entry per slot")
    if (np.any(p_s < 0) or np.any(p_s > s.pmax_s * (1 + 1e-12))
            or p_s.sum() > n * s.pbar_s * (1 + 1e-9)):
        raise ValueError("initial source power violates its constraints")
    if (np.any(p_u < 0) or np.any(p_u > s.pmax_u * (1 + 1e-12))
            or p_u.sum() > n * s.pbar_u * (1 + 1e-9)):
        raise ValueError("initial jamming power violates its constraints")

    ee = reporting_ee(q, p_s, p_u, s)
    ee0 = ee
    history: list = []
    block_log: list = []
    fallback = False
    status = "iteration-cap"
    k = 0
    while k < max_outer:
        k += 1
        ee_prev = ee
        for block in blocks:
            if block == "source":
                cand = optimize_source_power(source_coeffs(q, p_u, s), s.pbar_s, s.pmax_s).p
                ee_c = reporting_ee(q, cand, p_u, s)
                info = "closed-form"
                if ee_c >= ee:
                    p_s, ee = cand, ee_c
            elif block == "jamming":
                sol = optimize_jamming_power(jam_coeffs(q, p_s, s), p_u, s.pbar_u, s.pmax_u)
                ee_c = reporting_ee(q, p_s, sol.p, s)
                info = f"{sol.status}/{sol.iterations}"
                if ee_c >= ee:
                    p_u, ee = sol.p, ee_c
            else:
                sol = optimize_trajectory(s, p_s, p_u, q)
                info = f"{sol.status}/{sol.iterations}"
                fallback |= sol.fallback_used
                if sol.ee >= ee:
                    q, ee = sol.q, sol.ee
            block_log.append((k, block, info, ee))
        history.append(ee)
        log.debug("round %d: EE %.9g", k, ee)
        gain = ee - ee_prev
        if (ee_prev > 0 and gain / ee_prev < tol) or (ee_prev <= 0 and gain <= 0):
            status = "converged"
            break
    if fallback and status == "converged":
        status = "fallback-used"
    return SolveResult(scheme, q, p_s, p_u, ee, evaluate(q, p_s, p_u, s), history,
                       status, k, ee0, block_log)


def solve_pt(s: Scenario, init=None, max_outer: int = 100, tol: Optional[float] = None,
             order: Sequence[str] = BLOCKS) -> SolveResult:
    """Joint power control and trajectory design.

    ``init`` is an optional ``(q, p_s, p_u)`` triple; the default is
    :func:`initial_point`.
    """
    q, p_s, p_u = initial_point(s) if init is None else init
    return run_bcd(s, order, q, p_s, p_u, "pt", max_outer, tol)

"""Per-slot evaluation of a (trajectory, powers) pair."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .energy import energy_efficiency, trajectory_energy
from .link import slot_links
from .scenario import Scenario

__all__ = ["SlotMetrics", "evaluate", "reporting_ee"]


@dataclass(frozen=True)
class SlotMetrics:
    """Arrays over slots 1..N. ``r_sec`` is unclamped; ``r_sec_clamped`` is reported."""

    h_su: np.ndarray
    h_ue: np.ndarray
    r_u: np.ndarray
    r_e: np.ndarray
    r_sec: np.ndarray
    v: np.ndarray
    e_p: np.ndarray

    @property
    def r_sec_clamped(self) -> np.ndarray:
        return np.maximum(self.r_sec, 0.0)

    def __len__(self) -> int:
        return self.r_sec.size


def evaluate(q, p_s, p_u, s: Scenario) -> SlotMetrics:
    q = np.asarray(q, dtype=float)
    link = slot_links(q, p_s, p_u, s)
    en = trajectory_energy(q, s)
    return SlotMetrics(link.h_su, link.h_ue, link.r_u, link.r_e, link.r_sec, en.v, en.e_p)


def reporting_ee(q, p_s, p_u, s: Scenario) -> float:
    """Secure bits per joule with per-slot clamping."""
    m = evaluate(q, p_s, p_u, s)
    return energy_efficiency(m.r_sec, m.e_p, s)

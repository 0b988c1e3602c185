"""Rotary-wing propulsion energy and the energy-efficiency objective."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import EnergyParams, Scenario, ScenarioError

__all__ = [
    "SlotEnergy",
    "blade_factor",
    "induced_factor",
    "propulsion_power",
    "slot_speeds",
    "slot_energy",
    "trajectory_energy",
    "energy_efficiency",
    "InfeasibleTrajectory",
]

_SPEED_SLACK = 1e-6


class InfeasibleTrajectory(ScenarioError):
    pass


def blade_factor(v, ep: EnergyParams):
    """``1 + 3 v^2 / U_tip^2``."""
    v = np.asarray(v, dtype=float)
    return 1.0 + 3.0 * v * v / ep.u_tip ** 2


def induced_factor(v, ep: EnergyParams):
    """``sqrt(1 + v^4/(4 v0^4)) - v^2/(2 v0^2)`` in (0, 1].

    Written as ``1 / (sqrt(1 + x^2) + x)`` with ``x = v^2/(2 v0^2)`` to avoid
    cancellation at high speed.
    """
    v = np.asarray(v, dtype=float)
    x = v * v / (2.0 * ep.v0_rotor ** 2)
    return 1.0 / (np.sqrt(1.0 + x * x) + x)


def _parasite_coeff(ep: EnergyParams) -> float:
    return 0.5 * ep.drag_ratio * ep.air_density * ep.solidity * ep.disc_area


def propulsion_power(v, ep: EnergyParams):
    """Level-flight propulsion power in watts at horizontal speed ``v``."""
    v = np.asarray(v, dtype=float)
    if np.any(v < 0):
        raise ValueError("speed must be non-negative")
    return (ep.p0_blade * blade_factor(v, ep)
            + ep.pi_induced * np.sqrt(induced_factor(v, ep))
            + _parasite_coeff(ep) * v ** 3)


def slot_speeds(q: np.ndarray, slot_len: float) -> np.ndarray:
    """Speeds of slots 1..N, ``v[n] = ||q[n] - q[n-1]|| / dt``."""
    q = np.asarray(q, dtype=float)
    return np.linalg.norm(np.diff(q, axis=0), axis=1) / slot_len


@dataclass(frozen=True)
class SlotEnergy:
    v: np.ndarray
    phi: np.ndarray
    varphi: np.ndarray
    e_p: np.ndarray

    @property
    def total(self) -> float:
        return float(np.sum(self.e_p))


def slot_energy(v, s: Scenario) -> SlotEnergy:
    v = np.asarray(v, dtype=float)
    ep = s.energy
    return SlotEnergy(v, blade_factor(v, ep), induced_factor(v, ep),
                      s.slot_len * propulsion_power(v, ep))


def trajectory_energy(q: np.ndarray, s: Scenario) -> SlotEnergy:
    """Per-slot propulsion energy (J) of an ``(N+1, 2)`` waypoint sequence."""
    q = np.asarray(q, dtype=float)
    if q.shape != (s.n_slots + 1, 2):
        raise ValueError(f"trajectory must have shape ({s.n_slots + 1}, 2), got {q.shape}")
    v = slot_speeds(q, s.slot_len)
    vmax = float(v.max(initial=0.0))
    if vmax > s.v_max * (1.0 + _SPEED_SLACK):
        raise InfeasibleTrajectory(f"slot speed {vmax:.9g} m/s exceeds v_max={s.v_max} m/s")
    return slot_energy(v, s)


def energy_efficiency(r_sec, e_p, s: Scenario, with_slot_len: bool = True) -> float:
    """Secure bits per joule from per-slot secrecy rates and energies.

    Negative slot rates are clamped to zero. With ``with_slot_len`` the
    numerator is in bits (``B * dt * sum r``); without it the numerator is
    ``B * sum r``, the bps-per-joule convention of the original objective.
    """
    r_sec = np.asarray(r_sec, dtype=float)
    e_p = np.asarray(e_p, dtype=float)
    if r_sec.shape != e_p.shape:
        raise ValueError("rate and energy vectors differ in length")
    total = float(np.sum(e_p))
    if total <= 0.0:
        raise ValueError("total propulsion energy must be positive")
    bits = s.bandwidth * float(np.sum(np.maximum(r_sec, 0.0)))
    if with_slot_len:
        bits *= s.slot_len
    return bits / total

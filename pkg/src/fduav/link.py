"""Channel gains and the Jensen-bounded rates of the full-duplex link.

Positions may be a single 2-vector or an ``(..., 2)`` array; powers
broadcast against the leading shape. Rates are in bps/Hz.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import DerivedConstants, Scenario, derive

__all__ = [
    "SlotLink",
    "gain_su",
    "gain_ue",
    "rate_uav",
    "rate_eve",
    "secrecy_rate",
    "slot_links",
]


def _sq_dist_su(q, s: Scenario) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return s.altitude ** 2 + np.sum(q * q, axis=-1)


def _sq_dist_ue(q, s: Scenario) -> np.ndarray:
    d = np.asarray(q, dtype=float) - s.w_e
    return s.altitude ** 2 + np.sum(d * d, axis=-1)


def gain_su(q, s: Scenario):
    """Source-to-UAV power gain ``rho0 / (H^2 + ||q||^2)``."""
    return s.rho0 / _sq_dist_su(q, s)


def gain_ue(q, s: Scenario):
    """UAV-to-eavesdropper power gain ``rho0 / (H^2 + ||q - w_E||^2)``."""
    return s.rho0 / _sq_dist_ue(q, s)


def rate_uav(p_s, p_u, q, s: Scenario, d: DerivedConstants | None = None):
    """Lower bound on the UAV's ergodic rate under Rayleigh self-interference."""
    d = d or derive(s)
    snr = np.asarray(p_s, dtype=float) * d.gamma0 / (
        _sq_dist_su(q, s) * (np.asarray(p_u, dtype=float) * d.beta0 + 1.0))
    return np.log2(1.0 + snr)


def rate_eve(p_s, p_u, q, s: Scenario, d: DerivedConstants | None = None):
    """Upper bound on the eavesdropper's ergodic rate over the S-E Rayleigh link."""
    d = d or derive(s)
    direct = d.gamma0 * np.hypot(*s.eve_pos) ** (-s.kappa)
    jam = np.asarray(p_u, dtype=float) * d.gamma0 / _sq_dist_ue(q, s)
    return np.log2(1.0 + np.asarray(p_s, dtype=float) * direct / (jam + 1.0))


def secrecy_rate(p_s, p_u, q, s: Scenario, d: DerivedConstants | None = None,
                 clamp: bool = False):
    """Per-slot secrecy rate. Unclamped unless ``clamp`` is set."""
    d = d or derive(s)
    r = rate_uav(p_s, p_u, q, s, d) - rate_eve(p_s, p_u, q, s, d)
    return np.maximum(r, 0.0) if clamp else r


@dataclass(frozen=True)
class SlotLink:
    h_su: np.ndarray
    h_ue: np.ndarray
    r_u: np.ndarray
    r_e: np.ndarray
    r_sec: np.ndarray


def slot_links(q: np.ndarray, p_s, p_u, s: Scenario) -> SlotLink:
    """Per-slot link quantities for slots 1..N of an ``(N+1, 2)`` trajectory.

    Slot ``n`` is evaluated at its end waypoint ``q[n]``.
    """
    d = derive(s)
    qn = np.asarray(q, dtype=float)[1:]
    r_u = rate_uav(p_s, p_u, qn, s, d)
    r_e = rate_eve(p_s, p_u, qn, s, d)
    return SlotLink(gain_su(qn, s), gain_ue(qn, s), r_u, r_e, r_u - r_e)

"""Pure numpy/scipy implementation of the trajectory kernels.

This is the fallback used when the compiled ``_kernels`` extension is not
available. Both backends implement the same two entry points:

``speed_slack(delta, s_k, psi, c)``
    Smallest ``s > 0`` with ``1/s^2 <= 2 s_k s - s_k^2 + c (2 psi.delta - |psi|^2)``,
    i.e. the linearized speed-slack constraint held with equality.

``barrier_solve(q, quad, lin, kq, kc, kpi, c, s_k, psi, omega2, t0, gap_tol, ...)``
    Log-barrier Newton method minimizing, over the interior waypoints of
    ``q`` (endpoints fixed),

        sum_i quad_i |q_i|^2 - lin_i . q_i
      + sum_n kq |d_n|^2 + kpi s*(d_n) + kc |d_n|^3

    subject to ``|d_n|^2 < omega2`` where ``d_n = q_n - q_{n-1}``.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solveh_banded

__all__ = ["speed_slack", "barrier_solve", "BACKEND"]

BACKEND = "python"

_ROOT_MAX_ITER = 100


def _slack_root(r, s_k, s0):
    """Positive root of ``2 s_k s - 1/s^2 = r`` (vectorized).

    The left side is increasing and concave, so Newton started left of the
    root increases monotonically to it.
    """
    s = np.array(s0, dtype=float, copy=True)
    bad = ~(s > 0.0)
    s[bad] = 1.0
    for _ in range(200):
        hi = 2.0 * s_k * s - 1.0 / (s * s) > r
        if not hi.any():
            break
        s[hi] *= 0.5
    for _ in range(_ROOT_MAX_ITER):
        g = 2.0 * s_k * s - 1.0 / (s * s) - r
        step = g / (2.0 * s_k + 2.0 / (s * s * s))
        s = s - step
        if np.all(np.abs(step) <= 1e-15 * s):
            break
    return s


def speed_slack(delta, s_k, psi, c, s0=None):
    delta = np.asarray(delta, dtype=float)
    psi = np.asarray(psi, dtype=float)
    s_k = np.asarray(s_k, dtype=float)
    lin = c * (2.0 * np.sum(psi * delta, axis=-1) - np.sum(psi * psi, axis=-1))
    r = s_k * s_k - lin
    return _slack_root(r, s_k, s_k if s0 is None else s0)


class _Problem:
    def __init__(self, q, quad, lin, kq, kc, kpi, c, s_k, psi, omega2):
        self.q0 = q[0].copy()
        self.qn = q[-1].copy()
        self.quad = np.asarray(quad, dtype=float)[1:-1]
        self.lin = np.asarray(lin, dtype=float)[1:-1]
        self.kq, self.kc, self.kpi, self.c = kq, kc, kpi, c
        self.s_k = np.asarray(s_k, dtype=float)
        self.psi = np.asarray(psi, dtype=float)
        self.omega2 = omega2
        self.s_prev = self.s_k.copy()

    def full(self, x):
        return np.vstack([self.q0, x.reshape(-1, 2), self.qn])

    def deltas(self, x):
        return np.diff(self.full(x), axis=0)

    def value(self, x, t):
        """Barrier objective, ``inf`` outside the open feasible set."""
        d = self.deltas(x)
        nrm2 = np.sum(d * d, axis=1)
        u = self.omega2 - nrm2
        if np.any(u <= 0.0):
            return np.inf
        s = speed_slack(d, self.s_k, self.psi, self.c, self.s_prev)
        xi = x.reshape(-1, 2)
        obj = (np.sum(self.quad * np.sum(xi * xi, axis=1)) - np.sum(self.lin * xi)
               + self.kq * nrm2.sum() + self.kpi * s.sum()
               + self.kc * np.sum(nrm2 * np.sqrt(nrm2)))
        return t * obj - np.sum(np.log(u))

    def newton_system(self, x, t):
        d = self.deltas(x)
        nrm2 = np.sum(d * d, axis=1)
        nrm = np.sqrt(nrm2)
        u = self.omega2 - nrm2
        s = speed_slack(d, self.s_k, self.psi, self.c, self.s_prev)
        self.s_prev = s
        h = 2.0 * self.s_k + 2.0 / s ** 3
        dsig = -1.0 / h
        d2sig = 6.0 / s ** 4 / h ** 3
        gl = 2.0 * self.c * self.psi  # gradient of the linear Taylor term

        g_d = (t * (2.0 * self.kq * d + self.kpi * dsig[:, None] * gl
                    + 3.0 * self.kc * nrm[:, None] * d)
               + 2.0 * d / u[:, None])
        eye = np.eye(2)
        with np.errstate(divide="ignore", invalid="ignore"):
            ddn = np.where(nrm[:, None, None] > 0.0,
                           d[:, :, None] * d[:, None, :] / nrm[:, None, None], 0.0)
        h_d = (t * (2.0 * self.kq * eye
                    + self.kpi * d2sig[:, None, None] * gl[:, :, None] * gl[:, None, :]
                    + 3.0 * self.kc * (nrm[:, None, None] * eye + ddn))
               + 2.0 * eye / u[:, None, None]
               + 4.0 * d[:, :, None] * d[:, None, :] / (u * u)[:, None, None])

        xi = x.reshape(-1, 2)
        grad = t * (2.0 * self.quad[:, None] * xi - self.lin) + g_d[:-1] - g_d[1:]
        diag = h_d[:-1] + h_d[1:] + 2.0 * t * self.quad[:, None, None] * eye
        off = -h_d[1:-1]  # block (i, i+1)
        return grad.ravel(), diag, off

    @staticmethod
    def solve(diag, off, rhs):
        m = diag.shape[0]
        n = 2 * m
        ab = np.zeros((4, n))
        ab[0, 0::2] = diag[:, 0, 0]
        ab[0, 1::2] = diag[:, 1, 1]
        ab[1, 0::2] = diag[:, 1, 0]
        if m > 1:
            ab[1, 1:-1:2] = off[:, 0, 1]
            ab[2, 0:-2:2] = off[:, 0, 0]
            ab[2, 1:-2:2] = off[:, 1, 1]
            ab[3, 0:-2:2] = off[:, 1, 0]
        return solveh_banded(ab, rhs, lower=True, check_finite=False)


def barrier_solve(q, quad, lin, kq, kc, kpi, c, s_k, psi, omega2, t0, gap_tol,
                  mu=20.0, newton_tol=1e-9, max_newton=400):
    """Return ``(q_opt, newton_steps, status)``; status 0 ok, 1 step cap hit."""
    q = np.ascontiguousarray(q, dtype=float)
    n_slots = q.shape[0] - 1
    if n_slots < 2:
        return q.copy(), 0, 0
    prob = _Problem(q, quad, lin, kq, kc, kpi, c, s_k, psi, omega2)
    x = q[1:-1].ravel().copy()
    t = t0
    steps = 0
    status = 0
    while True:
        f = prob.value(x, t)
        while steps < max_newton:
            grad, diag, off = prob.newton_system(x, t)
            dx = -prob.solve(diag, off, grad)
            dec2 = -float(grad @ dx)
            steps += 1
            if dec2 <= 2.0 * newton_tol:
                break
            alpha = 1.0
            accepted = False
            for _ in range(80):
                xn = x + alpha * dx
                fn = prob.value(xn, t)
                if np.isfinite(fn):
                    if fn <= f - 0.25 * alpha * dec2:
                        accepted = True
                        break
                    if dec2 < 1e-4 and alpha == 1.0:
                        # inside the quadratic region the decrease is below round-off
                        accepted = True
                        break
                alpha *= 0.5
            if not accepted:
                break
            x, f = xn, fn
        else:
            status = 1
        if n_slots / t < gap_tol or status:
            break
        t *= mu
    return prob.full(x), steps, status

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled trajectory kernels. Same contract as ``_kernels_py``."""

import numpy as np

from libc.math cimport sqrt, log, fabs, INFINITY

BACKEND = "cython"


cdef inline double _root(double r, double sk, double s0) nogil:
    cdef double s = s0 if s0 > 0.0 else 1.0
    cdef double g, step
    cdef int i
    for i in range(200):
        if 2.0 * sk * s - 1.0 / (s * s) > r:
            s *= 0.5
        else:
            break
    for i in range(100):
        g = 2.0 * sk * s - 1.0 / (s * s) - r
        step = g / (2.0 * sk + 2.0 / (s * s * s))
        s -= step
        if fabs(step) <= 1e-15 * s:
            break
    return s


def speed_slack(delta, s_k, psi, double c, s0=None):
    cdef const double[:, ::1] dv = np.ascontiguousarray(np.asarray(delta, dtype=float).reshape(-1, 2))
    cdef const double[:, ::1] pv = np.ascontiguousarray(np.broadcast_to(
        np.asarray(psi, dtype=float), np.asarray(delta).shape).reshape(-1, 2))
    cdef Py_ssize_t n = dv.shape[0]
    cdef const double[::1] skv = np.ascontiguousarray(np.broadcast_to(
        np.asarray(s_k, dtype=float), (n,)))
    cdef const double[::1] s0v = skv if s0 is None else np.ascontiguousarray(
        np.broadcast_to(np.asarray(s0, dtype=float), (n,)))
    out = np.empty(n)
    cdef double[::1] ov = out
    cdef Py_ssize_t j
    cdef double lin
    for j in range(n):
        lin = c * (2.0 * (pv[j, 0] * dv[j, 0] + pv[j, 1] * dv[j, 1])
                   - (pv[j, 0] * pv[j, 0] + pv[j, 1] * pv[j, 1]))
        ov[j] = _root(skv[j] * skv[j] - lin, skv[j], s0v[j])
    return out.reshape(np.asarray(delta).shape[:-1])


cdef class _Problem:
    cdef int n          # slots
    cdef int m          # interior waypoints
    cdef double kq, kc, kpi, c, omega2
    cdef double[:, ::1] q
    cdef double[::1] quad
    cdef double[:, ::1] lin
    cdef double[::1] s_k
    cdef double[:, ::1] psi
    cdef double[::1] s_prev
    cdef double[:, ::1] hd      # per-slot Hessian wrt delta: h00, h01, h11
    cdef double[:, ::1] gd
    cdef double[:, ::1] diag
    cdef double[:, ::1] off
    cdef double[:, ::1] grad
    cdef double[:, ::1] sinv
    cdef double[:, ::1] y
    cdef double[:, ::1] dx

    def __init__(self, q, quad, lin, double kq, double kc, double kpi, double c,
                 s_k, psi, double omega2):
        self.q = np.array(q, dtype=float, order="C")
        self.n = self.q.shape[0] - 1
        self.m = self.n - 1
        self.quad = np.ascontiguousarray(quad, dtype=float)
        self.lin = np.ascontiguousarray(lin, dtype=float)
        self.kq, self.kc, self.kpi, self.c = kq, kc, kpi, c
        self.s_k = np.ascontiguousarray(s_k, dtype=float)
        self.psi = np.ascontiguousarray(psi, dtype=float)
        self.omega2 = omega2
        self.s_prev = np.array(self.s_k, dtype=float)
        self.hd = np.empty((self.n, 3))
        self.gd = np.empty((self.n, 2))
        self.diag = np.empty((self.m, 3))
        self.off = np.empty((max(self.m - 1, 1), 3))
        self.grad = np.empty((self.m, 2))
        self.sinv = np.empty((self.m, 3))
        self.y = np.empty((self.m, 2))
        self.dx = np.empty((self.m, 2))

    cdef double slack(self, int j, double d0, double d1, double s0) nogil:
        cdef double lin = self.c * (2.0 * (self.psi[j, 0] * d0 + self.psi[j, 1] * d1)
                                    - (self.psi[j, 0] * self.psi[j, 0]
                                       + self.psi[j, 1] * self.psi[j, 1]))
        return _root(self.s_k[j] * self.s_k[j] - lin, self.s_k[j], s0)

    cdef double value(self, double[:, ::1] q, double t) nogil:
        cdef int j, i
        cdef double d0, d1, nrm2, u, s, obj = 0.0, bar = 0.0
        for j in range(self.n):
            d0 = q[j + 1, 0] - q[j, 0]
            d1 = q[j + 1, 1] - q[j, 1]
            nrm2 = d0 * d0 + d1 * d1
            u = self.omega2 - nrm2
            if u <= 0.0:
                return INFINITY
            s = self.slack(j, d0, d1, self.s_prev[j])
            obj += self.kq * nrm2 + self.kpi * s + self.kc * nrm2 * sqrt(nrm2)
            bar -= log(u)
        for i in range(1, self.n):
            obj += (self.quad[i] * (q[i, 0] * q[i, 0] + q[i, 1] * q[i, 1])
                    - self.lin[i, 0] * q[i, 0] - self.lin[i, 1] * q[i, 1])
        return t * obj + bar

    cdef void newton_system(self, double t) nogil:
        cdef int j, i
        cdef double d0, d1, nrm2, nrm, u, s, h, dsig, d2sig, g0, g1, inv_u, w
        cdef double c2 = 2.0 * self.c
        for j in range(self.n):
            d0 = self.q[j + 1, 0] - self.q[j, 0]
            d1 = self.q[j + 1, 1] - self.q[j, 1]
            nrm2 = d0 * d0 + d1 * d1
            nrm = sqrt(nrm2)
            u = self.omega2 - nrm2
            inv_u = 1.0 / u
            s = self.slack(j, d0, d1, self.s_prev[j])
            self.s_prev[j] = s
            h = 2.0 * self.s_k[j] + 2.0 / (s * s * s)
            dsig = -1.0 / h
            d2sig = 6.0 / (s * s * s * s) / (h * h * h)
            g0 = c2 * self.psi[j, 0]
            g1 = c2 * self.psi[j, 1]
            self.gd[j, 0] = (t * (2.0 * self.kq * d0 + self.kpi * dsig * g0
                                  + 3.0 * self.kc * nrm * d0) + 2.0 * d0 * inv_u)
            self.gd[j, 1] = (t * (2.0 * self.kq * d1 + self.kpi * dsig * g1
                                  + 3.0 * self.kc * nrm * d1) + 2.0 * d1 * inv_u)
            w = 3.0 * self.kc / nrm if nrm > 0.0 else 0.0
            self.hd[j, 0] = (t * (2.0 * self.kq + self.kpi * d2sig * g0 * g0
                                  + 3.0 * self.kc * nrm + w * d0 * d0)
                             + 2.0 * inv_u + 4.0 * d0 * d0 * inv_u * inv_u)
            self.hd[j, 1] = (t * (self.kpi * d2sig * g0 * g1 + w * d0 * d1)
                             + 4.0 * d0 * d1 * inv_u * inv_u)
            self.hd[j, 2] = (t * (2.0 * self.kq + self.kpi * d2sig * g1 * g1
                                  + 3.0 * self.kc * nrm + w * d1 * d1)
                             + 2.0 * inv_u + 4.0 * d1 * d1 * inv_u * inv_u)
        for i in range(self.m):
            # interior waypoint i+1 sits between slots i and i+1
            w = 2.0 * t * self.quad[i + 1]
            self.grad[i, 0] = (w * self.q[i + 1, 0] - t * self.lin[i + 1, 0]
                               + self.gd[i, 0] - self.gd[i + 1, 0])
            self.grad[i, 1] = (w * self.q[i + 1, 1] - t * self.lin[i + 1, 1]
                               + self.gd[i, 1] - self.gd[i + 1, 1])
            self.diag[i, 0] = self.hd[i, 0] + self.hd[i + 1, 0] + w
            self.diag[i, 1] = self.hd[i, 1] + self.hd[i + 1, 1]
            self.diag[i, 2] = self.hd[i, 2] + self.hd[i + 1, 2] + w
            if i < self.m - 1:
                self.off[i, 0] = -self.hd[i + 1, 0]
                self.off[i, 1] = -self.hd[i + 1, 1]
                self.off[i, 2] = -self.hd[i + 1, 2]

    cdef int solve(self) nogil:
        """dx = -H^{-1} grad via block LDL^T on the 2x2-block tridiagonal Hessian."""
        cdef int i
        cdef double a, b, d, det, e0, e1, e2, p0, p1, p2, p3
        cdef double m00, m01, m10, m11, r0, r1
        for i in range(self.m):
            a = self.diag[i, 0]
            b = self.diag[i, 1]
            d = self.diag[i, 2]
            r0 = -self.grad[i, 0]
            r1 = -self.grad[i, 1]
            if i > 0:
                e0 = self.off[i - 1, 0]
                e1 = self.off[i - 1, 1]
                e2 = self.off[i - 1, 2]
                # P = Sinv_{i-1} E
                p0 = self.sinv[i - 1, 0] * e0 + self.sinv[i - 1, 1] * e1
                p1 = self.sinv[i - 1, 0] * e1 + self.sinv[i - 1, 1] * e2
                p2 = self.sinv[i - 1, 1] * e0 + self.sinv[i - 1, 2] * e1
                p3 = self.sinv[i - 1, 1] * e1 + self.sinv[i - 1, 2] * e2
                # E^T P
                m00 = e0 * p0 + e1 * p2
                m01 = e0 * p1 + e1 * p3
                m10 = e1 * p0 + e2 * p2
                m11 = e1 * p1 + e2 * p3
                a -= m00
                b -= 0.5 * (m01 + m10)
                d -= m11
                # y_i -= E^T Sinv y_{i-1} = P^T y_{i-1}
                r0 -= p0 * self.y[i - 1, 0] + p2 * self.y[i - 1, 1]
                r1 -= p1 * self.y[i - 1, 0] + p3 * self.y[i - 1, 1]
            det = a * d - b * b
            if not det > 0.0:
                return 1
            self.sinv[i, 0] = d / det
            self.sinv[i, 1] = -b / det
            self.sinv[i, 2] = a / det
            self.y[i, 0] = r0
            self.y[i, 1] = r1
        for i in range(self.m - 1, -1, -1):
            r0 = self.y[i, 0]
            r1 = self.y[i, 1]
            if i < self.m - 1:
                r0 -= self.off[i, 0] * self.dx[i + 1, 0] + self.off[i, 1] * self.dx[i + 1, 1]
                r1 -= self.off[i, 1] * self.dx[i + 1, 0] + self.off[i, 2] * self.dx[i + 1, 1]
            self.dx[i, 0] = self.sinv[i, 0] * r0 + self.sinv[i, 1] * r1
            self.dx[i, 1] = self.sinv[i, 1] * r0 + self.sinv[i, 2] * r1
        return 0


def barrier_solve(q, quad, lin, double kq, double kc, double kpi, double c, s_k, psi,
                  double omega2, double t0, double gap_tol, double mu=20.0,
                  double newton_tol=1e-9, int max_newton=400):
    q = np.ascontiguousarray(q, dtype=float)
    cdef int n_slots = q.shape[0] - 1
    if n_slots < 2:
        return q.copy(), 0, 0
    cdef _Problem prob = _Problem(q, quad, lin, kq, kc, kpi, c, s_k, psi, omega2)
    cdef double[:, ::1] trial = np.array(prob.q, dtype=float, order="C")
    cdef double t = t0, f, fn, dec2, alpha
    cdef int steps = 0, status = 0, i, k, accepted, m = prob.m
    while True:
        f = prob.value(prob.q, t)
        while True:
            if steps >= max_newton:
                status = 1
                break
            prob.newton_system(t)
            if prob.solve():
                status = 2
                break
            dec2 = 0.0
            for i in range(m):
                dec2 -= prob.grad[i, 0] * prob.dx[i, 0] + prob.grad[i, 1] * prob.dx[i, 1]
            steps += 1
            if dec2 <= 2.0 * newton_tol:
                break
            alpha = 1.0
            accepted = 0
            for k in range(80):
                for i in range(m):
                    trial[i + 1, 0] = prob.q[i + 1, 0] + alpha * prob.dx[i, 0]
                    trial[i + 1, 1] = prob.q[i + 1, 1] + alpha * prob.dx[i, 1]
                fn = prob.value(trial, t)
                if fn < INFINITY:
                    if fn <= f - 0.25 * alpha * dec2:
                        accepted = 1
                        break
                    if dec2 < 1e-4 and alpha == 1.0:
                        accepted = 1
                        break
                alpha *= 0.5
            if not accepted:
                break
            for i in range(m):
                prob.q[i + 1, 0] = trial[i + 1, 0]
                prob.q[i + 1, 1] = trial[i + 1, 1]
            f = fn
        if n_slots / t < gap_tol or status:
            break
        t *= mu
    return np.asarray(prob.q).copy(), steps, status

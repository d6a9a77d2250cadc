# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops.

Every function here has a pure-Python twin in ``_fallback`` with the same
signature and the same arithmetic; ``eetsim._core`` picks one at import.
"""

import numpy as np

from libc.math cimport fabs, sqrt, ceil


cdef double _offdiag_frobenius(double[:, ::1] a) noexcept nogil:
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, j
    cdef double s = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                s += a[i, j] * a[i, j]
    return sqrt(s)


def jacobi_eigh(a_in, double rel_tol=1e-14, int max_sweeps=100):
    """Cyclic Jacobi eigensolver. Returns (eigenvalues, eigenvectors, sweeps)."""
    a = np.array(a_in, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = a.shape[0]
    v = np.eye(n)
    cdef double[:, ::1] A = a
    cdef double[:, ::1] V = v
    cdef double norm = np.linalg.norm(a)
    cdef double apq, app, aqq, g, theta, t, c, s, akp, akq
    cdef Py_ssize_t p, q, k
    cdef int sweep
    for sweep in range(max_sweeps + 1):
        if _offdiag_frobenius(A) <= rel_tol * norm:
            return a.diagonal().copy(), v, sweep
        if sweep == max_sweeps:
            break
        with nogil:
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = A[p, q]
                    if apq == 0.0:
                        continue
                    app = A[p, p]
                    aqq = A[q, q]
                    g = 100.0 * fabs(apq)
                    if fabs(app) + g == fabs(app) and fabs(aqq) + g == fabs(aqq):
                        A[p, q] = 0.0
                        A[q, p] = 0.0
                        continue
                    theta = (aqq - app) / (2.0 * apq)
                    t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                    c = 1.0 / sqrt(t * t + 1.0)
                    s = t * c
                    for k in range(n):
                        akp = A[k, p]
                        akq = A[k, q]
                        A[k, p] = c * akp - s * akq
                        A[k, q] = s * akp + c * akq
                    for k in range(n):
                        akp = A[p, k]
                        akq = A[q, k]
                        A[p, k] = c * akp - s * akq
                        A[q, k] = s * akp + c * akq
                    A[p, q] = 0.0
                    A[q, p] = 0.0
                    for k in range(n):
                        akp = V[k, p]
                        akq = V[k, q]
                        V[k, p] = c * akp - s * akq
                        V[k, q] = s * akp + c * akq
    raise ArithmeticError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")


def bessel_miller(double x, int nmax, int nstart):
    """J_0..J_nmax at x by downward recurrence from order ``nstart``."""
    out = np.zeros(nmax + 1)
    cdef double[::1] o = out
    cdef double f_next = 0.0, f_cur = 1.0, f_prev, norm = 0.0
    cdef Py_ssize_t k, i
    if x == 0.0:
        o[0] = 1.0
        return out
    for k in range(nstart, 0, -1):
        f_prev = (2.0 * k / x) * f_cur - f_next
        if k <= nmax:
            o[k] = f_cur
        if k % 2 == 0:
            norm += 2.0 * f_cur
        f_next = f_cur
        f_cur = f_prev
        if fabs(f_cur) > 1e250:
            f_cur *= 1e-250
            f_next *= 1e-250
            norm *= 1e-250
            for i in range(k, nmax + 1):
                o[i] *= 1e-250
    o[0] = f_cur
    norm += f_cur
    for i in range(nmax + 1):
        o[i] /= norm
    return out


cdef void _hmul(const double[:, ::1] h, double complex[::1] c, double complex[::1] out) noexcept nogil:
    # out = -i * h @ c
    cdef Py_ssize_t n = h.shape[0]
    cdef Py_ssize_t i, j
    cdef double complex acc
    for i in range(n):
        acc = 0.0
        for j in range(n):
            acc = acc + h[i, j] * c[j]
        out[i] = -1j * acc


def rk4_propagate(h_in, c0_in, times_in, double t0, double dt_max):
    """Fixed-step RK4 for dc/dt = -i H c, sampled at ``times``."""
    cdef const double[:, ::1] h = np.ascontiguousarray(h_in, dtype=np.float64)
    cdef const double[::1] times = np.ascontiguousarray(times_in, dtype=np.float64)
    cdef Py_ssize_t n = h.shape[0], nt = times.shape[0]
    out = np.empty((nt, n), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    c_arr = np.array(c0_in, dtype=np.complex128)
    cdef double complex[::1] c = c_arr
    cdef double complex[::1] k1 = np.empty(n, np.complex128)
    cdef double complex[::1] k2 = np.empty(n, np.complex128)
    cdef double complex[::1] k3 = np.empty(n, np.complex128)
    cdef double complex[::1] k4 = np.empty(n, np.complex128)
    cdef double complex[::1] tmp = np.empty(n, np.complex128)
    cdef double t_prev = t0, span, step
    cdef long nsteps, s
    cdef Py_ssize_t it, i
    for it in range(nt):
        span = times[it] - t_prev
        nsteps = max(1, <long>ceil(span / dt_max - 1e-9)) if span > 0 else 0
        if nsteps > 0:
            step = span / nsteps
            with nogil:
                for s in range(nsteps):
                    _hmul(h, c, k1)
                    for i in range(n):
                        tmp[i] = c[i] + 0.5 * step * k1[i]
                    _hmul(h, tmp, k2)
                    for i in range(n):
                        tmp[i] = c[i] + 0.5 * step * k2[i]
                    _hmul(h, tmp, k3)
                    for i in range(n):
                        tmp[i] = c[i] + step * k3[i]
                    _hmul(h, tmp, k4)
                    for i in range(n):
                        c[i] = c[i] + step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        for i in range(n):
            o[it, i] = c[i]
        t_prev = times[it]
    return out


cdef void _kick(const double[:, ::1] b, double[::1] x, double[::1] p, double half) noexcept nogil:
    cdef Py_ssize_t n = b.shape[0]
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(n):
        acc = 0.0
        for j in range(n):
            acc += b[i, j] * x[j]
        p[i] -= half * acc


def verlet_propagate(omega_in, b_in, x0_in, p0_in, times_in, double t0, double dt_max):
    """Velocity Verlet for H = 1/2 p.diag(omega).p + 1/2 x.B.x, sampled at ``times``."""
    cdef const double[::1] omega = np.ascontiguousarray(omega_in, dtype=np.float64)
    cdef const double[:, ::1] b = np.ascontiguousarray(b_in, dtype=np.float64)
    cdef const double[::1] times = np.ascontiguousarray(times_in, dtype=np.float64)
    cdef Py_ssize_t n = b.shape[0], nt = times.shape[0]
    x_arr = np.array(x0_in, dtype=np.float64)
    p_arr = np.array(p0_in, dtype=np.float64)
    cdef double[::1] x = x_arr
    cdef double[::1] p = p_arr
    xs = np.empty((nt, n))
    ps = np.empty((nt, n))
    cdef double[:, ::1] xo = xs
    cdef double[:, ::1] po = ps
    cdef double t_prev = t0, span, step
    cdef long nsteps, s
    cdef Py_ssize_t it, i
    for it in range(nt):
        span = times[it] - t_prev
        nsteps = max(1, <long>ceil(span / dt_max - 1e-9)) if span > 0 else 0
        if nsteps > 0:
            step = span / nsteps
            with nogil:
                for s in range(nsteps):
                    _kick(b, x, p, 0.5 * step)
                    for i in range(n):
                        x[i] += step * omega[i] * p[i]
                    _kick(b, x, p, 0.5 * step)
        for i in range(n):
            xo[it, i] = x[i]
            po[it, i] = p[i]
        t_prev = times[it]
    return xs, ps

"""Pure-Python/numpy versions of the compiled kernels in ``_kernels.pyx``.

Signatures and arithmetic match the Cython module so either can be swapped in.
"""

import math

import numpy as np


def jacobi_eigh(a_in, rel_tol=1e-14, max_sweeps=100):
    a = np.array(a_in, dtype=np.float64, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    norm = np.linalg.norm(a)
    for sweep in range(max_sweeps + 1):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= rel_tol * norm:
            return a.diagonal().copy(), v, sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                g = 100.0 * abs(apq)
                if abs(app) + g == abs(app) and abs(aqq) + g == abs(aqq):
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = (aqq - app) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    raise ArithmeticError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")


def bessel_miller(x, nmax, nstart):
    out = [0.0] * (nmax + 1)
    if x == 0.0:
        out[0] = 1.0
        return np.array(out)
    f_next, f_cur, norm = 0.0, 1.0, 0.0
    for k in range(nstart, 0, -1):
        f_prev = (2.0 * k / x) * f_cur - f_next
        if k <= nmax:
            out[k] = f_cur
        if k % 2 == 0:
            norm += 2.0 * f_cur
        f_next = f_cur
        f_cur = f_prev
        if abs(f_cur) > 1e250:
            f_cur *= 1e-250
            f_next *= 1e-250
            norm *= 1e-250
            for i in range(k, nmax + 1):
                out[i] *= 1e-250
    out[0] = f_cur
    norm += f_cur
    return np.array(out) / norm


def rk4_propagate(h_in, c0_in, times_in, t0, dt_max):
    h = np.asarray(h_in, dtype=np.float64)
    times = np.asarray(times_in, dtype=np.float64)
    c = np.array(c0_in, dtype=np.complex128)
    out = np.empty((len(times), h.shape[0]), dtype=np.complex128)
    mh = -1j * h
    t_prev = t0
    for it, t in enumerate(times):
        span = t - t_prev
        nsteps = max(1, math.ceil(span / dt_max - 1e-9)) if span > 0 else 0
        if nsteps:
            step = span / nsteps
            for _ in range(nsteps):
                k1 = mh @ c
                k2 = mh @ (c + 0.5 * step * k1)
                k3 = mh @ (c + 0.5 * step * k2)
                k4 = mh @ (c + step * k3)
                c = c + step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[it] = c
        t_prev = t
    return out


def verlet_propagate(omega_in, b_in, x0_in, p0_in, times_in, t0, dt_max):
    omega = np.asarray(omega_in, dtype=np.float64)
    b = np.asarray(b_in, dtype=np.float64)
    times = np.asarray(times_in, dtype=np.float64)
    x = np.array(x0_in, dtype=np.float64)
    p = np.array(p0_in, dtype=np.float64)
    xs = np.empty((len(times), len(x)))
    ps = np.empty_like(xs)
    t_prev = t0
    for it, t in enumerate(times):
        span = t - t_prev
        nsteps = max(1, math.ceil(span / dt_max - 1e-9)) if span > 0 else 0
        if nsteps:
            step = span / nsteps
            for _ in range(nsteps):
                p -= 0.5 * step * (b @ x)
                x += step * omega * p
                p -= 0.5 * step * (b @ x)
        xs[it] = x
        ps[it] = p
        t_prev = t
    return xs, ps

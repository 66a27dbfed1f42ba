# Compiled hot kernels: cyclic Jacobi sweeps, LU elimination, RK4 stepping.
# Mirrors rank1stab._kernels.pyref; keep both in sync.

import numpy as np

cimport cython
from libc.math cimport fabs, sqrt, isfinite

cdef double TWO_PI = 6.283185307179586476925287


def jacobi_eig(double[:, ::1] a, double[:, ::1] v, double threshold, int max_sweeps):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t p, q, j, sweep
    cdef double apq, diff, theta, t, c, s, ap, aq, off
    if n < 2:
        return 0
    for sweep in range(1, max_sweeps + 1):
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                diff = a[q, q] - a[p, p]
                if fabs(apq) < 1e-36 * fabs(diff):
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                for j in range(n):
                    ap = a[p, j]
                    aq = a[q, j]
                    a[p, j] = c * ap - s * aq
                    a[q, j] = s * ap + c * aq
                for j in range(n):
                    ap = a[j, p]
                    aq = a[j, q]
                    a[j, p] = c * ap - s * aq
                    a[j, q] = s * ap + c * aq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for j in range(n):
                    ap = v[j, p]
                    aq = v[j, q]
                    v[j, p] = c * ap - s * aq
                    v[j, q] = s * ap + c * aq
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += a[p, q] * a[p, q]
        if sqrt(2.0 * off) <= threshold:
            return sweep
    return -1


def lu_factor(double[:, ::1] a, long long[::1] piv, double pivot_tol):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t k, i, j, r
    cdef double best, val, tmp
    for k in range(n):
        r = k
        best = fabs(a[k, k])
        for i in range(k + 1, n):
            val = fabs(a[i, k])
            if val > best:
                best = val
                r = i
        piv[k] = r
        if r != k:
            for j in range(n):
                tmp = a[k, j]
                a[k, j] = a[r, j]
                a[r, j] = tmp
        if fabs(a[k, k]) <= pivot_tol:
            return k + 1
        for i in range(k + 1, n):
            a[i, k] /= a[k, k]
            val = a[i, k]
            for j in range(k + 1, n):
                a[i, j] -= val * a[k, j]
    return 0


def lu_solve(double[:, ::1] lu, long long[::1] piv, double[::1] b):
    # all row swaps first: stored multipliers refer to final row positions
    cdef Py_ssize_t n = lu.shape[0]
    cdef Py_ssize_t k, j, r
    cdef double tmp, acc
    for k in range(n):
        r = piv[k]
        if r != k:
            tmp = b[k]
            b[k] = b[r]
            b[r] = tmp
    for k in range(n):
        for j in range(k + 1, n):
            b[j] -= lu[j, k] * b[k]
    for k in range(n - 1, -1, -1):
        acc = b[k]
        for j in range(k + 1, n):
            acc -= lu[k, j] * b[j]
        b[k] = acc / lu[k, k]


def zlu_factor(double complex[:, ::1] a, long long[::1] piv, double pivot_tol):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t k, i, j, r
    cdef double best, val
    cdef double complex tmp, fac
    for k in range(n):
        r = k
        best = abs(a[k, k])
        for i in range(k + 1, n):
            val = abs(a[i, k])
            if val > best:
                best = val
                r = i
        piv[k] = r
        if r != k:
            for j in range(n):
                tmp = a[k, j]
                a[k, j] = a[r, j]
                a[r, j] = tmp
        if abs(a[k, k]) <= pivot_tol:
            return k + 1
        for i in range(k + 1, n):
            a[i, k] = a[i, k] / a[k, k]
            fac = a[i, k]
            for j in range(k + 1, n):
                a[i, j] = a[i, j] - fac * a[k, j]
    return 0


def zlu_solve(double complex[:, ::1] lu, long long[::1] piv, double complex[::1] b):
    cdef Py_ssize_t n = lu.shape[0]
    cdef Py_ssize_t k, j, r
    cdef double complex tmp, acc
    for k in range(n):
        r = piv[k]
        if r != k:
            tmp = b[k]
            b[k] = b[r]
            b[r] = tmp
    for k in range(n):
        for j in range(k + 1, n):
            b[j] = b[j] - lu[j, k] * b[k]
    for k in range(n - 1, -1, -1):
        acc = b[k]
        for j in range(k + 1, n):
            acc = acc - lu[k, j] * b[j]
        b[k] = acc / lu[k, k]


@cython.boundscheck(False)
cdef void _full_deriv(double[::1] y, double[::1] dy,
                      Py_ssize_t n, Py_ssize_t m, Py_ssize_t L,
                      double[::1] m_inv, double[::1] d_damp, double[::1] bias,
                      double[::1] inv_tau, double[::1] load,
                      long long[::1] gen_area, double[::1] inv_r,
                      double[::1] inv_tt, double[::1] alpha,
                      double[::1] lo, double[::1] hi,
                      long long[::1] tie_a, long long[::1] tie_b,
                      double[::1] tie_k, double inv_ftc,
                      double[::1] ni, double[::1] sum_p) noexcept:
    cdef Py_ssize_t k, g, l, ka, kb
    cdef double flow, u_off, f0
    for k in range(n):
        ni[k] = 0.0
        sum_p[k] = 0.0
    for l in range(L):
        ka = tie_a[l]
        kb = tie_b[l]
        flow = tie_k[l] * (y[n + ka] - y[n + kb])
        ni[ka] += flow
        ni[kb] -= flow
    for g in range(m):
        k = gen_area[g]
        u_off = alpha[g] * y[4 * n + m + k]
        if u_off < lo[g]:
            u_off = lo[g]
        elif u_off > hi[g]:
            u_off = hi[g]
        dy[2 * n + g] = inv_tt[g] * (-y[2 * n + g] + u_off - inv_r[g] * y[k])
        sum_p[k] += y[2 * n + g]
    f0 = y[0]
    dy[n] = 0.0
    for k in range(n):
        dy[k] = m_inv[k] * (sum_p[k] - d_damp[k] * y[k] - ni[k] - load[k])
        if k > 0:
            dy[n + k] = TWO_PI * (y[k] - f0)
        dy[2 * n + m + k] = inv_ftc * (y[k] - y[2 * n + m + k])
        dy[3 * n + m + k] = inv_ftc * (ni[k] - y[3 * n + m + k])
        dy[4 * n + m + k] = -inv_tau[k] * (y[3 * n + m + k] + bias[k] * y[2 * n + m + k])


def rk4_full(double[::1] y,
             double[::1] m_inv, double[::1] d_damp, double[::1] bias,
             double[::1] inv_tau, double[::1] load,
             long long[::1] gen_area, double[::1] inv_r, double[::1] inv_tt,
             double[::1] alpha, double[::1] lo, double[::1] hi,
             long long[::1] tie_a, long long[::1] tie_b, double[::1] tie_k,
             double inv_ftc, double dt, long long n_steps, long long stride,
             double[:, ::1] rec):
    cdef Py_ssize_t n = m_inv.shape[0]
    cdef Py_ssize_t m = gen_area.shape[0]
    cdef Py_ssize_t L = tie_a.shape[0]
    cdef Py_ssize_t dim = y.shape[0]
    cdef Py_ssize_t i, r
    cdef long long step
    cdef bint ok
    scratch = np.empty((7, dim))
    cdef double[::1] k1 = scratch[0]
    cdef double[::1] k2 = scratch[1]
    cdef double[::1] k3 = scratch[2]
    cdef double[::1] k4 = scratch[3]
    cdef double[::1] yt = scratch[4]
    cdef double[::1] ni = scratch[5]
    cdef double[::1] sum_p = scratch[6]

    for i in range(dim):
        rec[0, i] = y[i]
    r = 1
    for step in range(1, n_steps + 1):
        _full_deriv(y, k1, n, m, L, m_inv, d_damp, bias, inv_tau, load,
                    gen_area, inv_r, inv_tt, alpha, lo, hi,
                    tie_a, tie_b, tie_k, inv_ftc, ni, sum_p)
        for i in range(dim):
            yt[i] = y[i] + 0.5 * dt * k1[i]
        _full_deriv(yt, k2, n, m, L, m_inv, d_damp, bias, inv_tau, load,
                    gen_area, inv_r, inv_tt, alpha, lo, hi,
                    tie_a, tie_b, tie_k, inv_ftc, ni, sum_p)
        for i in range(dim):
            yt[i] = y[i] + 0.5 * dt * k2[i]
        _full_deriv(yt, k3, n, m, L, m_inv, d_damp, bias, inv_tau, load,
                    gen_area, inv_r, inv_tt, alpha, lo, hi,
                    tie_a, tie_b, tie_k, inv_ftc, ni, sum_p)
        for i in range(dim):
            yt[i] = y[i] + dt * k3[i]
        _full_deriv(yt, k4, n, m, L, m_inv, d_damp, bias, inv_tau, load,
                    gen_area, inv_r, inv_tt, alpha, lo, hi,
                    tie_a, tie_b, tie_k, inv_ftc, ni, sum_p)
        for i in range(dim):
            y[i] += (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        if step % stride == 0:
            ok = True
            for i in range(dim):
                rec[r, i] = y[i]
                if not isfinite(y[i]):
                    ok = False
            if not ok:
                return r
            r += 1
    return -1


@cython.boundscheck(False)
cdef void _reduced_deriv(double[::1] eta, double[::1] deta, Py_ssize_t n,
                         Py_ssize_t m, double[:, ::1] bmat, double[::1] tau_sec,
                         double[::1] load, long long[::1] gen_area,
                         double[::1] alpha, double[::1] lo, double[::1] hi,
                         double[::1] w) noexcept:
    cdef Py_ssize_t k, j, g
    cdef double u_off, acc
    for k in range(n):
        w[k] = -load[k]
    for g in range(m):
        k = gen_area[g]
        u_off = alpha[g] * eta[k]
        if u_off < lo[g]:
            u_off = lo[g]
        elif u_off > hi[g]:
            u_off = hi[g]
        w[k] += u_off
    for k in range(n):
        acc = 0.0
        for j in range(n):
            acc += bmat[k, j] * w[j]
        deta[k] = acc / tau_sec[k]


def rk4_reduced(double[::1] eta, double[:, ::1] bmat, double[::1] tau_sec,
                double[::1] load, long long[::1] gen_area, double[::1] alpha,
                double[::1] lo, double[::1] hi, double dt, long long n_steps,
                long long stride, double[:, ::1] rec):
    cdef Py_ssize_t n = eta.shape[0]
    cdef Py_ssize_t m = gen_area.shape[0]
    cdef Py_ssize_t i, r
    cdef long long step
    cdef bint ok
    scratch = np.empty((6, n))
    cdef double[::1] k1 = scratch[0]
    cdef double[::1] k2 = scratch[1]
    cdef double[::1] k3 = scratch[2]
    cdef double[::1] k4 = scratch[3]
    cdef double[::1] yt = scratch[4]
    cdef double[::1] w = scratch[5]

    for i in range(n):
        rec[0, i] = eta[i]
    r = 1
    for step in range(1, n_steps + 1):
        _reduced_deriv(eta, k1, n, m, bmat, tau_sec, load, gen_area, alpha, lo, hi, w)
        for i in range(n):
            yt[i] = eta[i] + 0.5 * dt * k1[i]
        _reduced_deriv(yt, k2, n, m, bmat, tau_sec, load, gen_area, alpha, lo, hi, w)
        for i in range(n):
            yt[i] = eta[i] + 0.5 * dt * k2[i]
        _reduced_deriv(yt, k3, n, m, bmat, tau_sec, load, gen_area, alpha, lo, hi, w)
        for i in range(n):
            yt[i] = eta[i] + dt * k3[i]
        _reduced_deriv(yt, k4, n, m, bmat, tau_sec, load, gen_area, alpha, lo, hi, w)
        for i in range(n):
            eta[i] += (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        if step % stride == 0:
            ok = True
            for i in range(n):
                rec[r, i] = eta[i]
                if not isfinite(eta[i]):
                    ok = False
            if not ok:
                return r
            r += 1
    return -1

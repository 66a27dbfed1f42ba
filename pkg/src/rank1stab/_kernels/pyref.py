"""Pure-Python (numpy) reference implementations of the hot kernels.

Same call signatures and in-place semantics as the compiled module
``rank1stab._kernels._core``; used as the fallback backend and as the
comparison baseline in the kernel benchmark.
"""

import math

import numpy as np

TWO_PI = 2.0 * math.pi


def jacobi_eig(a, v, threshold, max_sweeps):
    """Cyclic Jacobi on symmetric ``a`` (destroyed; diagonal -> eigenvalues).

    ``v`` must be the identity on entry and accumulates the rotations so its
    columns end up as eigenvectors.  Returns the number of sweeps used, or -1
    if the off-diagonal Frobenius norm is still above ``threshold`` after
    ``max_sweeps`` sweeps.
    """
    n = a.shape[0]
    if n < 2:
        return 0
    for sweep in range(1, max_sweeps + 1):
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                diff = a[q, q] - a[p, p]
                if abs(apq) < 1e-36 * abs(diff):
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        off = 0.0
        for p in range(n - 1):
            off += float(np.dot(a[p, p + 1:], a[p, p + 1:]))
        if math.sqrt(2.0 * off) <= threshold:
            return sweep
    return -1


def lu_factor(a, piv, pivot_tol):
    """LU with partial pivoting, in place.  Returns 0, or k+1 if the pivot
    at elimination step k falls below ``pivot_tol``."""
    n = a.shape[0]
    for k in range(n):
        r = k + int(np.argmax(np.abs(a[k:, k])))
        piv[k] = r
        if r != k:
            a[[k, r], :] = a[[r, k], :]
        if abs(a[k, k]) <= pivot_tol:
            return k + 1
        a[k + 1:, k] /= a[k, k]
        a[k + 1:, k + 1:] -= np.outer(a[k + 1:, k], a[k, k + 1:])
    return 0


def lu_solve(lu, piv, b):
    """Solve with factors from :func:`lu_factor`; overwrites ``b``.

    Row swaps are applied to ``b`` up front: the stored multipliers refer to
    final row positions, so interleaving swaps with elimination is wrong.
    """
    n = lu.shape[0]
    for k in range(n):
        r = int(piv[k])
        if r != k:
            b[k], b[r] = b[r], b[k]
    for k in range(n):
        b[k + 1:] -= lu[k + 1:, k] * b[k]
    for k in range(n - 1, -1, -1):
        b[k] = (b[k] - np.dot(lu[k, k + 1:], b[k + 1:])) / lu[k, k]


# Complex variants share the numpy code paths exactly.
zlu_factor = lu_factor
zlu_solve = lu_solve


def _full_deriv(y, dy, n, m, m_inv, d_damp, bias, inv_tau, load,
                gen_area, inv_r, inv_tt, alpha, lo, hi,
                tie_a, tie_b, tie_k, inv_ftc):
    f = y[0:n]
    th = y[n:2 * n]
    p = y[2 * n:2 * n + m]
    zf = y[2 * n + m:3 * n + m]
    zni = y[3 * n + m:4 * n + m]
    eta = y[4 * n + m:5 * n + m]

    flow = tie_k * (th[tie_a] - th[tie_b])
    ni = np.zeros(n)
    np.add.at(ni, tie_a, flow)
    np.add.at(ni, tie_b, -flow)

    u_off = np.clip(alpha * eta[gen_area], lo, hi)
    sum_p = np.zeros(n)
    np.add.at(sum_p, gen_area, p)

    dy[0:n] = m_inv * (sum_p - d_damp * f - ni - load)
    dy[n] = 0.0  # grounded reference angle
    dy[n + 1:2 * n] = TWO_PI * (f[1:] - f[0])
    dy[2 * n:2 * n + m] = inv_tt * (-p + u_off - inv_r * f[gen_area])
    dy[2 * n + m:3 * n + m] = inv_ftc * (f - zf)
    dy[3 * n + m:4 * n + m] = inv_ftc * (ni - zni)
    dy[4 * n + m:5 * n + m] = -inv_tau * (zni + bias * zf)


def rk4_full(y, m_inv, d_damp, bias, inv_tau, load,
             gen_area, inv_r, inv_tt, alpha, lo, hi,
             tie_a, tie_b, tie_k, inv_ftc, dt, n_steps, stride, rec):
    """Fixed-step RK4 of the closed loop (plant + AGC), recording every
    ``stride`` steps into ``rec``.  Returns -1, or the index of the first
    non-finite record."""
    n = m_inv.shape[0]
    m = gen_area.shape[0]
    dim = y.shape[0]
    k1, k2, k3, k4, yt = (np.empty(dim) for _ in range(5))
    args = (n, m, m_inv, d_damp, bias, inv_tau, load,
            gen_area, inv_r, inv_tt, alpha, lo, hi,
            tie_a, tie_b, tie_k, inv_ftc)

    rec[0, :] = y
    r = 1
    # divergence is reported through the finite check; keep numpy quiet on
    # the way there
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(1, n_steps + 1):
            _full_deriv(y, k1, *args)
            yt[:] = y + 0.5 * dt * k1
            _full_deriv(yt, k2, *args)
            yt[:] = y + 0.5 * dt * k2
            _full_deriv(yt, k3, *args)
            yt[:] = y + dt * k3
            _full_deriv(yt, k4, *args)
            y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if step % stride == 0:
                rec[r, :] = y
                if not np.all(np.isfinite(y)):
                    return r
                r += 1
    return -1


def _reduced_deriv(eta, deta, bmat, tau_sec, load, gen_area, alpha, lo, hi):
    n = eta.shape[0]
    w = np.zeros(n)
    np.add.at(w, gen_area, np.clip(alpha * eta[gen_area], lo, hi))
    w -= load
    deta[:] = (bmat @ w) / tau_sec


def rk4_reduced(eta, bmat, tau_sec, load, gen_area, alpha, lo, hi,
                dt, n_steps, stride, rec):
    """Fixed-step RK4 of the reduced AGC dynamics in physical seconds."""
    n = eta.shape[0]
    k1, k2, k3, k4, yt = (np.empty(n) for _ in range(5))
    args = (bmat, tau_sec, load, gen_area, alpha, lo, hi)

    rec[0, :] = eta
    r = 1
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(1, n_steps + 1):
            _reduced_deriv(eta, k1, *args)
            yt[:] = eta + 0.5 * dt * k1
            _reduced_deriv(yt, k2, *args)
            yt[:] = eta + 0.5 * dt * k2
            _reduced_deriv(yt, k3, *args)
            yt[:] = eta + dt * k3
            _reduced_deriv(yt, k4, *args)
            eta += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if step % stride == 0:
                rec[r, :] = eta
                if not np.all(np.isfinite(eta)):
                    return r
                r += 1
    return -1

"""Independent numerical oracles used to cross-check the package.

These deliberately avoid the code paths under test: eigenvalues of symmetric
matrices come from sign changes of det(A - lam I) refined by bisection, and
Hurwitz decisions come from the Routh array of the characteristic polynomial
(obtained by Faddeev-LeVerrier, no eigensolver involved).
"""

import numpy as np


def bisect_sym_eigenvalues(a, tol=1e-11, grid_points=4000):
    """All eigenvalues of a symmetric matrix via det-sign bisection.

    Scans det(A - lam I) on a fine grid inside the Gershgorin bound and
    bisects every sign change; assumes distinct eigenvalues (true almost
    surely for the random matrices used in tests).
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    radius = float(np.max(np.sum(np.abs(a), axis=1))) + 1.0

    def det_at(lam):
        return float(np.linalg.det(a - lam * np.eye(n)))

    grid = np.linspace(-radius, radius, grid_points)
    vals = np.array([det_at(g) for g in grid])
    roots = []
    for i in range(grid_points - 1):
        lo, hi = grid[i], grid[i + 1]
        flo, fhi = vals[i], vals[i + 1]
        if flo == 0.0:
            roots.append(lo)
            continue
        if flo * fhi < 0:
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                fmid = det_at(mid)
                if fmid == 0.0:
                    lo = hi = mid
                elif flo * fmid < 0:
                    hi = mid
                else:
                    lo, flo = mid, fmid
            roots.append(0.5 * (lo + hi))
    return np.array(sorted(roots))


def charpoly_coeffs(a):
    """Monic characteristic polynomial coefficients [1, c1, ..., cn] by
    Faddeev-LeVerrier (trace recursion, no eigensolver)."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    coeffs = [1.0]
    m = np.zeros_like(a)
    for k in range(1, n + 1):
        m = a @ m + coeffs[-1] * np.eye(n)
        am = a @ m
        coeffs.append(-np.trace(am) / k)
    # note: the recursion above folds the identity shift in; coeffs[k] is the
    # coefficient of s^(n-k)
    return np.array(coeffs)


def hurwitz_by_routh(a, tol=1e-9):
    """Routh-array Hurwitz decision for the characteristic polynomial of a.

    Returns True/False, or None when a first-column entry is too close to
    zero to call (marginal case).
    """
    c = charpoly_coeffs(a)
    n = len(c) - 1
    if n == 0:
        return True
    rows = [c[0::2].astype(float), c[1::2].astype(float)]
    if rows[1].size == 0 or rows[1][0] == 0.0:
        rows[1] = np.array([0.0])
    width = rows[0].size
    rows[1] = np.pad(rows[1], (0, width - rows[1].size))
    table = [rows[0], rows[1]]
    for _ in range(n - 1):
        prev, last = table[-2], table[-1]
        if abs(last[0]) < tol * max(1.0, np.max(np.abs(last))):
            return None
        new = np.zeros(width)
        for j in range(width - 1):
            new[j] = (last[0] * prev[j + 1] - prev[0] * last[j + 1]) / last[0]
        table.append(new)
    first = np.array([row[0] for row in table[: n + 1]])
    scale = max(1.0, float(np.max(np.abs(first))))
    if np.any(np.abs(first) < tol * scale):
        return None
    return bool(np.all(first > 0))


def power_iteration_norm(e, iters=2000, seed=0):
    """Spectral norm by power iteration on E'E."""
    e = np.asarray(e, dtype=float)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(e.shape[1])
    v /= np.linalg.norm(v)
    g = e.T @ e
    lam = 0.0
    for _ in range(iters):
        w = g @ v
        lam = float(np.linalg.norm(w))
        if lam == 0.0:
            return 0.0
        v = w / lam
    return float(np.sqrt(lam))

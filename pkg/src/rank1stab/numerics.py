"""Self-contained dense linear algebra for desk-scale matrices (n <= ~50).

Symmetric eigenproblems use cyclic Jacobi; the general Hurwitz test solves
the Lyapunov equation A'P + PA = -I through its n^2 Kronecker form, which
avoids a nonsymmetric eigensolver entirely.  Real and complex solves are LU
with partial pivoting.  The rotation/elimination loops live in
``rank1stab._kernels`` (compiled, with a numpy fallback).
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import (
    DimensionMismatch,
    JacobiNoConvergence,
    NonFinite,
    NotSymmetric,
    Singular,
    SingularLyapunov,
)

# Default hybrid tolerances; individual routines override where stated.
TOL_ABS = 1e-10
TOL_REL = 1e-9

JACOBI_MAX_SWEEPS = 100
JACOBI_OFF_TOL = 1e-12  # times ||A||_F
SYMMETRY_TOL = 1e-12  # relative asymmetry allowed in sym_eig input
PIVOT_TOL = 1e-13  # times max |entry|, declares a solve singular


@dataclass(frozen=True)
class SymEig:
    """Eigendecomposition of a symmetric matrix, eigenvalues ascending."""

    values: np.ndarray
    vectors: np.ndarray  # orthonormal columns, A = Q diag(values) Q'


@dataclass(frozen=True)
class Svd:
    """Singular value decomposition S = U diag(sigma) V', sigma descending."""

    singular_values: np.ndarray
    u: np.ndarray
    v: np.ndarray


def as_matrix(a, name="matrix"):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFinite(f"{name} contains NaN/Inf")
    return a


def _require_square(a, name="matrix"):
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {a.shape}")


def sym_eig(a) -> SymEig:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi.

    Raises NotSymmetric if the relative asymmetry exceeds 1e-12, NonFinite on
    NaN/Inf.  Eigenvalues are returned ascending with matching eigenvector
    columns.
    """
    a = as_matrix(a)
    _require_square(a)
    n = a.shape[0]
    scale = np.max(np.abs(a)) if n else 0.0
    asym = np.max(np.abs(a - a.T)) if n else 0.0
    if asym > SYMMETRY_TOL * max(scale, 1e-300):
        raise NotSymmetric(f"asymmetry {asym:.3e} exceeds tolerance for scale {scale:.3e}")
    work = np.ascontiguousarray(0.5 * (a + a.T))
    vecs = np.eye(n)
    threshold = JACOBI_OFF_TOL * np.linalg.norm(work)
    sweeps = _kernels.jacobi_eig(work, vecs, threshold, JACOBI_MAX_SWEEPS)
    if sweeps < 0:
        raise JacobiNoConvergence(f"no convergence in {JACOBI_MAX_SWEEPS} sweeps (n={n})")
    vals = np.diagonal(work).copy()
    order = np.argsort(vals, kind="stable")
    return SymEig(values=vals[order], vectors=vecs[:, order])


def spectral_norm(e) -> float:
    """Largest singular value, computed as sqrt(lambda_max(E'E))."""
    e = as_matrix(e)
    if e.size == 0:
        return 0.0
    lam = sym_eig(e.T @ e).values[-1]
    return float(np.sqrt(max(lam, 0.0)))


def solve(a, b):
    """Real linear solve by LU with partial pivoting.

    Raises Singular when a pivot falls below 1e-13 times the largest entry.
    """
    a = as_matrix(a)
    _require_square(a)
    b = np.asarray(b, dtype=float)
    if b.shape[0] != a.shape[0]:
        raise DimensionMismatch(f"rhs length {b.shape[0]} != matrix size {a.shape[0]}")
    if not np.all(np.isfinite(b)):
        raise NonFinite("rhs contains NaN/Inf")
    lu = np.array(a, order="C", copy=True)
    piv = np.empty(a.shape[0], dtype=np.int64)
    tol = PIVOT_TOL * max(np.max(np.abs(a)), 1e-300)
    status = _kernels.lu_factor(lu, piv, tol)
    if status:
        raise Singular(f"pivot below threshold at elimination step {status - 1}")
    x = np.ascontiguousarray(b.copy())
    if x.ndim == 1:
        _kernels.lu_solve(lu, piv, x)
    else:
        for j in range(x.shape[1]):
            col = np.ascontiguousarray(x[:, j])
            _kernels.lu_solve(lu, piv, col)
            x[:, j] = col
    return x


def complex_solve(m, b):
    """Complex linear solve by LU with partial pivoting; residual is at the
    level of machine precision for well-conditioned systems."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"matrix must be square, got shape {m.shape}")
    b = np.asarray(b, dtype=complex)
    if b.shape != (m.shape[0],):
        raise DimensionMismatch(f"rhs shape {b.shape} incompatible with {m.shape}")
    if not (np.all(np.isfinite(m.real)) and np.all(np.isfinite(m.imag))):
        raise NonFinite("matrix contains NaN/Inf")
    if not (np.all(np.isfinite(b.real)) and np.all(np.isfinite(b.imag))):
        raise NonFinite("rhs contains NaN/Inf")
    lu = np.array(m, order="C", copy=True)
    piv = np.empty(m.shape[0], dtype=np.int64)
    tol = PIVOT_TOL * max(np.max(np.abs(m)), 1e-300)
    status = _kernels.zlu_factor(lu, piv, tol)
    if status:
        raise Singular(f"pivot below threshold at elimination step {status - 1}")
    x = np.ascontiguousarray(b.copy())
    _kernels.zlu_solve(lu, piv, x)
    return x


def is_hurwitz(a):
    """Hurwitz test via the Lyapunov equation A'P + PA = -I.

    The equation is vectorized into the n^2-dimensional Kronecker system
    (I (x) A' + A' (x) I) vec(P) = -vec(I) and solved by LU.  Returns
    ``(stable, P)`` where stable means the solution exists and P > 0.

    Raises SingularLyapunov when the Kronecker system is singular, i.e. some
    eigenvalue pair of A sums to zero (boundary case, not Hurwitz).
    """
    a = as_matrix(a)
    _require_square(a)
    n = a.shape[0]
    eye = np.eye(n)
    kron = np.kron(eye, a.T) + np.kron(a.T, eye)
    try:
        vec_p = solve(kron, -eye.flatten(order="F"))
    except Singular as exc:
        raise SingularLyapunov(
            "Lyapunov equation singular: eigenvalue pair sums to zero"
        ) from exc
    p = vec_p.reshape((n, n), order="F")
    p = 0.5 * (p + p.T)
    lam_min = sym_eig(p).values[0]
    stable = bool(lam_min > 1e-12 * max(1.0, np.max(np.abs(p))))
    return stable, p


def svd(s) -> Svd:
    """SVD of a square matrix built from sym_eig of S'S and SS'.

    Right singular vectors come from S'S; left ones are S v / sigma for
    nonzero sigma (sign-consistent by construction) and null-space
    eigenvectors of SS', orthogonalized, for the rest.
    """
    s = as_matrix(s)
    _require_square(s)
    n = s.shape[0]
    gram = sym_eig(s.T @ s)
    order = np.arange(n - 1, -1, -1)  # descending
    sig = np.sqrt(np.clip(gram.values[order], 0.0, None))
    v = gram.vectors[:, order]
    u = np.zeros((n, n))
    cutoff = max(sig[0], 0.0) * 1e-12
    left_null = None
    null_used = 0
    for i in range(n):
        if sig[i] > cutoff:
            u[:, i] = (s @ v[:, i]) / sig[i]
        else:
            sig[i] = 0.0
            if left_null is None:
                # eigenvectors of SS' for the smallest eigenvalues span the
                # left null space
                left_null = sym_eig(s @ s.T).vectors
            col = left_null[:, null_used]
            null_used += 1
            # orthogonalize against the columns already placed (twice, for
            # numerical hygiene)
            for _ in range(2):
                col = col - u[:, :i] @ (u[:, :i].T @ col)
            nrm = np.linalg.norm(col)
            if nrm < 1e-8 and null_used < n:
                col = left_null[:, null_used]
                null_used += 1
                for _ in range(2):
                    col = col - u[:, :i] @ (u[:, :i].T @ col)
                nrm = np.linalg.norm(col)
            u[:, i] = col / nrm
    return Svd(singular_values=sig, u=u, v=v)

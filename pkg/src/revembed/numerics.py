"""Dense real matrix kernel.

Small, dependency-light routines used by the embedding pipeline: a cyclic
Jacobi eigensolver for symmetric matrices, an LU solve that reports its
conditioning, a Taylor scaling-and-squaring matrix exponential, and Horner
evaluation of matrix polynomials.

All functions take array-likes, never modify their inputs and return fresh
arrays.
"""

import math
import warnings
from typing import NamedTuple

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .errors import NoConvergence, NotFinite, NotSquare, NotSymmetric, Singular

__all__ = [
    "as_matrix",
    "as_vector",
    "inf_norm",
    "symmetric_eigen",
    "LinearSolution",
    "solve_linear",
    "expm",
    "matrix_polynomial",
    "ILL_CONDITIONED",
]

#: condition estimates above this value get flagged on solve results
ILL_CONDITIONED = 1e12

JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100


def as_matrix(a, name="matrix"):
    """Return `a` as a finite, square float64 array (always a copy)."""
    m = np.array(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise NotSquare(f"{name} must be a non-empty square 2-d array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NotFinite(f"{name} contains NaN or Inf")
    return m


def as_vector(v, name="vector"):
    x = np.array(v, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"{name} must be 1-d, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NotFinite(f"{name} contains NaN or Inf")
    return x


def inf_norm(a):
    """Maximum absolute row sum (the induced infinity norm)."""
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        return float(np.max(np.abs(a))) if a.size else 0.0
    return float(np.max(np.sum(np.abs(a), axis=1)))


def symmetric_eigen(S, tol=1e-10):
    """Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    S : (n, n) array_like
        Symmetric matrix. It is symmetrized as ``(S + S.T) / 2`` once the
        asymmetry check passes.
    tol : float
        Relative symmetry tolerance: ``max|S_ij - S_ji| <= tol * max|S|``.

    Returns
    -------
    eigenvalues : (n,) ndarray
        Sorted in descending order.
    R : (n, n) ndarray
        Orthogonal matrix whose rows are the eigenvectors, so that
        ``R @ S @ R.T == diag(eigenvalues)``.

    Raises
    ------
    NotSymmetric
        If the asymmetry exceeds the tolerance.
    NoConvergence
        If the off-diagonal mass has not dropped below
        ``1e-13 * ||S||_F`` after 100 sweeps.
    """
    A = as_matrix(S, "S")
    n = A.shape[0]
    scale = float(np.max(np.abs(A)))
    asym = float(np.max(np.abs(A - A.T)))
    if asym > tol * scale:
        raise NotSymmetric(asym, tol * scale)
    A = 0.5 * (A + A.T)
    V = np.eye(n)

    fro = float(np.linalg.norm(A))
    threshold = JACOBI_TOL * fro
    upper = np.triu_indices(n, 1)
    for _ in range(JACOBI_MAX_SWEEPS + 1):
        # sum(A**2) - sum(diag**2) would cancel catastrophically near convergence
        off = math.sqrt(2.0) * float(np.linalg.norm(A[upper]))
        if off <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = A[:, p].copy()
                col_q = A[:, q]
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :]
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = A[q, p] = 0.0
                v_p = V[:, p].copy()
                v_q = V[:, q]
                V[:, p] = c * v_p - s * v_q
                V[:, q] = s * v_p + c * v_q
    else:
        raise NoConvergence(f"Jacobi iteration did not converge in {JACOBI_MAX_SWEEPS} sweeps")

    eigenvalues = np.diag(A).copy()
    order = np.argsort(-eigenvalues, kind="stable")
    return eigenvalues[order], V[:, order].T.copy()


class LinearSolution(NamedTuple):
    x: np.ndarray
    condition: float
    ill_conditioned: bool


def solve_linear(A, b):
    """Solve ``A x = b`` by LU with partial pivoting.

    Returns a `LinearSolution` carrying the solution, a LAPACK 1-norm
    condition estimate and a flag set when that estimate exceeds
    `ILL_CONDITIONED`. Raises `Singular` when a pivot falls below
    ``1e-14 * ||A||_inf``.
    """
    A = as_matrix(A, "A")
    b = as_vector(b, "b")
    n = A.shape[0]
    if b.shape[0] != n:
        raise ValueError(f"dimension mismatch: A is {n}x{n}, b has length {b.shape[0]}")
    norm_inf = inf_norm(A)
    if norm_inf == 0.0:
        raise Singular("zero matrix")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if np.min(pivots) < 1e-14 * norm_inf:
        k = int(np.argmin(pivots))
        raise Singular(f"pivot {k} is {pivots[k]:.3e}, below 1e-14 * ||A||_inf")
    x = scipy.linalg.lu_solve((lu, piv), b, check_finite=False)
    norm_1 = float(np.max(np.sum(np.abs(A), axis=0)))
    rcond, info = lapack.dgecon(lu, norm_1, norm="1")
    condition = math.inf if rcond == 0.0 else 1.0 / rcond
    return LinearSolution(x, condition, condition > ILL_CONDITIONED)


def expm(A):
    """Matrix exponential by scaling and squaring with a Taylor kernel.

    The matrix is divided by ``2**s`` with ``s = max(0, ceil(log2 ||A||_1))``,
    the Taylor series is summed until the next term is below machine
    epsilon relative to the partial sum, and the result is squared `s`
    times.
    """
    A = as_matrix(A, "A")
    n = A.shape[0]
    norm_1 = float(np.max(np.sum(np.abs(A), axis=0)))
    s = max(0, math.ceil(math.log2(norm_1))) if norm_1 > 0.0 else 0
    B = A / 2.0**s
    E = np.eye(n)
    term = np.eye(n)
    eps = np.finfo(float).eps
    for k in range(1, 64):
        term = term @ B / k
        E = E + term
        if np.max(np.abs(term)) <= eps * np.max(np.abs(E)):
            break
    for _ in range(s):
        E = E @ E
    return E


def matrix_polynomial(coeffs, P):
    """Evaluate ``sum_j coeffs[j] * P**j`` with Horner's scheme."""
    k = as_vector(coeffs, "coeffs")
    if k.size == 0:
        raise ValueError("need at least one coefficient")
    P = as_matrix(P, "P")
    identity = np.eye(P.shape[0])
    result = k[-1] * identity
    for c in k[-2::-1]:
        result = result @ P + c * identity
    return result

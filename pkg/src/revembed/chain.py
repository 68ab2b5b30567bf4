"""Validated stochastic and generator matrices and the chain-level checks
that precede any logarithm: irreducibility, the invariant distribution and
detailed balance.
"""

from collections import deque
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.csgraph

from .errors import NotGenerator, NotStochastic, Singular, WrongDimension
from .numerics import as_matrix, solve_linear

__all__ = [
    "DEFAULT_TOL",
    "StochasticMatrix",
    "GeneratorMatrix",
    "ProbabilityDistribution",
    "validate_stochastic",
    "validate_generator",
    "is_irreducible",
    "invariant_distribution",
    "is_reversible",
    "kolmogorov_triangle",
    "closed_classes",
    "restrict_to_largest_closed_class",
]

DEFAULT_TOL = 1e-9


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class StochasticMatrix:
    """Row-stochastic square matrix.

    ``clamped`` lists the ``(i, j, original_value)`` entries that were slightly
    negative and set to zero during validation.
    """

    matrix: np.ndarray
    clamped: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(self.matrix))

    @property
    def n(self):
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.array(self.matrix, dtype=dtype)


@dataclass(frozen=True, eq=False)
class GeneratorMatrix:
    """Transition-rate matrix: nonnegative off-diagonal, zero row sums."""

    matrix: np.ndarray
    clamped: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(self.matrix))

    @property
    def n(self):
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.array(self.matrix, dtype=dtype)

    def scaled(self, factor):
        return GeneratorMatrix(self.matrix * factor, self.clamped)


@dataclass(frozen=True, eq=False)
class ProbabilityDistribution:
    """Strictly positive probability vector."""

    probabilities: np.ndarray = field()

    def __post_init__(self):
        p = np.array(self.probabilities, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("distribution must be a non-empty 1-d vector")
        if not np.all(p > 0):
            raise ValueError(f"distribution has nonpositive components: {p}")
        total = p.sum()
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"distribution sums to {total!r}")
        object.__setattr__(self, "probabilities", _frozen(p))

    @property
    def n(self):
        return self.probabilities.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.array(self.probabilities, dtype=dtype)


def validate_stochastic(raw, tol=DEFAULT_TOL):
    """Check that `raw` is row stochastic and wrap it.

    Entries in ``[-tol, 0)`` are clamped to zero; every row that was clamped
    or whose sum is not exactly one is renormalized.

    Raises
    ------
    NotStochastic
        For the first entry below ``-tol`` or row sum off by more than `tol`.
    """
    P = as_matrix(raw, "P")
    n = P.shape[0]
    clamped = []
    for i in range(n):
        for j in range(n):
            if P[i, j] < -tol:
                raise NotStochastic(i, float(P[i, j]), col=j)
        row_sum = float(P[i].sum())
        if abs(row_sum - 1.0) > tol:
            raise NotStochastic(i, row_sum)
    for i, j in zip(*np.nonzero(P < 0)):
        clamped.append((int(i), int(j), float(P[i, j])))
        P[i, j] = 0.0
    sums = P.sum(axis=1)
    fix = sums != 1.0
    P[fix] /= sums[fix, None]
    return StochasticMatrix(P, tuple(clamped))


def validate_generator(raw, tol=DEFAULT_TOL):
    """Check that `raw` is a generator matrix and wrap it.

    Off-diagonal entries in ``[-tol, 0)`` are clamped to zero. The diagonal
    of any row that was clamped, or whose sum exceeds ``1e-10`` in absolute
    value, is reset to minus the off-diagonal sum.

    Raises
    ------
    NotGenerator
        ``NotGenerator(i, j, value)`` for a negative off-diagonal entry, or
        ``NotGenerator(i, None, row_sum)`` for a row-sum violation.
    """
    Q = as_matrix(raw, "Q")
    n = Q.shape[0]
    off = ~np.eye(n, dtype=bool)
    for i in range(n):
        for j in range(n):
            if i != j and Q[i, j] < -tol:
                raise NotGenerator(i, j, float(Q[i, j]))
        row_sum = float(Q[i].sum())
        if abs(row_sum) > tol:
            raise NotGenerator(i, None, row_sum)
    clamped = []
    for i, j in zip(*np.nonzero((Q < 0) & off)):
        clamped.append((int(i), int(j), float(Q[i, j])))
        Q[i, j] = 0.0
    rows = {i for i, _, _ in clamped}
    rows.update(int(i) for i in np.nonzero(np.abs(Q.sum(axis=1)) > 1e-10)[0])
    for i in rows:
        Q[i, i] = -(Q[i].sum() - Q[i, i])
    return GeneratorMatrix(Q, tuple(clamped))


def _reachable(adjacency, start):
    seen = np.zeros(adjacency.shape[0], dtype=bool)
    seen[start] = True
    queue = deque([start])
    while queue:
        i = queue.popleft()
        for j in np.nonzero(adjacency[i] & ~seen)[0]:
            seen[j] = True
            queue.append(int(j))
    return seen


def is_irreducible(P):
    """True iff the transition graph (edge i -> j when p_ij > 0) is strongly
    connected. Checked by forward and backward BFS from state 0."""
    A = np.asarray(P, dtype=float) > 0
    return bool(_reachable(A, 0).all() and _reachable(A.T, 0).all())


def closed_classes(P):
    """Closed communicating classes of `P`, each as a sorted index array."""
    A = np.asarray(P, dtype=float) > 0
    _, labels = scipy.sparse.csgraph.connected_components(A, directed=True, connection="strong")
    classes = []
    for label in np.unique(labels):
        members = np.nonzero(labels == label)[0]
        outside = np.ones(A.shape[0], dtype=bool)
        outside[members] = False
        if not A[np.ix_(members, outside)].any():
            classes.append(members)
    return classes


def restrict_to_largest_closed_class(P):
    """Restrict `P` to its largest closed communicating class.

    Returns the restricted `StochasticMatrix` (rows of a closed class already
    sum to one) and the kept original state indices. Ties go to the class
    containing the smallest state index.
    """
    P = np.asarray(P, dtype=float)
    classes = closed_classes(P)
    keep = max(classes, key=lambda c: (len(c), -c[0]))
    return validate_stochastic(P[np.ix_(keep, keep)]), keep


def invariant_distribution(P):
    """Unique invariant distribution of an irreducible stochastic matrix.

    Solves ``mu (P - I) = 0`` with the last equation replaced by
    ``sum(mu) = 1``.

    Raises
    ------
    Singular
        If the system is singular or the solution is not strictly positive,
        both of which mean `P` was not irreducible.
    """
    P = np.asarray(P, dtype=float)
    n = P.shape[0]
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    mu = solve_linear(A, b).x
    if not np.all(mu > 0):
        raise Singular(f"invariant distribution is not strictly positive: {mu}")
    return ProbabilityDistribution(mu / mu.sum())


def is_reversible(P, mu, tol=DEFAULT_TOL):
    """Detailed balance: ``|mu_i p_ij - mu_j p_ji| <= tol * max(mu_i p_ij)``."""
    P = np.asarray(P, dtype=float)
    mu = np.asarray(mu, dtype=float)
    flux = mu[:, None] * P
    return bool(np.max(np.abs(flux - flux.T)) <= tol * np.max(flux))


def kolmogorov_triangle(P, tol=DEFAULT_TOL):
    """Kolmogorov cycle criterion for a 3x3 chain: the clockwise and
    counter-clockwise products over the triangle 0 -> 1 -> 2 -> 0 agree."""
    P = np.asarray(P, dtype=float)
    if P.shape != (3, 3):
        raise WrongDimension(3, P.shape[0])
    forward = P[0, 1] * P[1, 2] * P[2, 0]
    backward = P[1, 0] * P[2, 1] * P[0, 2]
    return bool(abs(forward - backward) <= tol * max(forward, backward))

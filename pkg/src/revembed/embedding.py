"""Reversible embedding: candidate logarithm, verdict, closed forms.

A reversible stochastic matrix ``P`` with invariant distribution ``mu`` is
similar to the symmetric matrix ``S = M P M^-1`` with
``M = diag(sqrt(mu))``. Writing ``R S R^T = D`` for an orthogonal ``R``, the
only reversible generator that can exponentiate to ``P`` is

    H = M^-1 R^T log(D) R M,

and ``P`` is reversibly embeddable exactly when its spectrum is positive and
every off-diagonal entry of ``H`` is nonnegative. The same matrix is also
the polynomial ``k_0 I + k_1 P + ... + k_{m-1} P^{m-1}`` whose coefficients
interpolate ``log`` at the distinct eigenvalues; that route is evaluated as
an independent cross-check.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .chain import (
    DEFAULT_TOL,
    GeneratorMatrix,
    ProbabilityDistribution,
    StochasticMatrix,
    invariant_distribution,
    is_irreducible,
    is_reversible,
    kolmogorov_triangle,
    validate_generator,
    validate_stochastic,
)
from .errors import Singular, WrongDimension
from .numerics import expm, inf_norm, matrix_polynomial, solve_linear, symmetric_eigen

__all__ = [
    "Verdict",
    "SpectralData",
    "LogCoefficients",
    "EmbeddingReport",
    "cluster_eigenvalues",
    "spectral_decompose",
    "check_positive_spectrum",
    "log_coefficients",
    "candidate_spectral",
    "candidate_polynomial",
    "reversible_embedding",
    "kendall_2x2",
    "criterion_3x3",
    "EIGENVALUE_THRESHOLD",
    "CROSSCHECK_MAX_CONDITION",
]

#: eigenvalues at or below this are treated as nonpositive
EIGENVALUE_THRESHOLD = 1e-12
#: skip the polynomial cross-check when the Vandermonde system is worse than this
CROSSCHECK_MAX_CONDITION = 1e10
#: relative clustering tolerance for distinct eigenvalues
CLUSTER_RTOL = 1e-8
#: gaps up to this multiple of cluster_tol trigger the alternate-clustering check
NEAR_CLUSTER_FACTOR = 1e4
#: the 3x3 closed form takes a square root of the discriminant, so coincidence
#: has to be judged far more loosely than cluster_tol
COINCIDENT_TOL_3X3 = 1e-6


class Verdict(str, Enum):
    EMBEDDABLE = "Embeddable"
    NOT_IRREDUCIBLE = "NotIrreducible"
    NOT_REVERSIBLE = "NotReversible"
    NONPOSITIVE_EIGENVALUE = "NonpositiveEigenvalue"
    NEGATIVE_OFF_DIAGONAL = "NegativeOffDiagonal"

    def __str__(self):
        return self.value


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Symmetrization of a reversible ``P`` and its eigenstructure.

    ``lambdas`` are sorted descending; ``gammas`` are the cluster means of
    the distinct eigenvalues and ``multiplicities`` their cluster sizes.
    """

    sqrt_mu: np.ndarray
    S: np.ndarray
    R: np.ndarray
    lambdas: np.ndarray
    gammas: np.ndarray
    multiplicities: tuple
    cluster_tol: float

    def __post_init__(self):
        for name in ("sqrt_mu", "S", "R", "lambdas", "gammas"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def n(self):
        return self.lambdas.shape[0]

    @property
    def m(self):
        return self.gammas.shape[0]

    @property
    def M(self):
        return np.diag(self.sqrt_mu)

    @property
    def T(self):
        """Similarity transform with ``P = T D T^-1``."""
        return self.R.T / self.sqrt_mu[:, None]

    @property
    def T_inv(self):
        return self.R * self.sqrt_mu[None, :]

    @property
    def log_d(self):
        if np.any(self.lambdas <= 0):
            raise ValueError("log D is undefined for a nonpositive spectrum")
        return np.log(self.lambdas)


@dataclass(frozen=True, eq=False)
class LogCoefficients:
    k: np.ndarray
    condition_estimate: float

    def __post_init__(self):
        object.__setattr__(self, "k", _frozen(self.k))

    @property
    def m(self):
        return self.k.shape[0]


@dataclass(frozen=True, eq=False)
class EmbeddingReport:
    """Outcome of an embeddability decision.

    ``generator`` is present exactly when the verdict is ``Embeddable``;
    ``candidate`` holds the raw logarithm whenever one was built.
    ``failing_entries`` and ``marginal_entries`` are ``(i, j, value)``
    triples with 0-based indices.
    """

    verdict: Verdict
    n: int
    generator: Optional[GeneratorMatrix] = None
    mu: Optional[ProbabilityDistribution] = None
    eigenvalues: Optional[np.ndarray] = None
    spectral: Optional[SpectralData] = None
    coefficients: Optional[LogCoefficients] = None
    candidate: Optional[np.ndarray] = None
    failing_entries: tuple = ()
    marginal_entries: tuple = ()
    residual_expm: Optional[float] = None
    crosscheck_gap: Optional[float] = None
    reasons: tuple = ()
    warnings: tuple = ()
    alternate_verdicts: tuple = ()
    method: str = "spectral"
    interval: float = 1.0
    state_map: Optional[tuple] = None
    extra: dict = field(default_factory=dict)

    @property
    def embeddable(self):
        return self.verdict is Verdict.EMBEDDABLE


def cluster_eigenvalues(lambdas, cluster_tol):
    """Group descending eigenvalues whose neighbours differ by at most
    `cluster_tol`. Returns ``(gammas, multiplicities)``."""
    lambdas = np.asarray(lambdas, dtype=float)
    groups = [[lambdas[0]]]
    for prev, lam in zip(lambdas[:-1], lambdas[1:]):
        if prev - lam <= cluster_tol:
            groups[-1].append(lam)
        else:
            groups.append([lam])
    gammas = np.array([np.mean(g) for g in groups])
    return gammas, tuple(len(g) for g in groups)


def spectral_decompose(P, mu, cluster_tol=None, sym_tol=1e-6):
    """Symmetrize a reversible `P` and diagonalize it.

    Parameters
    ----------
    P : StochasticMatrix or array_like
    mu : ProbabilityDistribution or array_like
        Reversible distribution of `P`.
    cluster_tol : float, optional
        Eigenvalues within this distance are merged. Defaults to
        ``1e-8 * max|lambda|``.
    sym_tol : float
        Relative symmetry tolerance handed to the eigensolver. Failure means
        `P` was not reversible with respect to `mu`.
    """
    P = np.asarray(P, dtype=float)
    sqrt_mu = np.sqrt(np.asarray(mu, dtype=float))
    S = sqrt_mu[:, None] * P / sqrt_mu[None, :]
    lambdas, R = symmetric_eigen(S, tol=sym_tol)
    if cluster_tol is None:
        cluster_tol = CLUSTER_RTOL * float(np.max(np.abs(lambdas)))
    gammas, mult = cluster_eigenvalues(lambdas, cluster_tol)
    return SpectralData(sqrt_mu, 0.5 * (S + S.T), R, lambdas, gammas, mult, cluster_tol)


def check_positive_spectrum(spec, tol=EIGENVALUE_THRESHOLD):
    lambdas = spec.lambdas if isinstance(spec, SpectralData) else np.asarray(spec, dtype=float)
    return bool(np.all(lambdas > tol))


def log_coefficients(gammas):
    """Coefficients of the polynomial interpolating ``log`` at `gammas`.

    Solves the Vandermonde system ``sum_j k_j gamma_i**j = log(gamma_i)``.
    Its determinant is the product of the pairwise differences, so it is
    nonsingular for distinct nodes, but it becomes badly conditioned when
    nodes cluster; the condition estimate is returned with the coefficients.
    """
    g = np.asarray(gammas, dtype=float)
    if g.ndim != 1 or g.size == 0:
        raise ValueError("need at least one eigenvalue")
    if np.any(g <= 0):
        raise ValueError(f"eigenvalues must be positive, got {g}")
    if np.unique(g).size != g.size:
        raise Singular("eigenvalues are not distinct")
    V = np.vander(g, increasing=True)
    sol = solve_linear(V, np.log(g))
    return LogCoefficients(sol.x, sol.condition)


def candidate_spectral(spec):
    """``H = M^-1 R^T log(D) R M`` from the symmetrized eigenstructure."""
    R = spec.R
    A = R.T @ (spec.log_d[:, None] * R)
    A = 0.5 * (A + A.T)
    return A * (spec.sqrt_mu[None, :] / spec.sqrt_mu[:, None])


def candidate_polynomial(P, k):
    coeffs = k.k if isinstance(k, LogCoefficients) else k
    return matrix_polynomial(coeffs, np.asarray(P, dtype=float))


def _offdiagonal_split(H, tol):
    """Classify negative off-diagonal entries of `H` as marginal (inside the
    ``tol * ||H||_inf`` band) or failing. Returns the clamped copy too."""
    n = H.shape[0]
    band = tol * inf_norm(H)
    failing, marginal = [], []
    clamped = H.copy()
    for i in range(n):
        for j in range(n):
            if i == j or H[i, j] >= 0:
                continue
            entry = (i, j, float(H[i, j]))
            if H[i, j] < -band:
                failing.append(entry)
            else:
                marginal.append(entry)
                clamped[i, j] = 0.0
    return tuple(failing), tuple(marginal), clamped


def _polynomial_offdiagonal_verdict(P, spec, cluster_tol, tol):
    gammas, _ = cluster_eigenvalues(spec.lambdas, cluster_tol)
    k = log_coefficients(gammas)
    Hp = candidate_polynomial(P, k)
    failing, _, _ = _offdiagonal_split(Hp, tol)
    verdict = Verdict.NEGATIVE_OFF_DIAGONAL if failing else Verdict.EMBEDDABLE
    return verdict, k


def _as_stochastic(P, tol):
    return P if isinstance(P, StochasticMatrix) else validate_stochastic(P, tol)


def reversible_embedding(P, tol=DEFAULT_TOL, cluster_tol=None):
    """Decide whether `P` has a reversible generator and compute it.

    Checks run in a fixed order and the first failure is reported:
    irreducibility, detailed balance, positivity of the spectrum,
    nonnegativity of the off-diagonal entries of the candidate logarithm.

    Parameters
    ----------
    P : StochasticMatrix or array_like
    tol : float
        Validation, detailed-balance and off-diagonal band tolerance.
    cluster_tol : float, optional
        Eigenvalue clustering distance for the polynomial cross-check.

    Returns
    -------
    EmbeddingReport
    """
    P = _as_stochastic(P, tol)
    n = P.n
    Pm = P.matrix
    if not is_irreducible(Pm):
        return EmbeddingReport(
            Verdict.NOT_IRREDUCIBLE, n,
            reasons=("transition graph is not strongly connected",),
        )
    mu = invariant_distribution(Pm)
    if not is_reversible(Pm, mu, tol):
        flux = mu.probabilities[:, None] * Pm
        worst = float(np.max(np.abs(flux - flux.T)))
        return EmbeddingReport(
            Verdict.NOT_REVERSIBLE, n, mu=mu,
            reasons=(f"detailed balance fails: max |mu_i p_ij - mu_j p_ji| = {worst:.3e}",),
        )
    spec = spectral_decompose(Pm, mu, cluster_tol)
    if not check_positive_spectrum(spec):
        bad = float(np.min(spec.lambdas))
        return EmbeddingReport(
            Verdict.NONPOSITIVE_EIGENVALUE, n, mu=mu, eigenvalues=spec.lambdas, spectral=spec,
            reasons=(f"smallest eigenvalue {bad:.17g} is not positive",),
        )

    H = candidate_spectral(spec)
    warnings = []
    coefficients = None
    crosscheck_gap = None
    try:
        coefficients = log_coefficients(spec.gammas)
    except Singular as exc:
        warnings.append(f"polynomial cross-check skipped: {exc}")
    if coefficients is not None:
        if coefficients.condition_estimate > CROSSCHECK_MAX_CONDITION:
            warnings.append(
                f"polynomial cross-check skipped: Vandermonde condition estimate "
                f"{coefficients.condition_estimate:.3e} exceeds {CROSSCHECK_MAX_CONDITION:.0e}"
            )
        else:
            crosscheck_gap = inf_norm(H - candidate_polynomial(Pm, coefficients))

    alternates = _alternate_clusterings(Pm, spec, tol)
    if alternates:
        warnings.append(
            "near-coincident eigenvalues: polynomial criterion depends on clustering: "
            + "; ".join(f"cluster_tol={c:.3e} -> {v.value}" for c, v in alternates)
        )

    failing, marginal, clamped = _offdiagonal_split(H, tol)
    if marginal:
        warnings.append(f"{len(marginal)} marginal off-diagonal entries clamped to zero")
    residual = inf_norm(expm(H) - Pm)
    common = dict(
        mu=mu, eigenvalues=spec.lambdas, spectral=spec, coefficients=coefficients, candidate=H,
        marginal_entries=marginal, residual_expm=residual, crosscheck_gap=crosscheck_gap,
        warnings=tuple(warnings), alternate_verdicts=tuple(alternates),
    )
    if failing:
        worst = min(failing, key=lambda e: e[2])
        return EmbeddingReport(
            Verdict.NEGATIVE_OFF_DIAGONAL, n, failing_entries=failing,
            reasons=(f"{len(failing)} negative off-diagonal entries in the candidate logarithm; "
                     f"most negative H[{worst[0]}, {worst[1]}] = {worst[2]:.17g}",),
            **common,
        )
    return EmbeddingReport(
        Verdict.EMBEDDABLE, n, generator=validate_generator(clamped, tol),
        reasons=("reversible, positive spectrum, nonnegative off-diagonal rates",),
        **common,
    )


def _alternate_clusterings(P, spec, tol):
    """Polynomial-route verdicts under the default clustering and under a
    coarser one that merges near-coincident eigenvalues, reported only when
    they disagree."""
    gaps = -np.diff(spec.lambdas)
    near = gaps[(gaps > spec.cluster_tol) & (gaps <= NEAR_CLUSTER_FACTOR * spec.cluster_tol)]
    if near.size == 0:
        return []
    results = []
    for ctol in (spec.cluster_tol, float(np.max(near))):
        try:
            verdict, _ = _polynomial_offdiagonal_verdict(P, spec, ctol, tol)
        except Singular:
            continue
        results.append((ctol, verdict))
    if len({v for _, v in results}) <= 1:
        return []
    return results


def _closed_form_report(P, H, eigenvalues, mu, tol, method, coefficients, extra=None):
    failing, marginal, clamped = _offdiagonal_split(H, tol)
    common = dict(
        mu=mu, eigenvalues=np.asarray(eigenvalues), candidate=H, coefficients=coefficients,
        marginal_entries=marginal, residual_expm=inf_norm(expm(H) - P), method=method,
        extra=extra or {},
    )
    if failing:
        return EmbeddingReport(
            Verdict.NEGATIVE_OFF_DIAGONAL, P.shape[0], failing_entries=failing,
            reasons=(f"{len(failing)} negative off-diagonal entries",), **common,
        )
    return EmbeddingReport(
        Verdict.EMBEDDABLE, P.shape[0], generator=validate_generator(clamped, tol),
        reasons=(f"{method} criterion holds",), **common,
    )


def kendall_2x2(P, tol=DEFAULT_TOL):
    """Closed-form decision for two states: embeddable iff ``tr(P) > 1``,
    with generator ``k_1 (P - I)``, ``k_1 = log(p+q-1) / (p+q-2)``."""
    P = _as_stochastic(P, tol)
    if P.n != 2:
        raise WrongDimension(2, P.n)
    Pm = P.matrix
    if not is_irreducible(Pm):
        return EmbeddingReport(Verdict.NOT_IRREDUCIBLE, 2, method="kendall",
                               reasons=("a state is absorbing",))
    p, q = Pm[0, 0], Pm[1, 1]
    lam = p + q - 1.0
    mu = ProbabilityDistribution(np.array([1.0 - q, 1.0 - p]) / (2.0 - p - q))
    eigenvalues = np.array([1.0, lam])
    if lam <= EIGENVALUE_THRESHOLD:
        return EmbeddingReport(
            Verdict.NONPOSITIVE_EIGENVALUE, 2, mu=mu, eigenvalues=eigenvalues, method="kendall",
            reasons=(f"tr(P) = {p + q:.17g} is not greater than 1",),
        )
    k1 = math.log(lam) / (lam - 1.0)
    H = k1 * (Pm - np.eye(2))
    return _closed_form_report(Pm, H, eigenvalues, mu, tol, "kendall",
                               LogCoefficients([-k1, k1], math.nan))


def _subdominant_pair(P):
    """The two non-Perron eigenvalues ``lam >= eta`` of a 3x3 stochastic
    matrix, from ``lam + eta = tr(P) - 1`` and ``lam * eta = det(P)``."""
    b = float(np.trace(P)) - 1.0
    c = float(np.linalg.det(P))
    disc = max(b * b - 4.0 * c, 0.0)
    root = math.sqrt(disc)
    if b >= 0:
        lam = 0.5 * (b + root)
        eta = c / lam if lam != 0.0 else 0.0
    else:
        eta = 0.5 * (b - root)
        lam = c / eta
    return max(lam, eta), min(lam, eta)


def criterion_3x3(P, tol=DEFAULT_TOL, coincident_tol=COINCIDENT_TOL_3X3):
    """Closed-form decision for three states.

    Reversibility is checked with the Kolmogorov triangle, the subdominant
    eigenvalues ``lam, eta`` come from the trace and determinant. With
    ``lam == eta`` (within `coincident_tol`) reversibility and ``lam > 0``
    suffice; otherwise ``k_1 p_ij + k_2 p_ij^(2) >= 0`` must hold for
    ``i != j`` with explicit ``k_1, k_2``.
    """
    P = _as_stochastic(P, tol)
    if P.n != 3:
        raise WrongDimension(3, P.n)
    Pm = P.matrix
    if not is_irreducible(Pm):
        return EmbeddingReport(Verdict.NOT_IRREDUCIBLE, 3, method="3x3",
                               reasons=("transition graph is not strongly connected",))
    mu = invariant_distribution(Pm)
    if not kolmogorov_triangle(Pm, tol):
        return EmbeddingReport(Verdict.NOT_REVERSIBLE, 3, mu=mu, method="3x3",
                               reasons=("p01 p12 p20 != p10 p21 p02",))
    lam, eta = _subdominant_pair(Pm)
    eigenvalues = np.array([1.0, lam, eta])
    if eta <= EIGENVALUE_THRESHOLD:
        return EmbeddingReport(
            Verdict.NONPOSITIVE_EIGENVALUE, 3, mu=mu, eigenvalues=eigenvalues, method="3x3",
            reasons=(f"eigenvalue {eta:.17g} is not positive",),
        )
    I = np.eye(3)
    if lam - eta <= coincident_tol:
        k1 = math.log(lam) / (lam - 1.0)
        H = k1 * (Pm - I)
        return _closed_form_report(Pm, H, eigenvalues, mu, tol, "3x3-coincident",
                                   LogCoefficients([-k1, k1], math.nan))
    denom = (lam - 1.0) * (eta - 1.0) * (eta - lam)
    k1 = ((eta**2 - 1.0) * math.log(lam) - (lam**2 - 1.0) * math.log(eta)) / denom
    k2 = ((lam - 1.0) * math.log(eta) - (eta - 1.0) * math.log(lam)) / denom
    P2 = Pm @ Pm
    H = -(k1 + k2) * I + k1 * Pm + k2 * P2
    return _closed_form_report(Pm, H, eigenvalues, mu, tol, "3x3-distinct",
                               LogCoefficients([-(k1 + k2), k1, k2], math.nan),
                               extra={"k1": k1, "k2": k2})

"""Dense complex matrix substrate: products, traces, norms, spectra, nilpotency.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; :func:`as_matrix`
validates and converts. Nothing here mutates its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.optimize import brentq

from ._schur import spectral_clusters
from .errors import AmbiguousVerdict, DimensionMismatch, NumericalFailure

EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical tolerances shared by every operation.

    rank_tol
        Singular values below ``rank_tol`` times the reference scale count
        as zero.
    cluster_tol
        Eigenvalues closer than ``cluster_tol * (1 + ||A||)`` are grouped.
    residual_tol
        Pass threshold for identity and certificate residuals.
    """

    rank_tol: float = 1e-10
    cluster_tol: float = 1e-8
    residual_tol: float = 1e-8

    def __post_init__(self):
        for name in ("rank_tol", "cluster_tol", "residual_tol"):
            v = getattr(self, name)
            if not (v >= 0 and np.isfinite(v)):
                raise ValueError(f"{name} must be a nonnegative finite number, got {v!r}")

    @property
    def kappa_cap(self) -> float:
        """Largest spectral projector norm accepted before clusters merge."""
        return 1.0 / np.sqrt(max(self.rank_tol, EPS))


DEFAULT = ToleranceConfig()


def as_matrix(A) -> np.ndarray:
    """Return ``A`` as a square complex128 array, rejecting NaN/Inf."""
    M = np.asarray(A, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise DimensionMismatch(f"expected a nonempty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def _same_dim(*mats) -> int:
    dims = {m.shape[0] for m in mats}
    if len(dims) != 1:
        raise DimensionMismatch(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def matrix_unit(n: int, i: int, j: int) -> np.ndarray:
    """The matrix unit E_ij of size n (1-based indices)."""
    E = np.zeros((n, n), dtype=complex)
    E[i - 1, j - 1] = 1.0
    return E


def anticommutator(A, B) -> np.ndarray:
    """{A, B} = AB + BA."""
    A, B = as_matrix(A), as_matrix(B)
    _same_dim(A, B)
    return A @ B + B @ A


def commutator(A, B) -> np.ndarray:
    """[A, B] = AB - BA."""
    A, B = as_matrix(A), as_matrix(B)
    _same_dim(A, B)
    return A @ B - B @ A


def trace(A) -> complex:
    return complex(np.trace(as_matrix(A)))


def singular_values(A) -> np.ndarray:
    return np.linalg.svd(as_matrix(A), compute_uv=False)


def schatten_norm(A, p: float = 1.0) -> float:
    """l_p norm of the singular values; p = inf gives the operator norm."""
    if not (p >= 1):
        raise ValueError(f"Schatten index must be >= 1, got {p!r}")
    s = singular_values(A)
    if np.isinf(p):
        return float(s[0])
    if p == 1:
        return float(s.sum())
    if p == 2:
        return float(np.sqrt((s * s).sum()))
    return float((s ** p).sum() ** (1.0 / p))


def opnorm(A) -> float:
    return schatten_norm(A, np.inf)


def spectrum(A) -> np.ndarray:
    """Eigenvalues with multiplicity, sorted by real then imaginary part."""
    A = as_matrix(A)
    try:
        w = sla.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigensolver did not converge: {exc}") from exc
    return w[np.lexsort((w.imag, w.real))]


def nilpotency_residual(A) -> float:
    """||(A / (1 + ||A||))^n||, zero exactly for nilpotent A."""
    A = as_matrix(A)
    s = 1.0 + opnorm(A)
    return opnorm(np.linalg.matrix_power(A / s, A.shape[0]))


def spectral_radius_estimate(A, cfg: ToleranceConfig = DEFAULT) -> float:
    """Largest modulus among eigenvalue cluster centers.

    Cluster centers are means over clusters and stay accurate for defective
    eigenvalues, unlike the raw computed eigenvalues.
    """
    A = as_matrix(A)
    radius = cfg.cluster_tol * (1.0 + opnorm(A))
    cl = spectral_clusters(A, radius, cfg.kappa_cap, check_separation=False)
    return max(abs(c.center) for c in cl)


def nilpotent_eigenvalue_bound(A, cfg: ToleranceConfig = DEFAULT) -> float:
    """Radius that contains every computed eigenvalue of A if A is nilpotent.

    For nilpotent A the resolvent is the finite sum of A^k / z^(k+1), so an
    eigenvalue z of a perturbation A + E with ||E|| <= delta satisfies
    delta * sum_k ||A^k|| / |z|^(k+1) >= 1. The returned radius solves this
    with equality for delta = ``cluster_tol * (1 + ||A||)``, which dominates
    the backward error of any stable eigensolver. For diagonalizable A the
    radius is about delta; for a size-m Jordan block it grows like
    delta^(1/m), which is how far roundoff really scatters such eigenvalues.
    """
    A = as_matrix(A)
    n = A.shape[0]
    s = 1.0 + opnorm(A)
    B = A / s
    norms = [1.0]
    P = np.eye(n, dtype=complex)
    for _ in range(n - 1):
        P = P @ B
        norms.append(opnorm(P))
    c = np.array(norms)
    k = np.arange(1, n + 1)
    delta = cfg.cluster_tol

    def excess(logr):
        return np.log(delta) + np.log(np.sum(c * np.exp(-k * logr)))

    # excess is decreasing in log r; it is >= 0 at r = delta and < 0 at r = 2
    lo, hi = np.log(delta), np.log(2.0)
    if excess(lo) < 0:
        return float(delta * s)
    return float(np.exp(brentq(excess, lo, hi, xtol=1e-12)) * s)


def is_nilpotent(A, cfg: ToleranceConfig = DEFAULT) -> bool:
    """Decide nilpotency by two independent tests that must agree.

    The eigenvalue test asks every computed eigenvalue to lie within
    :func:`nilpotent_eigenvalue_bound`; the power test asks
    ``||A^n|| <= residual_tol * (1 + ||A||)^n``. Raises
    :class:`AmbiguousVerdict` when they disagree.
    """
    A = as_matrix(A)
    eig = float(np.abs(spectrum(A)).max()) <= nilpotent_eigenvalue_bound(A, cfg)
    power = nilpotency_residual(A) <= cfg.residual_tol
    if eig != power:
        raise AmbiguousVerdict(
            f"nilpotency tests disagree (eigenvalues={eig}, power={power}); "
            "adjust tolerances")
    return eig


def matrix_to_json(A) -> dict:
    A = as_matrix(A)
    return {"dim": A.shape[0],
            "entries": [[[float(z.real), float(z.imag)] for z in row] for row in A]}


def matrix_from_json(obj) -> np.ndarray:
    try:
        n = int(obj["dim"])
        E = np.asarray(obj["entries"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix object: {exc}") from exc
    if E.shape != (n, n, 2):
        raise ValueError(f"matrix entries have shape {E.shape}, expected {(n, n, 2)}")
    return as_matrix(E[..., 0] + 1j * E[..., 1])

"""Riesz projections of A and of ad(A), and the spectral manifolds of ad(A).

Vectorization is column-stacking throughout: vec(AXB) = (B^T kron A) vec(X),
so ad(A) = I kron A - A^T kron I and the map X -> P X Q has matrix
Q^T kron P.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._schur import spectral_clusters
from .core import DEFAULT, ToleranceConfig, as_matrix, matrix_to_json, opnorm
from .errors import NotInSpectrum
from .subspace import MatrixSpace, orthonormal_range, unvec


@dataclass(frozen=True, eq=False)
class SpectralCluster:
    lam: complex
    multiplicity: int
    projection: np.ndarray = field(repr=False)
    spread: float = 0.0     # largest distance from a computed eigenvalue to lam


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    matrix_dim: int
    clusters: tuple
    radius: float = 0.0     # clustering radius that was used

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([c.lam for c in self.clusters])

    def projection(self, lam: complex) -> np.ndarray:
        return self.find(lam).projection

    def find(self, lam: complex) -> SpectralCluster:
        """The cluster whose eigenvalues lie within the clustering radius of ``lam``."""
        lam = complex(lam)
        best = min(self.clusters, key=lambda c: abs(c.lam - lam))
        if abs(best.lam - lam) > self.radius + best.spread:
            raise NotInSpectrum(f"{lam} is not within {self.radius:.3g} of the spectrum")
        return best

    def residuals(self, A=None) -> dict:
        """Deviation from a resolution of the identity, relative to projector size."""
        n = self.matrix_dim
        Ps = [c.projection for c in self.clusters]
        big = max(1.0, max(opnorm(P) for P in Ps))
        out = {"sum": opnorm(sum(Ps) - np.eye(n)) / big,
               "idempotent": max(opnorm(P @ P - P) for P in Ps) / big ** 2,
               "annihilate": max((opnorm(P @ Q) for i, P in enumerate(Ps)
                                  for j, Q in enumerate(Ps) if i != j), default=0.0) / big ** 2,
               "multiplicity": abs(sum(c.multiplicity for c in self.clusters) - n)}
        if A is not None:
            A = as_matrix(A)
            out["commute"] = max(opnorm(A @ P - P @ A) for P in Ps) / (big * (1 + opnorm(A)))
        return out

    def to_json(self) -> list:
        return [{"lambda": [c.lam.real, c.lam.imag], "multiplicity": c.multiplicity,
                 "projection": matrix_to_json(c.projection)} for c in self.clusters]


def riesz_decomposition(A, cfg: ToleranceConfig = DEFAULT) -> SpectralDecomposition:
    """Cluster the spectrum of A and attach the Riesz projection of each cluster.

    Clusters are grouped at radius ``cluster_tol * (1 + ||A||)``; clusters
    closer than twice that raise :class:`ClusterAmbiguity`.
    """
    A = as_matrix(A)
    radius = cfg.cluster_tol * (1.0 + opnorm(A))
    clusters = tuple(SpectralCluster(c.center, len(c.members), c.projection, c.spread)
                     for c in spectral_clusters(A, radius, cfg.kappa_cap))
    return SpectralDecomposition(A.shape[0], clusters, radius)


def ad_matrix(A) -> np.ndarray:
    """n^2 x n^2 matrix of X -> AX - XA under column-stacking."""
    A = as_matrix(A)
    I = np.eye(A.shape[0])
    return np.kron(I, A) - np.kron(A.T, I)


def ad_decomposition(A, cfg: ToleranceConfig = DEFAULT) -> SpectralDecomposition:
    """Riesz decomposition of ad(A), computed once for all spectral points."""
    return riesz_decomposition(ad_matrix(A), cfg)


def ad_riesz(A, lam: complex, cfg: ToleranceConfig = DEFAULT) -> np.ndarray:
    """Riesz projection of ad(A) at the cluster containing ``lam``."""
    return ad_decomposition(A, cfg).projection(lam)


def left_right(P, Q) -> np.ndarray:
    """Matrix of X -> P X Q under column-stacking."""
    return np.kron(np.asarray(Q).T, np.asarray(P))


def adproj_formula(A, lam: complex, cfg: ToleranceConfig = DEFAULT,
                   decomposition: SpectralDecomposition | None = None) -> np.ndarray:
    """Sum of X -> P_a X P_b over cluster pairs with a - b within tolerance of lam.

    The tolerance is the clustering radius used for ad(A), so pairs are
    grouped exactly as ad(A)'s eigenvalues would be.
    """
    A = as_matrix(A)
    D = decomposition if decomposition is not None else riesz_decomposition(A, cfg)
    n = A.shape[0]
    tol = cfg.cluster_tol * (1.0 + opnorm(ad_matrix(A)))
    out = np.zeros((n * n, n * n), dtype=complex)
    for a in D.clusters:
        for b in D.clusters:
            if abs(a.lam - b.lam - lam) <= tol:
                out += left_right(a.projection, b.projection)
    return out


def spectral_manifold(A, lam: complex, cfg: ToleranceConfig = DEFAULT,
                      decomposition: SpectralDecomposition | None = None) -> MatrixSpace:
    """Generalized eigenspace of ad(A) at lam, as a space of matrices.

    Pass ``decomposition = ad_decomposition(A)`` to reuse it across many lam.
    """
    A = as_matrix(A)
    n = A.shape[0]
    D = decomposition if decomposition is not None else ad_decomposition(A, cfg)
    P = D.projection(lam)
    B = orthonormal_range(P, cfg.rank_tol)
    return MatrixSpace(n, np.array([unvec(b, n) for b in B.T]).reshape(-1, n, n))


def adproj_threshold(n: int, cfg: ToleranceConfig = DEFAULT) -> float:
    """Allowed operator-norm gap between ad_riesz and adproj_formula: 10 residual_tol n^2.

    Projectors of defective ad(A) clusters carry errors far above roundoff
    (they are conditioned like the Jordan structure), so the gap is judged
    on a scale that grows with the n^2 x n^2 operator size.
    """
    return 10.0 * cfg.residual_tol * n * n


def adproj_gap(A, cfg: ToleranceConfig = DEFAULT) -> list:
    """(lambda, ||ad_riesz - adproj_formula||) for every cluster of ad(A)."""
    A = as_matrix(A)
    Dad = ad_decomposition(A, cfg)
    DA = riesz_decomposition(A, cfg)
    return [(c.lam, opnorm(c.projection - adproj_formula(A, c.lam, cfg, DA)))
            for c in Dad.clusters]

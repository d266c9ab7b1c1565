"""Subspaces of C^n and spans of matrices, kept as orthonormal bases.

Rank is decided once per batch from singular values. The basis returned
inside that range follows the insertion order of the inputs, so the same
inputs always give the same basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import DEFAULT, EPS, ToleranceConfig, as_matrix, opnorm
from .errors import DimensionMismatch, InvarianceViolation


@dataclass(frozen=True, eq=False)
class Subspace:
    """Subspace of C^n given by an orthonormal column basis (n x k)."""

    ambient_dim: int
    basis: np.ndarray = field(repr=False)

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=complex).reshape(self.ambient_dim, -1)
        object.__setattr__(self, "basis", B)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(n, np.zeros((n, 0), dtype=complex))

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(n, np.eye(n, dtype=complex))

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def to_json(self) -> dict:
        return {"ambient_dim": self.ambient_dim,
                "basis": [[[float(z.real), float(z.imag)] for z in col] for col in self.basis.T]}

    @classmethod
    def from_json(cls, obj) -> "Subspace":
        n = int(obj["ambient_dim"])
        cols = np.asarray(obj["basis"], dtype=float).reshape(-1, n, 2)
        return cls(n, (cols[..., 0] + 1j * cols[..., 1]).T)

    def __repr__(self):
        return f"Subspace(ambient_dim={self.ambient_dim}, dim={self.dim})"


@dataclass(frozen=True, eq=False)
class MatrixSpace:
    """Span of n x n matrices with a Frobenius-orthonormal basis (d x n x n)."""

    ambient_dim: int
    basis: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = self.ambient_dim
        B = np.asarray(self.basis, dtype=complex).reshape(-1, n, n)
        object.__setattr__(self, "basis", B)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def vectors(self) -> np.ndarray:
        """Basis as columns of an n^2 x d matrix (column-stacking)."""
        return vec_many(self.basis)

    def to_json(self) -> list:
        from .core import matrix_to_json
        return [matrix_to_json(B) for B in self.basis]

    def __repr__(self):
        return f"MatrixSpace(ambient_dim={self.ambient_dim}, dim={self.dim})"


def vec(M) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(M).reshape(-1, order="F")


def unvec(v, n: int) -> np.ndarray:
    return np.asarray(v).reshape(n, n, order="F")


def vec_many(mats) -> np.ndarray:
    mats = np.asarray(mats, dtype=complex)
    if mats.size == 0:
        n = mats.shape[-1] if mats.ndim == 3 else 0
        return np.zeros((n * n, 0), dtype=complex)
    return mats.transpose(0, 2, 1).reshape(mats.shape[0], -1).T


def _columns(vectors, n=None) -> np.ndarray:
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        return vectors.astype(complex, copy=False)
    vs = [np.asarray(v, dtype=complex).ravel() for v in vectors]
    if not vs:
        if n is None:
            raise ValueError("empty vector list needs an ambient dimension")
        return np.zeros((n, 0), dtype=complex)
    dims = {v.size for v in vs}
    if len(dims) != 1:
        raise DimensionMismatch(f"vectors of different lengths: {sorted(dims)}")
    return np.stack(vs, axis=1)


def orthonormal_range(V: np.ndarray, tol: float, scale: float = 0.0,
                      ceiling: float = 0.0) -> np.ndarray:
    """Orthonormal basis of the numerical range of ``V``.

    Singular values at or below ``tol * max(sigma_max, scale)`` are dropped.
    With ``ceiling > tol``, values between the two relative levels form a
    gray zone: those above ``ceiling`` are kept, and inside the zone the
    cut goes where consecutive values drop by the largest ratio.
    The basis is chosen by Gram-Schmidt over the columns in order, so it is
    reproducible and favours earlier columns.
    """
    n, m = V.shape
    if m == 0:
        return np.zeros((n, 0), dtype=complex)
    u, s, _ = np.linalg.svd(V, full_matrices=False)
    ref = max(s[0] if s.size else 0.0, scale)
    if ref == 0:
        return np.zeros((n, 0), dtype=complex)
    r = int(np.sum(s > tol * ref))
    if ceiling > tol:
        r = _widest_gap(s, int(np.sum(s > ceiling * ref)), r, ref)
    if r == 0:
        return np.zeros((n, 0), dtype=complex)
    Ur = u[:, :r]
    out = np.zeros((n, 0), dtype=complex)
    norms = np.linalg.norm(V, axis=0)
    for i in range(m):
        if out.shape[1] == r:
            break
        x = Ur @ (Ur.conj().T @ V[:, i])
        for _ in range(2):
            x = x - out @ (out.conj().T @ x)
        nx = np.linalg.norm(x)
        if nx <= 1e-6 * max(norms[i], tol * ref):
            continue
        x = Ur @ (Ur.conj().T @ (x / nx))
        x = x - out @ (out.conj().T @ x)
        out = np.hstack([out, (x / np.linalg.norm(x))[:, None]])
    if out.shape[1] < r:
        R = Ur - out @ (out.conj().T @ Ur)
        w, _, _ = np.linalg.svd(R, full_matrices=False)
        out = np.hstack([out, w[:, :r - out.shape[1]]])
    return out


def _widest_gap(s: np.ndarray, lo: int, hi: int, ref: float) -> int:
    """Keep count in [lo, hi] at which s drops by the largest ratio."""
    se = np.concatenate([[ref], s, [0.0]])
    floor = EPS * ref
    ratios = [se[c] / max(se[c + 1], floor) for c in range(lo, hi + 1)]
    return lo + int(np.argmax(ratios))


def span(vectors, cfg: ToleranceConfig = DEFAULT, n: int | None = None,
         scale: float = 0.0) -> Subspace:
    """Orthonormalized span of ``vectors``.

    ``vectors`` is a list of 1-D arrays or an n x m array of columns. ``n``
    is required only for an empty list. ``scale`` raises the reference for
    the rank cutoff above the largest singular value (use it when the inputs
    are images under an operator of that norm).
    """
    V = _columns(vectors, n)
    if V.shape[0] == 0:
        raise ValueError("ambient dimension must be positive")
    return Subspace(V.shape[0], orthonormal_range(V, cfg.rank_tol, scale))


def _check(U: Subspace, V: Subspace):
    if U.ambient_dim != V.ambient_dim:
        raise DimensionMismatch(f"ambient dimensions {U.ambient_dim} and {V.ambient_dim}")


def subspace_sum(U: Subspace, V: Subspace, cfg: ToleranceConfig = DEFAULT) -> Subspace:
    _check(U, V)
    return span(np.hstack([U.basis, V.basis]), cfg, n=U.ambient_dim)


def containment_residual(U: Subspace, V: Subspace) -> float:
    """Largest distance from a basis vector of V to U."""
    _check(U, V)
    if V.dim == 0:
        return 0.0
    R = V.basis - U.basis @ (U.basis.conj().T @ V.basis)
    return float(np.linalg.norm(R, axis=0).max())


def subspace_contains(U: Subspace, V: Subspace, cfg: ToleranceConfig = DEFAULT,
                      tol: float | None = None) -> bool:
    """Whether V is inside U: each basis vector of V within ``tol`` of U.

    ``tol`` defaults to ``cfg.rank_tol``.
    """
    return containment_residual(U, V) <= (cfg.rank_tol if tol is None else tol)


def subspace_image(A, V: Subspace, cfg: ToleranceConfig = DEFAULT) -> Subspace:
    """span{A v : v in V}, rank cut relative to ||A||."""
    A = as_matrix(A)
    if A.shape[0] != V.ambient_dim:
        raise DimensionMismatch(f"matrix of size {A.shape[0]} on subspace of C^{V.ambient_dim}")
    return Subspace(V.ambient_dim, orthonormal_range(A @ V.basis, cfg.rank_tol, opnorm(A)))


def invariance_residual(A, V: Subspace) -> float:
    """||(I - P_V) A V|| / (1 + ||A||)."""
    A = as_matrix(A)
    if V.dim == 0:
        return 0.0
    AV = A @ V.basis
    R = AV - V.basis @ (V.basis.conj().T @ AV)
    return float(np.linalg.norm(R, 2) / (1.0 + opnorm(A)))


def is_invariant(A, V: Subspace, cfg: ToleranceConfig = DEFAULT) -> bool:
    return invariance_residual(A, V) <= cfg.residual_tol


def complement_in(U: Subspace, V: Subspace) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of V inside U."""
    _check(U, V)
    k = U.dim - V.dim
    if k <= 0:
        return np.zeros((U.ambient_dim, 0), dtype=complex)
    R = U.basis - V.basis @ (V.basis.conj().T @ U.basis)
    w, _, _ = np.linalg.svd(R, full_matrices=False)
    return w[:, :k]


def quotient_action(A, U: Subspace, V: Subspace, cfg: ToleranceConfig = DEFAULT) -> np.ndarray:
    """Matrix of the map induced by A on U/V.

    U/V is identified with the orthogonal complement of V in U; the result is
    W* A W for an orthonormal basis W of that complement.
    """
    A = as_matrix(A)
    _check(U, V)
    if A.shape[0] != U.ambient_dim:
        raise DimensionMismatch("matrix and subspaces differ in dimension")
    if containment_residual(U, V) > cfg.residual_tol:
        raise InvarianceViolation("V is not contained in U")
    for name, S in (("U", U), ("V", V)):
        r = invariance_residual(A, S)
        if r > cfg.residual_tol:
            raise InvarianceViolation(f"{name} is not invariant (residual {r:.3g})")
    W = complement_in(U, V)
    return W.conj().T @ A @ W


def matspan(mats, cfg: ToleranceConfig = DEFAULT, n: int | None = None,
            scale: float = 0.0) -> MatrixSpace:
    """Frobenius-orthonormal basis of the span of ``mats``."""
    mats = [as_matrix(M) for M in mats]
    if mats:
        dims = {M.shape[0] for M in mats}
        if len(dims) != 1:
            raise DimensionMismatch(f"matrices of different sizes: {sorted(dims)}")
        n = dims.pop()
    elif n is None:
        raise ValueError("empty matrix list needs a dimension")
    V = vec_many(np.array(mats)) if mats else np.zeros((n * n, 0), dtype=complex)
    B = orthonormal_range(V, cfg.rank_tol, scale)
    return MatrixSpace(n, np.array([unvec(b, n) for b in B.T]).reshape(-1, n, n))


def matspace_residual(M, S: MatrixSpace) -> float:
    """Frobenius distance from M to S divided by 1 + ||M||_F."""
    M = as_matrix(M)
    if M.shape[0] != S.ambient_dim:
        raise DimensionMismatch("matrix and space differ in dimension")
    v = vec(M)
    Q = S.vectors()
    r = v - Q @ (Q.conj().T @ v)
    return float(np.linalg.norm(r) / (1.0 + np.linalg.norm(v)))


def matspace_member(M, S: MatrixSpace, cfg: ToleranceConfig = DEFAULT) -> bool:
    return matspace_residual(M, S) <= cfg.residual_tol

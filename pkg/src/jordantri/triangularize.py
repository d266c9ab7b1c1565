"""Invariant subspace chains and simultaneous triangularization.

Main path: the descending chain X, AX, A^2 X, ... of the associative algebra
A generated by the generators (A^k X is spanned by words of length k in the
generators applied to X), refined to a full flag and realized by a unitary
conjugator.

Hard instances (a single generator hidden behind a conjugator of condition
number near 10^3, say) need more care. Each link of a greedy chain is
computed from the previous one, so roundoff is amplified at every step and
the far end of a long chain can be off by far more than the tolerance. When
the main path cannot certify its result, a repair path runs: it grows an
ascending chain of joint kernels from the bottom and a descending chain of
images from the top, each only while its rank decisions have a clear gap.
It joins them at whichever middle link gives the smallest certified
residual, then polishes the best flags with Levenberg-Marquardt steps on the
unitary group. The certificate is accepted only if its residual, recomputed
from scratch, is within tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .algebra import GeneratorSet, associative_closure
from .core import DEFAULT, ToleranceConfig, is_nilpotent, opnorm
from .errors import (AmbiguousVerdict, ChainStall, InvarianceViolation,
                     NotNilpotent, NumericalFailure, ResidualExceeded)
from .subspace import (Subspace, complement_in, invariance_residual,
                       orthonormal_range)


@dataclass(frozen=True, eq=False)
class SubspaceChain:
    """Strictly increasing chain of subspaces from 0 to C^n."""

    ambient_dim: int
    links: tuple

    def __post_init__(self):
        links = tuple(self.links)
        dims = [L.dim for L in links]
        if not links or dims[0] != 0 or dims[-1] != self.ambient_dim:
            raise ValueError(f"chain must run from 0 to {self.ambient_dim}, got dims {dims}")
        if any(b <= a for a, b in zip(dims, dims[1:])):
            raise ValueError(f"chain dimensions must strictly increase, got {dims}")
        object.__setattr__(self, "links", links)

    @property
    def dims(self) -> list:
        return [L.dim for L in self.links]

    @property
    def is_maximal(self) -> bool:
        return self.dims == list(range(self.ambient_dim + 1))

    @classmethod
    def from_columns(cls, S: np.ndarray) -> "SubspaceChain":
        n = S.shape[0]
        return cls(n, tuple(Subspace(n, S[:, :k]) for k in range(n + 1)))

    def to_json(self) -> dict:
        return {"ambient_dim": self.ambient_dim, "dims": self.dims,
                "links": [L.to_json() for L in self.links]}


@dataclass(frozen=True, eq=False)
class TriangularizationCertificate:
    chain: SubspaceChain
    conjugator: np.ndarray = field(repr=False)
    residual: float
    method: str = "radical"

    def to_json(self) -> dict:
        from .core import matrix_to_json
        return {"chain_dims": self.chain.dims, "conjugator": matrix_to_json(self.conjugator),
                "residual": self.residual, "method": self.method}


@dataclass(frozen=True)
class NotReducible:
    """No common invariant subspace: the generated algebra is all of M_n."""

    ambient_dim: int
    closure_dim: int
    reason: str = "associative closure is the full matrix algebra"

    def to_json(self) -> dict:
        return {"reducible": False, "ambient_dim": self.ambient_dim,
                "closure_dim": self.closure_dim, "reason": self.reason}


def _gens(g) -> GeneratorSet:
    return g if isinstance(g, GeneratorSet) else GeneratorSet.of(g)


def triangular_residual(gens, S: np.ndarray) -> float:
    """max over g of max_{i >= j} |(S^{-1} g S)_{ij}| / (1 + ||g||)."""
    Sinv_g = None
    unitary = np.allclose(S.conj().T @ S, np.eye(S.shape[0]), atol=1e-12)
    worst = 0.0
    for g in gens:
        if unitary:
            T = S.conj().T @ g @ S
        else:
            Sinv_g = np.linalg.solve(S, g @ S)
            T = Sinv_g
        worst = max(worst, float(np.abs(np.tril(T)).max()) / (1.0 + opnorm(g)))
    return worst


def _check_nilpotent(g: GeneratorSet, cfg: ToleranceConfig):
    for i, x in enumerate(g.gens):
        if not is_nilpotent(x, cfg):
            raise NotNilpotent(f"generator {i} is not nilpotent", index=i)


def radical_chain(g, cfg: ToleranceConfig = DEFAULT) -> SubspaceChain:
    """Ascending form of the chain X > AX > A^2 X > ... > 0.

    Each link is the span of the generators applied to the previous one, so
    every link is invariant. Nilpotency is checked on the generators;
    an algebra generated by nilpotents that is not itself nilpotent shows up
    as a stall and raises :class:`ChainStall`.
    """
    g = _gens(g)
    _check_nilpotent(g, cfg)
    n = g.dim
    scale = max(opnorm(x) for x in g.gens)
    cur = Subspace.full(n)
    links = [cur]
    while cur.dim > 0:
        img = orthonormal_range(np.hstack([x @ cur.basis for x in g.gens]), cfg.rank_tol, scale)
        if img.shape[1] >= cur.dim:
            raise ChainStall(f"chain stalled at dimension {cur.dim}", link=cur.basis)
        cur = Subspace(n, img)
        links.append(cur)
    return SubspaceChain(n, tuple(reversed(links)))


def _lex_completion(W: np.ndarray, count: int) -> np.ndarray:
    """First ``count`` orthonormal vectors of range(W) from projecting e_1, e_2, ..."""
    n = W.shape[0]
    out = np.zeros((n, 0), dtype=complex)
    for i in range(n):
        if out.shape[1] == count:
            break
        x = W @ W[i].conj()             # projection of e_i onto range(W)
        for _ in range(2):
            x = x - out @ (out.conj().T @ x)
        nx = np.linalg.norm(x)
        if nx > 1e-6:
            out = np.hstack([out, (x / nx)[:, None]])
    if out.shape[1] < count:
        R = W - out @ (out.conj().T @ W)
        u, _, _ = np.linalg.svd(R, full_matrices=False)
        out = np.hstack([out, u[:, :count - out.shape[1]]])
    return out


def refine_to_maximal(chain: SubspaceChain, g, cfg: ToleranceConfig = DEFAULT) -> SubspaceChain:
    """Fill every gap of the chain with a flag.

    Inside a gap V < U the new links are V + span(w_1..w_j), with w_j taken
    from the projections of e_1, e_2, ... onto the complement of V in U.
    Any choice works because the generators act as zero on U/V; that is
    checked first.
    """
    g = _gens(g)
    n = chain.ambient_dim
    for L in chain.links:
        for i, x in enumerate(g.gens):
            r = invariance_residual(x, L)
            if r > cfg.residual_tol:
                raise InvarianceViolation(f"link of dim {L.dim} not invariant under generator {i} ({r:.3g})")
    links = [chain.links[0]]
    for V, U in zip(chain.links, chain.links[1:]):
        d = U.dim - V.dim
        if d > 1:
            W = complement_in(U, V)
            for i, x in enumerate(g.gens):
                q = opnorm(W.conj().T @ x @ W) / (1.0 + opnorm(x))
                if q > cfg.residual_tol:
                    raise InvarianceViolation(
                        f"generator {i} acts nontrivially on a gap quotient ({q:.3g})")
            fill = _lex_completion(W, d - 1)
            for j in range(1, d):
                links.append(Subspace(n, np.hstack([V.basis, fill[:, :j]])))
        links.append(U)
    return SubspaceChain(n, tuple(links))


def conjugator_from_chain(chain: SubspaceChain) -> np.ndarray:
    """Unitary S whose first k columns span link k.

    Column k is the unit vector of link k orthogonal to link k-1, with its
    phase fixed so that its largest entry (the first one, on ties) is real
    and positive.
    """
    if not chain.is_maximal:
        raise ValueError(f"chain is not maximal: dims {chain.dims}")
    n = chain.ambient_dim
    S = np.zeros((n, n), dtype=complex)
    for k in range(1, n + 1):
        L = chain.links[k].basis
        C = S[:, :k - 1]
        R = L
        for _ in range(2):
            R = R - C @ (C.conj().T @ R)
        u, _, _ = np.linalg.svd(R, full_matrices=False)
        v = u[:, 0]
        v = v - C @ (C.conj().T @ v)
        v /= np.linalg.norm(v)
        m = int(np.argmax(np.round(np.abs(v), 12)))
        v *= np.conj(v[m]) / abs(v[m])
        S[:, k - 1] = v
    return S


def triangularize(g, cfg: ToleranceConfig = DEFAULT) -> TriangularizationCertificate:
    """Certificate that all generators are simultaneously strictly upper triangular.

    Raises :class:`NotNilpotent` or :class:`ChainStall` when the hypotheses
    fail and :class:`ResidualExceeded` when no flag within tolerance was
    found.
    """
    g = _gens(g)
    stall = None
    best = np.inf
    try:
        chain = radical_chain(g, cfg)
        try:
            full = refine_to_maximal(chain, g, cfg)
            S = conjugator_from_chain(full)
            r = triangular_residual(g.gens, S)
            if r <= cfg.residual_tol:
                return TriangularizationCertificate(full, S, r, "radical")
            best = r
        except InvarianceViolation:
            pass
    except ChainStall as exc:
        stall = exc
    S, r = _repair(g, cfg)
    if S is not None and r <= cfg.residual_tol:
        chain = SubspaceChain.from_columns(S)
        S = conjugator_from_chain(chain)
        r = triangular_residual(g.gens, S)
        if r <= cfg.residual_tol:
            return TriangularizationCertificate(chain, S, r, "repaired")
    if stall is not None:
        raise stall
    best = min(best, r)
    raise ResidualExceeded(f"best flag has residual {best:.3g} > {cfg.residual_tol:.3g}", residual=best)


# ---------------------------------------------------------------- repair path

_ANGLE = 1e-6           # principal-angle sine below which directions coincide
_LADDER = (1.0, 1e2, 1e4)   # multiples of residual_tol accepted as dropped mass
_POLISH_STARTS = 12
_POLISH_ITERS = 60


def _gap_cut(s: np.ndarray, hi: int, scale: float, ceiling: float):
    """Number of singular values to keep, chosen at the widest ratio gap.

    Candidates keep between 0 and ``hi`` values and drop only values at or
    below ``ceiling * scale``. Returns None when no candidate qualifies.
    """
    se = np.concatenate([[scale], s, [0.0]])
    best, arg = -1.0, None
    for c in range(0, hi + 1):
        if se[c + 1] > ceiling * scale:
            continue
        ratio = se[c] / max(se[c + 1], 1e-300)
        if ratio > best:
            best, arg = ratio, c
    return arg


def _ascending(gens, n, scale, ceiling):
    K = np.zeros((n, 0), dtype=complex)
    links = [K]
    while K.shape[1] < n:
        P = np.eye(n) - K @ K.conj().T
        _, s, vh = np.linalg.svd(np.vstack([P @ x for x in gens]))
        s = np.concatenate([s, np.zeros(n - s.size)])
        r = _gap_cut(s, n - K.shape[1] - 1, scale, ceiling)
        if r is None:
            break
        K = vh[r:].conj().T
        links.append(K)
    return links


def _descending(gens, n, scale, ceiling):
    Y = np.eye(n, dtype=complex)
    links = [Y]
    while Y.shape[1] > 0:
        u, s, _ = np.linalg.svd(np.hstack([x @ Y for x in gens]), full_matrices=False)
        r = _gap_cut(s, Y.shape[1] - 1, scale, ceiling)
        if r is None:
            break
        Y = u[:, :r]
        links.append(Y)
    return links


def _join(A, D, p):
    """Ascending links up to A[p], then A[p] + D_j for the larger descending links."""
    Ap = A[p]
    chain = list(A[:p + 1])
    for Dj in reversed(D):
        if Dj.shape[1] <= Ap.shape[1]:
            continue
        R = Dj - Ap @ (Ap.conj().T @ Dj)
        u, sv, _ = np.linalg.svd(R, full_matrices=False)
        extra = u[:, sv > _ANGLE]
        extra = extra - Ap @ (Ap.conj().T @ extra)
        link = np.linalg.qr(np.hstack([Ap, extra]))[0]
        if link.shape[1] > chain[-1].shape[1]:
            chain.append(link)
    return chain


def _flag(links, n):
    cols = np.zeros((n, 0), dtype=complex)
    for L in links[1:]:
        R = L
        for _ in range(2):
            R = R - cols @ (cols.conj().T @ R)
        u, _, _ = np.linalg.svd(R, full_matrices=False)
        cols = np.hstack([cols, u[:, :L.shape[1] - cols.shape[1]]])
    return cols


def _candidates(gens, n, cfg):
    scale = max(opnorm(x) for x in gens)
    if scale == 0:
        return [(0.0, np.eye(n, dtype=complex))]
    out = []
    for m in _LADDER:
        ceiling = m * cfg.residual_tol
        A = _ascending(gens, n, scale, ceiling)
        D = _descending(gens, n, scale, ceiling)
        for p in range(len(A)):
            if A[p].shape[1] < D[-1].shape[1]:
                continue
            links = _join(A, D, p)
            if links[-1].shape[1] != n:
                continue
            dims = [L.shape[1] for L in links]
            Q = _flag(links, n)
            if Q.shape[1] != n or len(set(dims)) != len(dims):
                continue
            out.append((triangular_residual(gens, Q), Q))
    out.sort(key=lambda t: t[0])
    # the ladder often rebuilds the same flag; keep one copy of each
    seen, unique = set(), []
    for r, Q in out:
        key = float(f"{r:.8e}")
        if key not in seen:
            seen.add(key)
            unique.append((r, Q))
    return unique


def _skew_basis(n: int) -> np.ndarray:
    """Columns map real parameters to vec(Omega) with Omega skew-Hermitian."""
    iu = np.triu_indices(n, 1)
    m = len(iu[0])
    M = np.zeros((n * n, n * n), dtype=complex)
    col = 0
    for part in (1.0, 1j):
        for a, b in zip(*iu):
            M[a + b * n, col] = part
            M[b + a * n, col] = -np.conj(part)
            col += 1
    for a in range(n):
        M[a + a * n, 2 * m + a] = 1j
    return M


def _polish(gens, Q, iters):
    """Levenberg-Marquardt on Q -> Q expm(Omega), recentred every step."""
    n = Q.shape[0]
    rows = np.flatnonzero(np.tril(np.ones((n, n), bool)).reshape(-1, order="F"))
    M = _skew_basis(n)
    I = np.eye(n)
    scales = [1.0 + opnorm(x) for x in gens]

    def resid(Q):
        r = np.concatenate([(Q.conj().T @ x @ Q).reshape(-1, order="F")[rows] / s
                            for x, s in zip(gens, scales)])
        return np.concatenate([r.real, r.imag])

    r = resid(Q)
    f = r @ r
    mu = 1e-3
    for _ in range(iters):
        if np.abs(r).max() < 1e-15:
            break
        blocks = []
        for x, s in zip(gens, scales):
            T = Q.conj().T @ x @ Q
            ad = np.kron(I, T) - np.kron(T.T, I)
            blocks.append((ad[rows] @ M) / s)
        J = np.vstack(blocks)
        J = np.vstack([J.real, J.imag])
        H = J.T @ J
        b = J.T @ r
        dH = np.diag(H).copy()
        for _ in range(12):
            try:
                x = np.linalg.solve(H + mu * np.diag(dH + 1e-300) + mu * 1e-12 * np.eye(len(b)), -b)
            except np.linalg.LinAlgError:
                mu *= 10
                continue
            Om = (M @ x).reshape(n, n, order="F")
            Qn = Q @ sla.expm(Om)
            rn = resid(Qn)
            fn = rn @ rn
            if fn < f:
                Q, r, f = Qn, rn, fn
                mu = max(mu / 10, 1e-12)
                break
            mu *= 10
        else:
            break
    # re-orthonormalize; expm of a skew-Hermitian matrix is unitary up to roundoff
    Q, R = np.linalg.qr(Q)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def _repair(g: GeneratorSet, cfg: ToleranceConfig):
    gens = list(g.gens)
    n = g.dim
    cands = _candidates(gens, n, cfg)
    if not cands:
        return None, np.inf
    if cands[0][0] <= cfg.residual_tol:
        return cands[0][1], cands[0][0]
    best_r, best_Q = cands[0]
    for r0, Q in cands[:_POLISH_STARTS]:
        Qp = _polish(gens, Q, _POLISH_ITERS)
        r = triangular_residual(gens, Qp)
        if r < best_r:
            best_r, best_Q = r, Qp
        if r <= cfg.residual_tol:
            break
    return best_Q, best_r


# ------------------------------------------------------------- reducibility

def _cyclic_subspace(v: np.ndarray, basis: np.ndarray, cfg: ToleranceConfig) -> np.ndarray:
    """span(v, A v) for the algebra with the given basis; invariant under A."""
    V = np.column_stack([v] + [B @ v for B in basis])
    return orthonormal_range(V, cfg.rank_tol, np.linalg.norm(v))


def _candidate_vectors(basis: np.ndarray, n: int, seed: int = 0):
    yield from np.eye(n, dtype=complex)
    rng = np.random.default_rng(seed)
    for _ in range(3):
        c = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
        M = np.tensordot(c, basis, axes=1)
        w, V = np.linalg.eig(M)
        for i in np.lexsort((w.imag, w.real)):
            yield V[:, i]


def _burnside_search(alg_basis: np.ndarray, gens, cfg: ToleranceConfig):
    n = alg_basis.shape[1]

    def ok(Vb):
        S = Subspace(n, Vb)
        return 0 < S.dim < n and all(invariance_residual(x, S) <= cfg.residual_tol for x in gens)

    for v in _candidate_vectors(alg_basis, n):
        Vb = _cyclic_subspace(v, alg_basis, cfg)
        if ok(Vb):
            return Subspace(n, Vb)
    adj = np.conj(np.transpose(alg_basis, (0, 2, 1)))
    for v in _candidate_vectors(adj, n):
        Ub = _cyclic_subspace(v, adj, cfg)
        if 0 < Ub.shape[1] < n:
            Vb = sla.null_space(Ub.conj().T)
            if ok(Vb):
                return Subspace(n, Vb)
    return None


def find_invariant_subspace(g, cfg: ToleranceConfig = DEFAULT):
    """A common invariant subspace 0 < V < C^n, or :class:`NotReducible`.

    Nilpotent generators get the smallest nonzero link of the radical chain.
    Anything else goes through the associative closure: if it is all of
    M_n there is no invariant subspace (Burnside); otherwise a cyclic
    subspace span(v, Av) that is proper is returned.
    """
    g = _gens(g)
    n = g.dim
    try:
        nilpotent = all(is_nilpotent(x, cfg) for x in g.gens)
    except AmbiguousVerdict:
        nilpotent = False
    if nilpotent and n > 1:
        try:
            chain = radical_chain(g, cfg)
            V = chain.links[1]
            if all(invariance_residual(x, V) <= cfg.residual_tol for x in g.gens):
                return V
        except ChainStall:
            pass
    alg = associative_closure(g, cfg)
    if alg.dim == n * n:
        return NotReducible(n, alg.dim)
    if n == 1:
        return NotReducible(n, alg.dim, "a one-dimensional space has no proper nonzero subspace")
    V = _burnside_search(alg.basis, g.gens, cfg)
    if V is None:
        raise NumericalFailure(
            f"closure has dimension {alg.dim} < {n * n} but no invariant subspace was found")
    return V

"""Closure engines for Jordan, Lie and associative matrix algebras.

Every closure runs in breadth-first rounds: a round forms the products
between the elements added in the previous round and the whole current
basis, then extends the basis with whatever is new. Older basis elements are
never rotated, so the basis keeps the insertion order of its elements and
``generation_log`` records the dimension after each round.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import DEFAULT, ToleranceConfig, as_matrix
from .errors import ClosureFailure, DimensionMismatch
from .subspace import (MatrixSpace, matspace_residual, orthonormal_range,
                       unvec, vec_many)

KINDS = ("jordan", "lie", "associative", "ideal")


@dataclass(frozen=True, eq=False)
class GeneratorSet:
    dim: int
    gens: tuple = field(repr=False)
    label: str = ""

    def __post_init__(self):
        gens = tuple(as_matrix(g) for g in self.gens)
        if not gens:
            raise ValueError("a generator set needs at least one matrix")
        for g in gens:
            if g.shape[0] != self.dim:
                raise DimensionMismatch(f"generator of size {g.shape[0]} in a set of dimension {self.dim}")
        object.__setattr__(self, "gens", gens)

    @classmethod
    def of(cls, mats, label: str = "") -> "GeneratorSet":
        mats = [as_matrix(m) for m in mats]
        if not mats:
            raise ValueError("a generator set needs at least one matrix")
        return cls(mats[0].shape[0], tuple(mats), label)

    def __len__(self):
        return len(self.gens)

    def __iter__(self):
        return iter(self.gens)


@dataclass(frozen=True, eq=False)
class AlgebraBasis:
    space: MatrixSpace
    kind: str
    generation_log: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown algebra kind {self.kind!r}")

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def basis(self) -> np.ndarray:
        return self.space.basis

    @property
    def n(self) -> int:
        return self.space.ambient_dim

    def to_json(self) -> dict:
        return {"kind": self.kind, "basis": self.space.to_json(),
                "log": [list(e) for e in self.generation_log]}


def _as_generators(g) -> GeneratorSet:
    return g if isinstance(g, GeneratorSet) else GeneratorSet.of(g)


def _extend(basis: np.ndarray, cands: np.ndarray, cfg: ToleranceConfig,
            ref: float = 1.0) -> np.ndarray:
    """Orthonormal columns spanning what ``cands`` adds to ``basis``.

    Both are n^2 x k column blocks; ``basis`` is orthonormal. The rank
    cutoff is relative to the largest candidate or ``ref``, whichever is
    larger. Candidates built as products of orthonormal basis elements pass
    ref = 1 (the size of their factors), so products that vanish up to
    roundoff are not mistaken for new directions.

    Basis elements normalized from small residuals carry amplified
    roundoff, which their products pass on. Residual directions between
    ``rank_tol`` and its square root are therefore kept or dropped at the
    widest gap in the singular values rather than at a fixed level.
    """
    if cands.shape[1] == 0:
        return cands
    scale = max(float(np.linalg.norm(cands, axis=0).max()), ref)
    R = cands
    for _ in range(2):
        R = R - basis @ (basis.conj().T @ R)
    new = orthonormal_range(R, cfg.rank_tol, scale, ceiling=np.sqrt(cfg.rank_tol))
    if new.shape[1]:
        new = new - basis @ (basis.conj().T @ new)
        new, _ = np.linalg.qr(new)
    return new


def _to_space(cols: np.ndarray, n: int) -> MatrixSpace:
    return MatrixSpace(n, np.array([unvec(c, n) for c in cols.T]).reshape(-1, n, n))


def _run_closure(seeds: np.ndarray, n: int, products, cfg: ToleranceConfig,
                 kind: str) -> AlgebraBasis:
    """Generic round-based closure.

    ``products(new, old)`` returns a stack of candidate matrices built from
    the newest elements ``new`` and the full basis ``old``.
    """
    basis = _extend(np.zeros((n * n, 0), dtype=complex), seeds, cfg, ref=0.0)
    log = [(0, basis.shape[1])]
    start = 0
    cap = n * n + 1
    for rnd in range(1, cap + 1):
        mats = np.array([unvec(c, n) for c in basis.T]).reshape(-1, n, n)
        new = mats[start:]
        if len(new) == 0:
            break
        cands = vec_many(products(new, mats))
        add = _extend(basis, cands, cfg)
        start = basis.shape[1]
        basis = np.hstack([basis, add])
        log.append((rnd, basis.shape[1]))
        if add.shape[1] == 0:
            break
        if basis.shape[1] > n * n:
            raise ClosureFailure("closure exceeded the matrix space dimension")
    else:
        raise ClosureFailure(f"closure did not stabilize within {cap} rounds")
    return AlgebraBasis(_to_space(basis, n), kind, tuple(log))


def _anti(new, old):
    a = np.matmul(new[:, None], old[None, :])
    b = np.matmul(old[None, :], new[:, None])
    return (a + b).reshape(-1, *new.shape[1:])


def _comm(new, old):
    a = np.matmul(new[:, None], old[None, :])
    b = np.matmul(old[None, :], new[:, None])
    return (a - b).reshape(-1, *new.shape[1:])


def _assoc(new, old):
    a = np.matmul(new[:, None], old[None, :]).reshape(-1, *new.shape[1:])
    b = np.matmul(old[None, :], new[:, None]).reshape(-1, *new.shape[1:])
    return np.concatenate([a, b])


def jordan_closure(g, cfg: ToleranceConfig = DEFAULT) -> AlgebraBasis:
    """Smallest matrix space containing the generators and closed under {.,.}.

    Squares come for free since {A, A} = 2A^2.
    """
    g = _as_generators(g)
    return _run_closure(vec_many(np.array(g.gens)), g.dim, _anti, cfg, "jordan")


def associative_closure(g, cfg: ToleranceConfig = DEFAULT) -> AlgebraBasis:
    """Algebra generated by the generators under matrix multiplication, no unit."""
    g = _as_generators(g)
    return _run_closure(vec_many(np.array(g.gens)), g.dim, _assoc, cfg, "associative")


def lie_closure(g, cfg: ToleranceConfig = DEFAULT) -> AlgebraBasis:
    """Lie algebra generated by the generators under [.,.]."""
    g = _as_generators(g)
    return _run_closure(vec_many(np.array(g.gens)), g.dim, _comm, cfg, "lie")


def _pair_brackets(B: np.ndarray) -> np.ndarray:
    d = B.shape[0]
    if d < 2:
        return np.zeros((0,) + B.shape[1:], dtype=complex)
    i, j = np.triu_indices(d, 1)
    return B[i] @ B[j] - B[j] @ B[i]


def closure_defect(A: AlgebraBasis) -> float:
    """Largest relative distance from a basis product to the space.

    The product is the one named by ``A.kind``; ideals are checked as Lie
    algebras.
    """
    B = A.basis
    if A.dim == 0:
        return 0.0
    if A.kind == "jordan":
        prods = _anti(B, B)
    elif A.kind == "associative":
        prods = _assoc(B, B)
    else:
        prods = _comm(B, B)
    return _max_residual(prods, A.space)


def _max_residual(mats: np.ndarray, S: MatrixSpace) -> float:
    if len(mats) == 0:
        return 0.0
    V = vec_many(mats)
    Q = S.vectors()
    R = V - Q @ (Q.conj().T @ V) if Q.shape[1] else V
    return float((np.linalg.norm(R, axis=0) / (1.0 + np.linalg.norm(V, axis=0))).max())


def lie_from_jordan(J: AlgebraBasis, cfg: ToleranceConfig = DEFAULT) -> AlgebraBasis:
    """span(J + [J, J]), audited for closure under commutators.

    The audit allows ``residual_tol`` or ten times the closure defect of J
    itself, whichever is larger: when J's basis is only accurate to some
    level, brackets of it cannot be more accurate.
    """
    if J.kind != "jordan":
        raise ValueError(f"expected a Jordan algebra, got kind {J.kind!r}")
    n = J.n
    basis = J.space.vectors()
    add = _extend(basis, vec_many(_pair_brackets(J.basis)), cfg)
    L = AlgebraBasis(_to_space(np.hstack([basis, add]), n), "lie",
                     J.generation_log + ((len(J.generation_log), basis.shape[1] + add.shape[1]),))
    defect = closure_defect(L)
    if defect > max(cfg.residual_tol, 10 * closure_defect(J)):
        raise ClosureFailure(f"span(J + [J,J]) is not closed under brackets (defect {defect:.3g})")
    return L


def lie_ideal_generated(L: AlgebraBasis, S, cfg: ToleranceConfig = DEFAULT) -> AlgebraBasis:
    """Smallest subspace of L containing S and stable under [L, .]."""
    if L.kind not in ("lie", "ideal"):
        raise ValueError(f"expected a Lie algebra, got kind {L.kind!r}")
    S = [as_matrix(s) for s in S]
    for k, s in enumerate(S):
        if matspace_residual(s, L.space) > cfg.residual_tol:
            raise ValueError(f"element {k} of S is not in L")
    n = L.n
    Lb = L.basis

    def brackets(new, _old):
        return _comm(Lb, new)

    seeds = vec_many(np.array(S)) if S else np.zeros((n * n, 0), dtype=complex)
    return _run_closure(seeds, n, brackets, cfg, "ideal")


def derived_algebra(L: AlgebraBasis, cfg: ToleranceConfig = DEFAULT) -> AlgebraBasis:
    """[L, L], the span of all brackets of basis elements."""
    if L.kind not in ("lie", "ideal"):
        raise ValueError(f"expected a Lie algebra, got kind {L.kind!r}")
    cands = _pair_brackets(L.basis)
    n = L.n
    cols = _extend(np.zeros((n * n, 0), dtype=complex), vec_many(cands), cfg)
    return AlgebraBasis(_to_space(cols, n), "ideal", ((0, cols.shape[1]),))


def lower_central_series(L: AlgebraBasis, cfg: ToleranceConfig = DEFAULT) -> list:
    """L, [L, L], [L, [L, L]], ... until the dimension stops dropping or hits 0."""
    if L.kind not in ("lie", "ideal"):
        raise ValueError(f"expected a Lie algebra, got kind {L.kind!r}")
    n = L.n
    series = [L.space]
    cur = L.space
    while cur.dim > 0:
        cands = _comm(L.basis, cur.basis)
        cols = _extend(np.zeros((n * n, 0), dtype=complex), vec_many(cands), cfg)
        nxt = _to_space(cols, n)
        series.append(nxt)
        if nxt.dim >= cur.dim:
            break
        cur = nxt
    return series


def is_engel(L: AlgebraBasis, cfg: ToleranceConfig = DEFAULT) -> bool:
    """Engel test through the lower central series reaching zero."""
    return lower_central_series(L, cfg)[-1].dim == 0

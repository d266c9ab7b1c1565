"""Executable checks of matrix identities and trace facts.

Each check returns an :class:`IdentityReport`: a list of named residuals,
each with the threshold it is judged against.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import (AlgebraBasis, derived_algebra, lie_from_jordan,
                      lie_ideal_generated)
from .core import (DEFAULT, EPS, ToleranceConfig, anticommutator, as_matrix,
                   _same_dim, is_nilpotent, nilpotency_residual, opnorm,
                   schatten_norm)
from .errors import AmbiguousVerdict, HypothesisViolation, NumericalFailure
from .spectral import riesz_decomposition


@dataclass(frozen=True)
class Check:
    name: str
    residual: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.threshold)

    def to_json(self) -> dict:
        return {"name": self.name, "residual": float(self.residual),
                "threshold": float(self.threshold), "pass": self.passed}


@dataclass(frozen=True)
class IdentityReport:
    checks: tuple
    notes: tuple = field(default=())

    @property
    def worst(self) -> Check | None:
        """Check with the largest residual-to-threshold ratio."""
        if not self.checks:
            return None
        return max(self.checks, key=lambda c: c.residual / c.threshold if c.threshold > 0
                   else (np.inf if c.residual > 0 else 0.0))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> list:
        return [c.to_json() for c in self.checks]

    def table(self) -> str:
        w = max([len(c.name) for c in self.checks] + [5])
        lines = [f"{'check':<{w}}  {'residual':>10}  {'threshold':>10}  pass"]
        for c in self.checks:
            lines.append(f"{c.name:<{w}}  {c.residual:10.3e}  {c.threshold:10.3e}  "
                         f"{'yes' if c.passed else 'NO'}")
        lines.extend(f"note: {n}" for n in self.notes)
        return "\n".join(lines)


# ------------------------------------------------------------ Jordan identities

def _ac(X, Y):
    return anticommutator(X, Y)


def check_jordan_identities(A, B, C, D, threshold: float = 1e-12) -> IdentityReport:
    """The four polynomial identities relating words to anticommutators.

    Each residual is ||LHS - RHS||_F / (1 + max ||X||)^deg with deg the
    degree of the identity (3, 3, 6 and 4).
    """
    A, B, C, D = (as_matrix(X) for X in (A, B, C, D))
    _same_dim(A, B, C, D)
    m = 1.0 + max(opnorm(X) for X in (A, B, C, D))
    ABC, CBA = A @ B @ C, C @ B @ A
    cases = [
        ("2ABA = {{A,B},A} - {A^2,B}", 3,
         2 * A @ B @ A, _ac(_ac(A, B), A) - _ac(A @ A, B)),
        ("2(ABC+CBA) = {C,{B,A}} + {A,{B,C}} - {B,{C,A}}", 3,
         2 * (ABC + CBA), _ac(C, _ac(B, A)) + _ac(A, _ac(B, C)) - _ac(B, _ac(C, A))),
        ("(ABC-CBA)^2 = (ABC+CBA)^2 - 2(ABC^2BA + CBA^2BC)", 6,
         (ABC - CBA) @ (ABC - CBA),
         (ABC + CBA) @ (ABC + CBA) - 2 * (A @ B @ C @ C @ B @ A + C @ B @ A @ A @ B @ C)),
        ("ABCD + BCDA = {A,B}CD + BC{A,D} - B{A,C}D", 4,
         A @ B @ C @ D + B @ C @ D @ A,
         _ac(A, B) @ C @ D + B @ C @ _ac(A, D) - B @ _ac(A, C) @ D),
    ]
    checks = tuple(Check(name, float(np.linalg.norm(lhs - rhs)) / m ** deg, threshold)
                   for name, deg, lhs, rhs in cases)
    return IdentityReport(checks)


# ------------------------------------------------------------------ trace words

def _relative(tr: np.ndarray, scale: np.ndarray) -> float:
    return float((np.abs(tr) / np.where(scale > 0, scale, 1.0)).max())


def _all_words(B: np.ndarray, norms: np.ndarray, length: int, n: int) -> float:
    """max |tr(w)| / (n prod ||B_i||) over all d^length words, via pair products."""
    d = len(B)
    flat = B.reshape(d, n * n)
    flatT = B.transpose(0, 2, 1).reshape(d, n * n)
    if length == 1:
        return _relative(np.einsum("kii->k", B), n * norms)
    if length == 2:
        return _relative(flat @ flatT.T, n * np.outer(norms, norms))
    pairs = np.einsum("aij,bjk->abik", B, B).reshape(d * d, n, n)
    pn = np.outer(norms, norms).ravel()
    if length == 3:
        return _relative(pairs.reshape(d * d, -1) @ flatT.T, n * np.outer(pn, norms))
    P = pairs.reshape(d * d, -1)
    PT = pairs.transpose(0, 2, 1).reshape(d * d, -1)
    step = max(1, 2 ** 22 // (d * d))
    return max(_relative(P[i:i + step] @ PT.T, n * np.outer(pn[i:i + step], pn))
               for i in range(0, d * d, step))


def _sampled_words(B, norms, length, n, samples, rng) -> float:
    idx = rng.integers(0, len(B), size=(samples, length))
    W = B[idx[:, 0]]
    for j in range(1, length):
        W = W @ B[idx[:, j]]
    return _relative(np.einsum("kii->k", W), n * np.prod(norms[idx], axis=1))


def check_trace_words(J: AlgebraBasis, cfg: ToleranceConfig = DEFAULT,
                      include_ideal: bool = False, seed: int = 0,
                      max_words: int = 10 ** 7, samples: int = 10_000) -> IdentityReport:
    """|tr(w)| for words w of length 1 to 4 in the basis of a nilpotent Jordan algebra.

    Every word of a given length is checked when there are at most
    ``max_words`` of them, by contracting products of basis pairs;
    otherwise ``samples`` words are drawn with ``seed``. A word
    B_1...B_k is judged relative to n ||B_1|| ... ||B_k||. With
    ``include_ideal`` the Lie ideal generated by J inside span(J + [J, J])
    is built and its trace form checked on basis pairs.
    """
    if J.kind != "jordan":
        raise ValueError(f"expected a Jordan algebra, got kind {J.kind!r}")
    B = J.basis
    n = J.n
    for i, b in enumerate(B):
        if not is_nilpotent(b, cfg):
            raise HypothesisViolation(f"basis element {i} of J is not nilpotent")
    rng = np.random.default_rng(seed)
    norms = np.array([opnorm(b) for b in B])
    checks = []
    d = len(B)
    for length in range(1, 5):
        if d == 0:
            checks.append(Check(f"trace of words of length {length}", 0.0, cfg.residual_tol))
        elif d ** length <= max_words:
            checks.append(Check(f"trace of all {d ** length} words of length {length}",
                                _all_words(B, norms, length, n), cfg.residual_tol))
        else:
            checks.append(Check(f"trace of words of length {length} ({samples} sampled words)",
                                _sampled_words(B, norms, length, n, samples, rng),
                                cfg.residual_tol))
    notes = []
    if include_ideal:
        L = lie_from_jordan(J, cfg)
        I = lie_ideal_generated(L, list(B), cfg)
        checks.append(_pairing_check("trace pairing on the generated ideal", I.basis, cfg))
        notes.append(f"ideal dimension {I.dim}")
    return IdentityReport(tuple(checks), tuple(notes))


def _pairing_check(name: str, B: np.ndarray, cfg: ToleranceConfig) -> Check:
    if len(B) == 0:
        return Check(name, 0.0, cfg.residual_tol)
    n = B.shape[1]
    G = np.abs(np.einsum("aij,bji->ab", B, B))
    norms = np.array([opnorm(b) for b in B])
    scale = n * np.outer(norms, norms)
    return Check(name, float((G / np.where(scale > 0, scale, 1.0)).max()), cfg.residual_tol)


# ------------------------------------------------------------------------ Cartan

def cartan_T(A, cfg: ToleranceConfig = DEFAULT) -> np.ndarray:
    """T = sum over spectral clusters of conj(lambda) P_lambda.

    A cluster within the clustering radius of 0 contributes nothing, so a
    nilpotent A gives T = 0 exactly. Raises :class:`NumericalFailure` if T
    fails to commute with A or tr(TA) misses sum mult |lambda|^2.
    """
    A = as_matrix(A)
    D = riesz_decomposition(A, cfg)
    T = np.zeros_like(A)
    for c in D.clusters:
        if abs(c.lam) > D.radius:
            T = T + np.conj(c.lam) * c.projection
    a = 1.0 + opnorm(A)
    comm = opnorm(T @ A - A @ T) / ((1.0 + opnorm(T)) * a)
    if comm > cfg.residual_tol:
        raise NumericalFailure(f"cartan T does not commute with A (residual {comm:.3g})")
    expect = sum(c.multiplicity * abs(c.lam) ** 2 for c in D.clusters)
    got = np.trace(T @ A)
    gap = abs(got - expect) / (1.0 + expect)
    if gap > cfg.residual_tol:
        raise NumericalFailure(f"tr(TA) = {got:.6g} differs from {expect:.6g}")
    return T


def cartan_criterion(L: AlgebraBasis, cfg: ToleranceConfig = DEFAULT,
                     samples: int = 10, seed: int = 0) -> IdentityReport:
    """Trace-form hypothesis audit, then nilpotency audit of [L, L].

    The conclusion is only examined when the hypothesis holds; otherwise
    the report carries a "hypothesis violated" note and no conclusion checks.
    """
    if L.kind not in ("lie", "ideal"):
        raise ValueError(f"expected a Lie algebra, got kind {L.kind!r}")
    hyp = _pairing_check("hypothesis: tr(B_i B_j) = 0 on L", L.basis, cfg)
    if not hyp.passed:
        return IdentityReport((hyp,), ("hypothesis violated",))
    D = derived_algebra(L, cfg)
    elems = list(D.basis)
    if D.dim:
        rng = np.random.default_rng(seed)
        for _ in range(samples):
            c = rng.standard_normal(D.dim) + 1j * rng.standard_normal(D.dim)
            elems.append(np.tensordot(c / np.linalg.norm(c), D.basis, axes=1))
    bad, worst, notes = 0, 0.0, [f"derived algebra dimension {D.dim}"]
    for M in elems:
        try:
            ok = is_nilpotent(M, cfg)
        except AmbiguousVerdict:
            ok = False
            notes.append("ambiguous nilpotency verdict in [L, L]")
        bad += not ok
        worst = max(worst, nilpotency_residual(M))
    notes.append(f"largest nilpotency residual in [L, L]: {worst:.3g}")
    concl = Check(f"conclusion: elements of [L, L] failing nilpotency (of {len(elems)})",
                  float(bad), 0.0)
    return IdentityReport((hyp, concl), tuple(notes))


# --------------------------------------------------------------- norm inequalities

def check_norm_inequalities(A, B) -> IdentityReport:
    """Operator, trace and Hilbert-Schmidt norm inequalities for a pair.

    Each residual is max(0, LHS - RHS); the threshold is
    10 eps max(1, RHS).
    """
    A, B = as_matrix(A), as_matrix(B)
    _same_dim(A, B)
    op = {"A": opnorm(A), "B": opnorm(B)}
    tr = {"A": schatten_norm(A, 1), "B": schatten_norm(B, 1)}
    hs = {"A": schatten_norm(A, 2), "B": schatten_norm(B, 2)}
    ab, ba = schatten_norm(A @ B, 1), schatten_norm(B @ A, 1)
    rows = [
        ("||A|| <= ||A||_tr", op["A"], tr["A"]),
        ("||B|| <= ||B||_tr", op["B"], tr["B"]),
        ("||AB||_tr <= ||B|| ||A||_tr", ab, op["B"] * tr["A"]),
        ("||BA||_tr <= ||B|| ||A||_tr", ba, op["B"] * tr["A"]),
        ("||AB||_tr <= ||A|| ||B||_tr", ab, op["A"] * tr["B"]),
        ("||BA||_tr <= ||A|| ||B||_tr", ba, op["A"] * tr["B"]),
        ("||AB||_tr <= ||A||_2 ||B||_2", ab, hs["A"] * hs["B"]),
    ]
    return IdentityReport(tuple(Check(name, max(0.0, lhs - rhs), 10 * EPS * max(1.0, rhs))
                                for name, lhs, rhs in rows))

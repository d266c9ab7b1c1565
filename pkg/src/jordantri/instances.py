"""Seeded random instance models.

All randomness flows through ``numpy.random.Generator`` backed by PCG64
(``numpy.random.default_rng(seed)``), so a seed pins every instance on any
platform with the same numpy stream semantics.

Hidden-triangularization model: k strictly upper triangular matrices with
standard complex normal entries, conjugated by S0 = U diag(s) V where U, V
are Haar unitaries and s is log-spaced from 1 to the condition number. S0 is
kept as the oracle: S0^{-1} g S0 is strictly upper triangular.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import as_matrix


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard complex normal: E|z|^2 = 1."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def haar_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    Z = complex_normal(rng, (n, n))
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def conditioned_matrix(rng: np.random.Generator, n: int, cond: float) -> np.ndarray:
    """Random invertible matrix with 2-norm condition number ``cond``."""
    if cond < 1:
        raise ValueError("condition number must be >= 1")
    s = np.logspace(0.0, np.log10(cond), n) if n > 1 else np.ones(1)
    return (haar_unitary(rng, n) * s) @ haar_unitary(rng, n)


def strictly_upper(rng: np.random.Generator, n: int) -> np.ndarray:
    return np.triu(complex_normal(rng, (n, n)), 1)


@dataclass(frozen=True, eq=False)
class HiddenInstance:
    generators: tuple = field(repr=False)
    conjugator: np.ndarray = field(repr=False)
    cond: float = 1.0

    @property
    def dim(self) -> int:
        return self.conjugator.shape[0]

    def oracle_residual(self) -> float:
        """Strict-lower-plus-diagonal mass of S0^{-1} g S0, scaled by ||S0^{-1}|| ||g|| ||S0||."""
        S = self.conjugator
        Sinv_norm = 1.0 / np.linalg.svd(S, compute_uv=False)[-1]
        s_norm = np.linalg.norm(S, 2)
        worst = 0.0
        for g in self.generators:
            T = np.linalg.solve(S, g @ S)
            scale = Sinv_norm * np.linalg.norm(g, 2) * s_norm
            worst = max(worst, np.abs(np.tril(T)).max() / max(scale, 1e-300))
        return float(worst)


def hidden_instance(rng: np.random.Generator, n: int, k: int, cond: float) -> HiddenInstance:
    """One hidden-triangularization instance with conjugator condition ``cond``."""
    if n < 1 or k < 1:
        raise ValueError("need n >= 1 and k >= 1")
    S = conditioned_matrix(rng, n, cond)
    Ns = [strictly_upper(rng, n) for _ in range(k)]
    gens = tuple(as_matrix(np.linalg.solve(S.T, (S @ N).T).T) for N in Ns)
    return HiddenInstance(gens, S, float(cond))


def gen_random(seed: int, n: int, k: int, cond_cap: float = 1e2) -> HiddenInstance:
    """Deterministic hidden instance whose conjugator has condition ``cond_cap``."""
    if n < 2 or k < 1:
        raise ValueError("gen_random needs n >= 2 and k >= 1")
    if not cond_cap >= 1:
        raise ValueError("cond_cap must be >= 1")
    return hidden_instance(np.random.default_rng(seed), n, k, cond_cap)


def separated_points(rng: np.random.Generator, m: int, sep: float,
                     radius: float = 1.0) -> np.ndarray:
    """m complex points, uniform in a disc, pairwise at least ``sep`` apart."""
    pts: list = []
    while len(pts) < m:
        z = radius * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        if all(abs(z - p) >= sep for p in pts):
            pts.append(z)
    return np.array(pts)


def planted_matrix(rng: np.random.Generator, n: int, block: int = 0,
                   sep: float = 1e-2, cond_cap: float = 10.0,
                   radius: float = 3.0) -> np.ndarray:
    """S (J_block(mu) + diag(d)) S^{-1} with distinct eigenvalues at least ``sep`` apart.

    ``block = 0`` gives a diagonalizable matrix.
    """
    if block == 1 or block > n:
        raise ValueError("block size must be 0 or between 2 and n")
    m = n - block + 1 if block else n
    lam = separated_points(rng, m, sep, radius)
    D = np.zeros((n, n), dtype=complex)
    if block:
        D[:block, :block] = lam[0] * np.eye(block) + np.diag(np.ones(block - 1), 1)
        D[block:, block:] = np.diag(lam[1:])
    else:
        D = np.diag(lam)
    S = conditioned_matrix(rng, n, 10 ** rng.uniform(0, np.log10(cond_cap)))
    return np.linalg.solve(S.T, (S @ D).T).T

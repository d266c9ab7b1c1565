"""Eigenvalue clustering and spectral projectors from a Schur form.

Clusters start as single-linkage groups at a fixed radius. A defective
eigenvalue perturbed by roundoff splinters into a ring of computed
eigenvalues far wider than any sensible radius, so single linkage alone
splits it. The pieces of such a split have enormous spectral projectors,
which is the signal used here: any cluster whose projector norm exceeds
``kappa_cap`` is merged with its nearest neighbour until every projector is
moderate. Pieces whose centers coincide are merged as well. A cluster is
represented by the mean of its eigenvalues, which is
accurate even when the individual eigenvalues are not (it is a trace).

The projector onto a cluster is obtained by reordering the Schur form so
that the cluster comes first and solving one Sylvester equation for the
block that decouples it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack
from scipy.sparse.csgraph import connected_components

from .errors import ClusterAmbiguity, NumericalFailure


@dataclass(frozen=True)
class Cluster:
    members: tuple          # indices into the Schur diagonal
    center: complex
    projection: np.ndarray
    projection_norm: float
    spread: float           # max distance from a member eigenvalue to center


def schur_complex(A: np.ndarray):
    try:
        T, Q = sla.schur(A, output="complex")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalFailure(f"Schur decomposition failed: {exc}") from exc
    return T, Q


def _projector(T, Q, members, n):
    m = len(members)
    if m == n:
        return np.eye(n, dtype=complex), 1.0
    select = np.zeros(n, dtype=np.int32)
    select[list(members)] = 1
    ts, qs, _, mm, _, _, info = lapack.ztrsen(select, T, Q, job="N")
    if info != 0 or mm != m:
        raise NumericalFailure(f"Schur reordering failed (info={info})")
    x, scale, info = lapack.ztrsyl(ts[:m, :m], ts[m:, m:], ts[:m, m:], isgn=-1)
    if info < 0 or scale == 0:
        raise NumericalFailure(f"Sylvester solve failed (info={info})")
    X = x / scale
    Q1, Q2 = qs[:, :m], qs[:, m:]
    P = Q1 @ (Q1.conj().T + X @ Q2.conj().T)
    xnorm = np.linalg.norm(X, 2) if X.size else 0.0
    return P, float(np.sqrt(1.0 + xnorm ** 2))


def _nearest(groups, w, i):
    a = w[list(groups[i])]
    best, bj = np.inf, None
    for j, g in enumerate(groups):
        if j == i:
            continue
        d = np.abs(a[:, None] - w[list(g)][None, :]).min()
        if d < best:
            best, bj = d, j
    return bj


def spectral_clusters(A: np.ndarray, radius: float, kappa_cap: float,
                      check_separation: bool = True) -> list:
    """Cluster the spectrum of ``A`` and return one :class:`Cluster` each.

    Output order is by the real part of the center, then the imaginary part.
    """
    n = A.shape[0]
    T, Q = schur_complex(A)
    w = np.diag(T).copy()

    dist = np.abs(w[:, None] - w[None, :])
    _, labels = connected_components(dist <= radius, directed=False)
    groups = []
    for lab in dict.fromkeys(labels.tolist()):
        groups.append(tuple(int(i) for i in np.flatnonzero(labels == lab)))

    cache: dict = {}

    def proj(g):
        key = tuple(sorted(g))
        if key not in cache:
            cache[key] = _projector(T, Q, key, n)
        return cache[key]

    while len(groups) > 1:
        norms = [proj(g)[1] for g in groups]
        bad = [i for i in np.argsort(norms)[::-1] if norms[i] > kappa_cap]
        centers = np.array([w[list(g)].mean() for g in groups])
        close = np.abs(centers[:, None] - centers[None, :]) <= radius
        np.fill_diagonal(close, False)
        if not bad and not close.any():
            break
        parent = list(range(len(groups)))

        def root(i):
            while parent[i] != i:
                i = parent[i]
            return i

        def union(i, j):
            ri, rj = root(i), root(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)

        for i in bad:
            union(int(i), _nearest(groups, w, int(i)))
        for i, j in zip(*np.nonzero(close)):
            union(int(i), int(j))
        merged: dict = {}
        for i, g in enumerate(groups):
            merged.setdefault(root(i), []).extend(g)
        groups = [tuple(sorted(v)) for _, v in sorted(merged.items())]

    if check_separation and len(groups) > 1:
        for a in range(len(groups)):
            for b in range(a + 1, len(groups)):
                d = dist[np.ix_(groups[a], groups[b])].min()
                if d < 2 * radius:
                    raise ClusterAmbiguity(
                        f"eigenvalue clusters only {d:.3g} apart "
                        f"(need more than {2 * radius:.3g})")

    out = []
    for g in groups:
        P, pn = proj(g)
        c = complex(w[list(g)].mean())
        out.append(Cluster(members=g, center=c, projection=P, projection_norm=pn,
                           spread=float(np.abs(w[list(g)] - c).max())))
    out.sort(key=lambda c: (round(c.center.real, 12), round(c.center.imag, 12)))
    return out

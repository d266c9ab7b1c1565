import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jordantri.algebra import (AlgebraBasis, GeneratorSet, associative_closure, closure_defect,
                               derived_algebra, is_engel, jordan_closure, lie_closure,
                               lie_from_jordan, lie_ideal_generated, lower_central_series)
from jordantri.core import DEFAULT, commutator, is_nilpotent
from jordantri.errors import DimensionMismatch
from jordantri.instances import hidden_instance
from jordantri.subspace import matspace_member, matspan

from oracles import E, span_dim, strictly_upper_basis, word_span_dim


def upper_lie(n):
    return lie_closure(strictly_upper_basis(n))


def test_generator_set_validation():
    with pytest.raises(ValueError):
        GeneratorSet.of([])
    with pytest.raises(DimensionMismatch):
        GeneratorSet.of([np.eye(2), np.eye(3)])
    with pytest.raises(ValueError):
        AlgebraBasis(matspan([np.eye(2)]), "ring")


def test_jordan_closure_examples(frozen):
    J = jordan_closure([E(2, 1, 2)])
    assert J.dim == 1
    J = jordan_closure([E(3, 1, 2), E(3, 2, 3)])
    assert J.dim == frozen["closure_dims"]["jordan_e12_e23"]
    assert matspace_member(E(3, 1, 3), J.space)
    assert jordan_closure([np.eye(3)]).dim == 1
    assert J.generation_log[0] == (0, 2) and J.generation_log[-1][1] == 3


def test_associative_closure_examples(frozen):
    assert associative_closure([E(2, 1, 2)]).dim == 1
    A = associative_closure([E(3, 1, 2), E(3, 2, 3)])
    assert A.dim == 3 and matspace_member(E(3, 1, 3), A.space)
    A = associative_closure([E(2, 1, 2), E(2, 2, 1)])
    assert A.dim == frozen["closure_dims"]["assoc_e12_e21"]
    for M in (E(2, 1, 1), E(2, 2, 2)):
        assert matspace_member(M, A.space)


@given(st.integers(0, 2**32 - 1), st.integers(2, 4), st.integers(1, 3))
@settings(max_examples=20, deadline=None)
def test_associative_closure_matches_word_span(seed, n, k):
    rng = np.random.default_rng(seed)
    gens = [rng.standard_normal((n, n)) * (rng.uniform() < 0.7) for _ in range(k)]
    gens = [g if np.any(g) else np.eye(n) for g in gens]
    assert associative_closure(gens).dim == word_span_dim(gens, n * n if n < 4 else 6)


def test_lie_from_jordan_examples(frozen):
    L = lie_from_jordan(jordan_closure([E(2, 1, 2)]))
    assert L.dim == 1 and L.kind == "lie"
    L = lie_from_jordan(jordan_closure([E(3, 1, 2), E(3, 2, 3)]))
    assert L.dim == 3
    J = jordan_closure([E(4, 1, 2) + E(4, 3, 4), E(4, 2, 3)])
    assert J.dim == frozen["closure_dims"]["jordan_e12p34_e23"]
    L = lie_from_jordan(J)
    # [E12+E34, E23] = E13 - E24 is new, so L is one larger than J
    assert L.dim == 5 and closure_defect(L) <= DEFAULT.residual_tol
    assert all(matspace_member(b, L.space) for b in J.basis)


def test_lie_from_jordan_wants_jordan():
    with pytest.raises(ValueError):
        lie_from_jordan(lie_closure([E(2, 1, 2)]))


def test_ideal_examples():
    B = E(3, 1, 2)
    assert lie_ideal_generated(lie_closure([B]), [B]).dim == 1
    L = upper_lie(3)
    I = lie_ideal_generated(L, [E(3, 1, 3)])
    assert I.dim == 1 and I.kind == "ideal"
    I = lie_ideal_generated(L, [E(3, 1, 2)])
    assert I.dim == 2 and matspace_member(E(3, 1, 3), I.space)
    with pytest.raises(ValueError):
        lie_ideal_generated(L, [E(3, 2, 1)])


def test_derived_examples(frozen):
    assert derived_algebra(lie_closure([E(3, 1, 2)])).dim == 0
    D = derived_algebra(upper_lie(3))
    assert D.dim == 1 and matspace_member(E(3, 1, 3), D.space)
    L = upper_lie(4)
    D1 = derived_algebra(L)
    D2 = derived_algebra(D1)
    assert [L.dim, D1.dim, D2.dim] == frozen["derived_series_strictly_upper_4"]


def test_lower_central_series_examples(frozen):
    assert [S.dim for S in lower_central_series(lie_closure([E(3, 1, 2)]))] == [1, 0]
    assert [S.dim for S in lower_central_series(upper_lie(3))] == frozen["lower_central_series"]["strictly_upper_3"]
    sl2 = lie_closure([E(2, 1, 2), E(2, 2, 1)])
    assert [S.dim for S in lower_central_series(sl2)] == frozen["lower_central_series"]["sl2"]


def test_engel_examples():
    assert is_engel(lie_closure([E(3, 1, 2)]))
    for n in (2, 3, 4, 5):
        assert is_engel(upper_lie(n))
    assert not is_engel(lie_closure([np.diag([1.0, -1.0]), E(2, 1, 2), E(2, 2, 1)]))


def _hidden(seed, n, k):
    return hidden_instance(np.random.default_rng(seed), n, k, 10.0).generators


@given(st.integers(0, 2**32 - 1), st.integers(2, 5), st.integers(1, 3))
@settings(max_examples=15, deadline=None)
def test_jordan_closure_contains_powers(seed, n, k):
    J = jordan_closure(_hidden(seed, n, k))
    rng = np.random.default_rng(seed)
    B = np.tensordot(rng.standard_normal(J.dim), J.basis, axes=1)
    assert matspace_member(B @ B, J.space)
    assert closure_defect(J) <= DEFAULT.residual_tol


@given(st.integers(0, 2**32 - 1), st.integers(2, 5), st.integers(1, 3))
@settings(max_examples=15, deadline=None)
def test_lie_from_jordan_is_bracket_closed(seed, n, k):
    L = lie_from_jordan(jordan_closure(_hidden(seed, n, k)))
    B = L.basis
    for i in range(L.dim):
        for j in range(i + 1, L.dim):
            assert matspace_member(commutator(B[i], B[j]), L.space)


@given(st.integers(0, 2**32 - 1), st.integers(2, 5))
@settings(max_examples=15, deadline=None)
def test_ideal_is_bracket_stable(seed, n):
    gens = _hidden(seed, n, 2)
    L = lie_closure(gens)
    I = lie_ideal_generated(L, [gens[0]])
    for x in L.basis:
        for y in I.basis:
            assert matspace_member(commutator(x, y), I.space)


@given(st.integers(0, 2**32 - 1), st.integers(2, 5), st.integers(2, 3))
@settings(max_examples=15, deadline=None)
def test_odd_commutators_stay_in_jordan_closure(seed, n, k):
    gens = _hidden(seed, n, k)
    J = jordan_closure(gens)
    rng = np.random.default_rng(seed)
    for depth in (3, 5):
        idx = rng.integers(0, k, depth)
        X = gens[idx[-1]]
        for i in reversed(idx[:-1]):
            X = commutator(gens[i], X)
        assert matspace_member(X, J.space)


@given(st.integers(0, 2**32 - 1), st.integers(2, 5), st.integers(1, 3))
@settings(max_examples=15, deadline=None)
def test_hidden_model_algebras_are_nilpotent(seed, n, k):
    gens = _hidden(seed, n, k)
    A = associative_closure(gens)
    assert all(is_nilpotent(b) for b in A.basis)
    assert is_engel(lie_closure(gens))
    assert A.dim <= n * (n - 1) // 2


def test_closure_bases_are_orthonormal():
    A = associative_closure([E(2, 1, 2), E(2, 2, 1)])
    V = A.space.vectors()
    assert np.allclose(V.conj().T @ V, np.eye(A.dim))
    assert span_dim(list(A.basis)) == A.dim

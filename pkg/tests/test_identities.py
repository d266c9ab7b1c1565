import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jordantri.algebra import jordan_closure, lie_closure
from jordantri.core import DEFAULT, is_nilpotent, opnorm, trace
from jordantri.errors import DimensionMismatch, HypothesisViolation
from jordantri.identities import (Check, IdentityReport, cartan_T, cartan_criterion,
                                  check_jordan_identities, check_norm_inequalities,
                                  check_trace_words)
from jordantri.identities import _all_words
from jordantri.instances import complex_normal, hidden_instance, strictly_upper
from jordantri.spectral import ad_decomposition, riesz_decomposition
from jordantri.subspace import matspace_member, unvec, vec

from oracles import E, strictly_upper_basis


def test_report_plumbing():
    r = IdentityReport((Check("a", 1e-9, 1e-8), Check("b", 3.0, 1.0)))
    assert not r.passed and r.worst.name == "b"
    assert json.loads(json.dumps(r.to_json()))[0] == {
        "name": "a", "residual": 1e-9, "threshold": 1e-8, "pass": True}
    assert "NO" in r.table()
    assert Check("z", 0.0, 0.0).passed


def test_jordan_identities_examples():
    Z, I = np.zeros((3, 3)), np.eye(3)
    assert all(c.residual == 0 for c in check_jordan_identities(Z, Z, Z, Z).checks)
    assert all(c.residual == 0 for c in check_jordan_identities(I, I, I, I).checks)
    rng = np.random.default_rng(42)
    quad = [complex_normal(rng, (5, 5)) for _ in range(4)]
    rep = check_jordan_identities(*quad)
    assert rep.passed and len(rep.checks) == 4


@given(st.integers(0, 2**32 - 1), st.integers(2, 8))
@settings(max_examples=50)
def test_jordan_identities_are_universal(seed, n):
    rng = np.random.default_rng(seed)
    scale = 10.0 ** rng.uniform(-2, 2)
    quad = [scale * complex_normal(rng, (n, n)) for _ in range(4)]
    assert check_jordan_identities(*quad, threshold=1e-10).passed


def test_jordan_identities_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        check_jordan_identities(np.eye(2), np.eye(2), np.eye(3), np.eye(2))


def test_trace_words_examples():
    J = jordan_closure(strictly_upper_basis(3))
    rep = check_trace_words(J)
    assert rep.passed and len(rep.checks) == 4
    assert all(c.residual == 0 for c in rep.checks)
    assert check_trace_words(jordan_closure([E(2, 1, 2)])).passed


def test_trace_words_negative_control():
    # E12 and E21 are each nilpotent, but E12 E21 = E11
    assert trace(E(2, 1, 2) @ E(2, 2, 1)) == 1
    with pytest.raises(HypothesisViolation):
        check_trace_words(jordan_closure([E(2, 1, 2), E(2, 2, 1)]))


def test_trace_words_refuses_non_nilpotent():
    with pytest.raises(HypothesisViolation):
        check_trace_words(jordan_closure([np.diag([1.0, 0.0])]))
    with pytest.raises(ValueError):
        check_trace_words(lie_closure([E(2, 1, 2)]))


@given(st.integers(0, 2**32 - 1), st.integers(2, 7), st.integers(1, 3))
@settings(max_examples=15, deadline=None)
def test_trace_words_on_hidden_model(seed, n, k):
    gens = hidden_instance(np.random.default_rng(seed), n, k, 100.0).generators
    rep = check_trace_words(jordan_closure(gens), include_ideal=True)
    assert rep.passed, rep.table()
    assert len(rep.checks) == 5


def test_trace_words_sampling_is_seeded():
    J = jordan_closure(strictly_upper_basis(5))
    assert J.dim == 10
    a = check_trace_words(J, seed=3, max_words=1000, samples=50).to_json()
    b = check_trace_words(J, seed=3, max_words=1000, samples=50).to_json()
    assert a == b and "50 sampled words" in a[3]["name"]
    assert "all 1000 words" in a[2]["name"]
    full = check_trace_words(J).to_json()
    assert "all 10000 words" in full[3]["name"]


@pytest.mark.parametrize("length", [1, 2, 3, 4])
def test_all_words_matches_brute_force(length):
    rng = np.random.default_rng(length)
    B = complex_normal(rng, (4, 3, 3))
    norms = np.array([opnorm(b) for b in B])
    worst = 0.0
    for word in itertools.product(range(4), repeat=length):
        W = np.linalg.multi_dot([np.eye(3)] + [B[i] for i in word])
        worst = max(worst, abs(np.trace(W)) / (3 * np.prod(norms[list(word)])))
    assert _all_words(B, norms, length, 3) == pytest.approx(worst, rel=1e-12)


def test_cartan_T_examples(frozen):
    assert np.array_equal(cartan_T(E(3, 1, 2) + E(3, 2, 3)), np.zeros((3, 3)))
    A = np.diag([1 + 1j, 0])
    T = cartan_T(A)
    assert np.allclose(T, np.diag([1 - 1j, 0]))
    assert trace(T @ A) == pytest.approx(frozen["cartan_traces"]["diag_1pi_0"])
    A = np.array([[1.0, 1.0], [0.0, 2.0]])
    T = cartan_T(A)
    D = riesz_decomposition(A)
    assert np.allclose(T, D.projection(1) + 2 * D.projection(2))
    assert trace(T @ A) == pytest.approx(frozen["cartan_traces"]["upper_1_1_0_2"])


@given(st.integers(0, 2**32 - 1), st.integers(1, 8))
@settings(max_examples=30, deadline=None)
def test_cartan_trace_identity(seed, n):
    A = complex_normal(np.random.default_rng(seed), (n, n))
    T = cartan_T(A)
    expect = np.sum(np.abs(np.linalg.eigvals(A)) ** 2)
    assert abs(trace(T @ A) - expect) <= DEFAULT.residual_tol * (1 + expect)


@given(st.integers(0, 2**32 - 1), st.integers(2, 7), st.booleans())
@settings(max_examples=20, deadline=None)
def test_cartan_trace_vanishes_iff_nilpotent(seed, n, nilpotent):
    rng = np.random.default_rng(seed)
    if nilpotent:
        A = hidden_instance(rng, n, 1, 10.0).generators[0]
    else:
        A = complex_normal(rng, (n, n))
    assert (abs(trace(cartan_T(A) @ A)) <= DEFAULT.residual_tol) == is_nilpotent(A) == nilpotent


def test_cartan_criterion_examples():
    rep = cartan_criterion(lie_closure(strictly_upper_basis(3)))
    assert rep.passed and len(rep.checks) == 2
    assert "derived algebra dimension 1" in rep.notes
    rep = cartan_criterion(lie_closure([E(2, 1, 2), E(2, 2, 1)]))
    assert rep.notes == ("hypothesis violated",)
    assert len(rep.checks) == 1 and rep.checks[0].residual == pytest.approx(1.0)
    rep = cartan_criterion(lie_closure([E(2, 1, 2)]))
    assert rep.passed and "derived algebra dimension 0" in rep.notes


def test_cartan_criterion_wants_lie():
    with pytest.raises(ValueError):
        cartan_criterion(jordan_closure([E(2, 1, 2)]))


def test_ad_projections_preserve_invariant_algebra():
    # L = strictly upper 4x4 is ad(A)-invariant for upper triangular A
    rng = np.random.default_rng(11)
    L = lie_closure(strictly_upper_basis(4))
    A = np.triu(complex_normal(rng, (4, 4)))
    for c in ad_decomposition(A).clusters:
        for b in L.basis:
            assert matspace_member(unvec(c.projection @ vec(b), 4), L.space)


def test_norm_examples():
    rep = check_norm_inequalities(np.diag([3.0, 4.0]), np.eye(2))
    assert rep.passed
    I = np.eye(2)
    rep = check_norm_inequalities(I, I)
    assert rep.checks[-1].residual == 0          # equality case 2 = 2
    rng = np.random.default_rng(7)
    A, B = complex_normal(rng, (8, 8)), complex_normal(rng, (8, 8))
    rep = check_norm_inequalities(A, B)
    assert rep.passed and all(c.residual == 0 for c in rep.checks)


@given(st.integers(0, 2**32 - 1), st.integers(1, 16), st.sampled_from(["gauss", "rank1", "upper"]))
@settings(max_examples=40, deadline=None)
def test_norm_inequalities_hold(seed, n, kind):
    rng = np.random.default_rng(seed)
    A = complex_normal(rng, (n, n)) * 10.0 ** rng.uniform(-3, 3)
    if kind == "rank1":
        B = np.outer(complex_normal(rng, n), complex_normal(rng, n))
    elif kind == "upper":
        B = strictly_upper(rng, n)
    else:
        B = complex_normal(rng, (n, n))
    assert check_norm_inequalities(A, B).passed
    assert opnorm(A) >= 0

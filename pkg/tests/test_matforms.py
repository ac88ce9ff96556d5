import random

import pytest

from conftest import jet
from chernforms.forms import Form, FormError, form_equal, wedge
from chernforms.instances import random_form
from chernforms.jetring import ChartSpec
from chernforms.matforms import (LambdaPoly, MatrixForm, OddVectorPair, lambda_equal,
                                 lemma_algebra_check, mat_mul, mat_trace, one_minus_lambda,
                                 rank_one_inverse, super_det)


def odd_pair(rng, chart, k, order=4):
    gen = lambda: random_form(rng, chart, order, degree=1, max_terms=2)
    return OddVectorPair([gen() for _ in range(k)], [gen() for _ in range(k)])


def test_identity_product(C2, rng):
    A = MatrixForm([[random_form(rng, C2, 3, degree=1) for _ in range(2)] for _ in range(2)])
    I = MatrixForm.identity(C2, 2)
    P = mat_mul(I, A)
    assert all(form_equal(P[i, j], A[i, j]) for i in range(2) for j in range(2))


def test_trace_diag(C2):
    w1 = Form.basis(C2, (1,), (1,))
    w2 = Form.basis(C2, (2,), (2,))
    D = MatrixForm([[w1, Form.zero(C2)], [Form.zero(C2), w2]])
    assert form_equal(mat_trace(D), w1 + w2)


def test_associativity_odd_entries(C2, rng):
    mk = lambda: MatrixForm([[random_form(rng, C2, 3, degree=1, max_terms=2)
                              for _ in range(2)] for _ in range(2)])
    A, B, C = mk(), mk(), mk()
    L = mat_mul(mat_mul(A, B), C)
    R = mat_mul(A, mat_mul(B, C))
    assert all(form_equal(L[i, j], R[i, j]) for i in range(2) for j in range(2))


def test_det_identity(C2):
    assert form_equal(super_det(MatrixForm.identity(C2, 3)), Form.const(C2, 1))


def test_det_diagonal(C2):
    one = Form.const(C2, 1)
    w1 = Form.basis(C2, (1,), (1,))
    w2 = Form.basis(C2, (2,), (2,))
    D = MatrixForm([[one + w1, Form.zero(C2)], [Form.zero(C2), one + w2]])
    assert form_equal(super_det(D), one + w1 + w2 + wedge(w1, w2))


def test_det_rejects_odd(C2):
    M = MatrixForm([[Form.dz(C2, 1)]])
    with pytest.raises(FormError):
        super_det(M)


def test_det_rank_two_pair(C3, rng):
    pair = odd_pair(rng, C3, 2)
    a = pair.a()
    want = LambdaPoly(C3, {0: Form.const(C3, 1), 1: -a, 2: wedge(a, a)})
    got = super_det(one_minus_lambda(pair.matrix(), C3))
    assert lambda_equal(got, want)


def test_rank_one_k1_closed_form(C1):
    alpha = Form.dz(C1, 1)
    beta = Form.dzb(C1, 1)
    pair = OddVectorPair([alpha], [beta])
    inv, det = rank_one_inverse(pair)
    a = wedge(alpha, beta)
    expected = LambdaPoly(C1, {0: Form.const(C1, 1), 1: a, 2: -wedge(a, a)})
    assert lambda_equal(inv[0, 0], expected)
    assert lambda_equal(det, LambdaPoly(C1, {0: Form.const(C1, 1), 1: -a}))


def test_rank_one_empty(C2):
    inv, det = rank_one_inverse(OddVectorPair([], []), C2)
    assert inv.size == 0
    assert lambda_equal(det, LambdaPoly.const(C2, 1))


def test_pair_rejects_even(C2):
    with pytest.raises(FormError):
        OddVectorPair([Form.basis(C2, (1,), (1,))], [Form.dz(C2, 1)])


@pytest.mark.parametrize("k", [1, 2, 3])
def test_inverse_by_full_product(C3, k):
    """Multiply (I - lambda A) by the returned inverse entry by entry."""
    pair = odd_pair(random.Random(k), C3, k)
    inv, _ = rank_one_inverse(pair)
    M = one_minus_lambda(pair.matrix(), C3)
    P = mat_mul(M, inv)
    for i in range(k):
        for j in range(k):
            assert lambda_equal(P[i, j], LambdaPoly.const(C3, 1 if i == j else 0))


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_lemma_algebra(C3, k):
    assert lemma_algebra_check(odd_pair(random.Random(100 + k), C3, k))


def test_block_triangular_multiplicative(C2, rng):
    mk = lambda: random_form(rng, C2, 3, bidegree=(1, 1), max_terms=2)
    one = Form.const(C2, 1)
    z = Form.zero(C2)
    a, b, c, d_, e = mk(), mk(), mk(), mk(), mk()
    M = MatrixForm([[one + a, b, c], [z, one + d_, e], [z, z, one + e]])
    lhs = super_det(M)
    rhs = wedge(wedge(one + a, one + d_), one + e)
    assert form_equal(lhs, rhs)

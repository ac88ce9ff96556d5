"""Property-based checks of the algebraic invariants on seeded random instances."""

import random

from hypothesis import given, settings, strategies as st

from chernforms.chernweil import (GeneralMetric, chern_character, chern_total,
                                  lemma_main_check, newton_convert)
from chernforms.forms import (Form, conjugate_form, d, dbar, form_equal, partial, wedge)
from chernforms.instances import (random_complex_jet, random_form, random_general_metric,
                                  random_real_jet, random_structured_metric)
from chernforms.jetring import (EXACT, ChartSpec, GaussianRational, Jet, jet_conjugate,
                                jet_derive, jet_exp, jet_inverse)
from chernforms.matforms import (LambdaPoly, OddVectorPair, lambda_equal, lemma_algebra_check,
                                 mat_mul)
from chernforms import realize as rz

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)
C2 = ChartSpec("complex", 2)
C3 = ChartSpec("complex", 3)
R4 = ChartSpec("real", 4)


def cj(seed, chart=C2, order=4, **kw):
    return random_complex_jet(random.Random(seed), chart, order, **kw)


# --- jets ---------------------------------------------------------------------

@given(seeds, seeds, seeds)
def test_ring_axioms(s1, s2, s3):
    a, b, c = cj(s1), cj(s2, order=3), cj(s3)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert (a * b).order == 3


@given(seeds, seeds, st.integers(0, 3))
def test_derive_leibniz(s1, s2, v):
    a, b = cj(s1), cj(s2)
    assert jet_derive(a * b, v) == jet_derive(a, v) * b + a * jet_derive(b, v)


@given(seeds, st.integers(0, 3), st.integers(0, 3))
def test_mixed_partials(s, u, v):
    a = cj(s)
    assert jet_derive(jet_derive(a, u), v) == jet_derive(jet_derive(a, v), u)


@given(seeds)
def test_inverse_and_exp(s):
    rng = random.Random(s)
    a = random_complex_jet(rng, C2, 4, constant=False) + Jet.const(C2, rng.randint(1, 5), 4)
    one = Jet.const(C2, 1, 4)
    assert a * jet_inverse(a) == one
    u = random_complex_jet(rng, C2, 4, constant=False)
    assert jet_exp(u) * jet_exp(-u) == one


@given(seeds, seeds, st.integers(0, 1))
def test_conjugation_ring_involution(s1, s2, v):
    a, b = cj(s1), cj(s2)
    assert jet_conjugate(jet_conjugate(a)) == a
    assert jet_conjugate(a * b) == jet_conjugate(a) * jet_conjugate(b)
    # conjugation swaps d/dz_v and d/dzb_v
    assert jet_conjugate(jet_derive(a, v)) == jet_derive(jet_conjugate(a), v + 2)


# --- forms --------------------------------------------------------------------

def rform(seed, chart=C2, order=4, **kw):
    rng = random.Random(seed)
    if "degree" not in kw and "bidegree" not in kw:
        kw["degree"] = rng.randint(0, chart.nvars)
    return random_form(rng, chart, order, **kw)


@given(seeds, st.integers(0, 4), st.integers(0, 4))
def test_graded_commutativity(s, p, q):
    a = rform(s, degree=p)
    b = rform(s + 1, degree=q)
    assert form_equal(wedge(a, b), wedge(b, a).scale((-1) ** (p * q)))


@given(seeds, st.integers(0, 3), st.integers(0, 3), st.sampled_from([d, partial, dbar]))
def test_leibniz(s, p, q, D):
    a = rform(s, degree=p)
    b = rform(s + 1, degree=q)
    assert form_equal(D(wedge(a, b)), wedge(D(a), b) + wedge(a, D(b)).scale((-1) ** p))


@given(seeds)
def test_squares_vanish(s):
    a = rform(s)
    assert d(d(a)).is_zero() and partial(partial(a)).is_zero() and dbar(dbar(a)).is_zero()
    assert form_equal(partial(dbar(a)), -dbar(partial(a)))


@given(seeds, seeds)
def test_conjugation_of_forms(s1, s2):
    a, b = rform(s1), rform(s2)
    assert form_equal(conjugate_form(conjugate_form(a)), a)
    assert form_equal(conjugate_form(wedge(a, b)), wedge(conjugate_form(a), conjugate_form(b)))
    assert form_equal(conjugate_form(partial(a)), dbar(conjugate_form(a)))


@given(seeds)
def test_real_chart_d(s):
    a = rform(s, R4, EXACT)
    assert d(d(a)).is_zero()


# --- matrices -------------------------------------------------------------------

def odd_pair(seed, k):
    rng = random.Random(seed)
    gen = lambda: random_form(rng, C3, 4, degree=1, max_terms=2)
    return OddVectorPair([gen() for _ in range(k)], [gen() for _ in range(k)])


@settings(max_examples=15)
@given(seeds, st.integers(1, 3))
def test_A_squared(s, k):
    pair = odd_pair(s, k)
    A = pair.matrix()
    A2 = mat_mul(A, A)
    a = pair.a()
    assert all(form_equal(A2[i, j], -wedge(a, A[i, j])) for i in range(k) for j in range(k))


@settings(max_examples=15)
@given(seeds, st.integers(1, 4))
def test_lemma_algebra_property(s, k):
    assert lemma_algebra_check(odd_pair(s, k))


# --- Chern-Weil -------------------------------------------------------------------

@settings(max_examples=10)
@given(seeds, st.integers(1, 3))
def test_lemma_main_property(s, r):
    m = random_structured_metric(random.Random(s), C2, r, 4)
    assert lemma_main_check(m)


@settings(max_examples=10)
@given(seeds, st.integers(1, 3))
def test_newton_consistency(s, r):
    h = random_general_metric(random.Random(s), C2, r, 4)
    c, chv = chern_total(h), chern_character(h)
    assert lambda_equal(newton_convert(c, "c->ch", r), chv)
    assert lambda_equal(newton_convert(newton_convert(c, "c->ch", r), "ch->c", r), c)


@settings(max_examples=10)
@given(seeds)
def test_character_closed(s):
    chv = chern_character(random_general_metric(random.Random(s), C2, 2, 4))
    for k in (1, 2):
        assert partial(chv.coeff(k)).is_zero() and dbar(chv.coeff(k)).is_zero()


@settings(max_examples=10)
@given(seeds, st.integers(-3, 3), st.integers(-3, 3))
def test_gauge_invariance(s, a, b):
    h = random_general_metric(random.Random(s), C2, 2, 4)
    C = [[GaussianRational(1, a), GaussianRational(b)], [GaussianRational(0), GaussianRational(2, 1)]]
    assert lambda_equal(chern_total(h), chern_total(h.congruent(C)))


# --- decompositions -----------------------------------------------------------------

@settings(max_examples=15)
@given(seeds, st.integers(1, 2))
def test_decompositions_reexpand(s, k):
    rng = random.Random(s)
    a = random_form(rng, C2, 3, bidegree=(k, k), max_terms=2)
    a = a + conjugate_form(a)
    comp = rz.decompose_composite(rz.basic_terms_from_form(a), k)
    assert form_equal(rz.expand_blocks(comp, C2), a)
    elem = rz.decompose_elementary(a, k)
    assert form_equal(rz.expand_blocks(elem, C2), a)


@settings(max_examples=10)
@given(seeds, st.sampled_from([1, 3]))
def test_smooth_realization(s, deg):
    rng = random.Random(s)
    fs = tuple(random_real_jet(rng, R4, EXACT, constant=True, density=0.5)
               for _ in range(deg + 1))
    conns, v = rz.realize_smooth_exact([rz.BasicFormTerm(fs)])
    assert v

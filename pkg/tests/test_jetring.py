from fractions import Fraction

import pytest

from conftest import jet
from chernforms.jetring import (EXACT, ChartSpec, GaussianRational, Jet, JetError,
                                jet_conjugate, jet_derive, jet_exp, jet_from_poly,
                                jet_inverse, jet_mul, parse_gaussian, format_gaussian)

R2 = ChartSpec("real", 2)


def test_gaussian_rational_exact():
    a = GaussianRational(Fraction(1, 3), 2)
    b = GaussianRational(-1, Fraction(1, 7))
    assert (a * b) / b == a
    assert a.conjugate().conjugate() == a
    assert (a + a.conjugate()).im == 0


def test_gaussian_rejects_float():
    with pytest.raises((TypeError, ValueError)):
        GaussianRational.coerce(0.5)


@pytest.mark.parametrize("text", ["3/2-1/2i", "i", "-i", "7", "-2/3+5i", "1/2i", "0"])
def test_gaussian_format_roundtrip(text):
    g = parse_gaussian(text)
    assert parse_gaussian(format_gaussian(g.re, g.im)) == g


def test_from_poly_literal(C1):
    j = jet_from_poly(C1, [((1, 0), 1)], 4)
    assert j.order == 4 and j.coeff((1, 0)) == 1 and j.max_degree() == 1
    assert jet_from_poly(C1, [], 4).is_zero()
    k = jet_from_poly(R2, [((1, 1), Fraction(3, 2))], 2)
    assert k.coeff((1, 1)) == Fraction(3, 2)


def test_from_poly_rejects_high_degree(C1):
    with pytest.raises(JetError, match=r"\(3, 0\)"):
        jet_from_poly(C1, [((3, 0), 1)], 2)


def test_mul_examples(C1):
    a = jet(C1, {"1": "1", "z1": "1"})
    b = jet(C1, {"1": "1", "z1": "-1"})
    assert jet_mul(a, b) == jet(C1, {"1": "1", "z1^2": "-1"})
    assert jet_mul(a, Jet.zero(C1, 4)).is_zero()
    c = jet_mul(jet(C1, {"z1": "1"}, 3), jet(C1, {"zb1": "1"}, 5))
    assert c.order == 3


def test_mul_chart_mismatch(C1, C2):
    with pytest.raises(JetError):
        jet_mul(jet(C1, {"z1": "1"}), jet(C2, {"z1": "1"}))


def test_inverse_examples(C1):
    a = jet(C1, {"1": "1", "z1": "1"}, 3)
    assert jet_inverse(a) == jet(C1, {"1": "1", "z1": "-1", "z1^2": "1", "z1^3": "-1"}, 3)
    assert jet_inverse(Jet.const(C1, 2, 4)) == Jet.const(C1, Fraction(1, 2), 4)
    with pytest.raises(JetError, match="non-invertible"):
        jet_inverse(jet(C1, {"z1": "1"}))


def test_exp_examples(C1):
    assert jet_exp(Jet.zero(C1, 4)) == Jet.const(C1, 1, 4)
    z = jet(C1, {"z1": "1"}, 2)
    assert jet_exp(z) == jet(C1, {"1": "1", "z1": "1", "z1^2": "1/2"}, 2)
    z4 = jet(C1, {"z1": "1"})
    assert jet_exp(z4) * jet_exp(-z4) == Jet.const(C1, 1, 4)
    with pytest.raises(JetError, match="non-nilpotent"):
        jet_exp(Jet.const(C1, 1, 4))


def test_derive_examples(C1):
    a = jet(C1, {"z1^2*zb1": "1"})
    assert jet_derive(a, 0) == jet(C1, {"z1*zb1": "2"}, 3)
    assert jet_derive(a, 0).order == 3
    assert jet_derive(jet(C1, {"z1^2": "1"}), 1).is_zero()
    with pytest.raises(JetError, match="exhausted"):
        jet_derive(jet(C1, {"1": "1"}, 0), 0)


def test_conjugate_examples(C1):
    assert jet_conjugate(jet(C1, {"z1": "i"})) == jet(C1, {"zb1": "-i"})
    zz = jet(C1, {"z1*zb1": "1"})
    assert jet_conjugate(zz) == zz
    with pytest.raises(JetError):
        jet_conjugate(jet(R2, {"x1": "1"}))


def test_exact_order_propagation(C2):
    a = jet(C2, {"z1": "1"}, EXACT)
    b = jet(C2, {"zb2": "2"}, 3)
    assert (a + b).order == 3 and (a * a).order == EXACT


def test_equality_ignores_explicit_zeros(C1):
    a = Jet(C1, 4, {0: 1, 1: 0})
    assert a == Jet.const(C1, 1, 4)


def test_evaluate(C1):
    a = jet(C1, {"1": "2", "z1*zb1": "i"})
    assert abs(a.evaluate([1 + 1j, 1 - 1j]) - (2 + 2j)) < 1e-12

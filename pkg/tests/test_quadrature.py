import math

import pytest

from conftest import jet
from chernforms import quadrature as quad
from chernforms.chernweil import GeneralMetric, line_metric
from chernforms.forms import Form, d, max_abs_coeff
from chernforms.jetring import ChartSpec, Jet
from chernforms.realize import cs_closed_form

S = quad.QuadratureScheme


# --- Poincare-Lelong -----------------------------------------------------------

def test_pl_inverse_fs():
    r = quad.pl_check(quad.pl_examples()["inverse-fs"])
    assert r.target == -1 and r.residual <= 1e-4


def test_pl_complement_positive():
    r = quad.pl_check(quad.pl_examples()["fs-complement"])
    assert abs(r.integral - 1) <= 1e-4


def test_pl_constant():
    r = quad.pl_check(quad.pl_examples()["constant"], S(radial=4, angular=4))
    assert r.residual < 1e-14


@pytest.mark.parametrize("name", ["inverse-fs", "quartic"])
def test_pl_refinement_halves(name):
    phi = quad.pl_examples()[name]
    table = quad.refinement_table(lambda s: quad.pl_check(phi, s).residual, S(radial=8), 3)
    assert quad.converges(table)


def test_pl_singular_rejected():
    phi = quad.RationalFunction({(0, 0): 1}, {(1, 1): 1})   # 1/|w|^2
    with pytest.raises(quad.QuadratureError):
        quad.pl_check(phi)


def test_scheme_validation():
    with pytest.raises(quad.QuadratureError):
        S(radial=0)
    assert S().refined().to_dict() == {"radial": 48, "angular": 16, "fiber": 128}


def test_converges_logic():
    sch = S()
    assert quad.converges([(sch, 1e-3), (sch, 4e-4), (sch, 1e-4)])
    assert not quad.converges([(sch, 1e-3), (sch, 9e-4)])
    assert quad.converges([(sch, 1e-13), (sch, 2e-13)])


# --- Chern-Simons ----------------------------------------------------------------

def test_cs_rank1_transgression_and_closed_form():
    fam = quad.cs_examples()["rank1"]
    t = quad.cs_transgression(fam)
    assert t.residual <= 1e-3
    cs = quad.cs_numeric(fam)
    eta = fam.a1[0][0]
    assert quad.form_residual(cs, cs_closed_form(eta), 2) <= 1e-3


def test_cs_rank2_transgression():
    t = quad.cs_transgression(quad.cs_examples()["rank2"])
    assert t.relative <= 1e-3


def test_cs_constant_family():
    R = ChartSpec("real", 2)
    fam = quad.ConnectionFamily.line(Form.zero(R, 3))
    assert max_abs_coeff(quad.cs_numeric(fam)) == 0


def test_cs_family_independence():
    ex = quad.cs_examples()
    a = quad.cs_numeric(ex["rank1"])
    b = quad.cs_numeric(ex["rank1-squared-bump"])
    assert quad.cs_transgression(ex["rank1-squared-bump"]).residual <= 1e-3
    assert quad.form_residual(d(a), d(b), 2) <= 2e-3


def test_cs_refinement():
    fam = quad.cs_examples()["rank1"]
    table = quad.refinement_table(lambda s: quad.cs_transgression(fam, s).residual,
                                  S(fiber=16), 3)
    assert quad.converges(table)


def test_cs_family_validation():
    R = ChartSpec("real", 2)
    with pytest.raises(quad.QuadratureError):
        quad.ConnectionFamily([[Form.dx(R, 1)]], [[Form.dx(R, 1), Form.dx(R, 2)]])
    with pytest.raises(quad.QuadratureError):
        quad.ConnectionFamily.line(Form.dx(R, 1), "boxcar")


# --- Bott-Chern ------------------------------------------------------------------

def test_bc_rank1_degree_zero():
    fam = quad.bc_examples()["rank1"]
    bc = quad.bc_numeric(fam)
    s1, s2 = fam.sigmas
    diff = (s2 - s1).truncate(2)
    got = bc.function_part()
    for exps, c in diff.terms():
        assert abs(got.coeff(exps) - complex(c)) < 1e-3


@pytest.mark.parametrize("name", ["rank1", "rank2"])
def test_bc_transgression(name):
    t = quad.bc_transgression(quad.bc_examples()[name])
    assert t.relative <= 1e-3


def test_bc_equal_endpoints():
    C1 = ChartSpec("complex", 1)
    s = jet(C1, {"z1*zb1": "1", "z1": "1", "zb1": "1"})
    bc = quad.bc_numeric(quad.MetricFamily.line(s, s), S(radial=4, angular=2))
    assert max_abs_coeff(bc) < 1e-12


def test_bc_refinement_rank1():
    fam = quad.bc_examples()["rank1"]
    table = quad.refinement_table(lambda s: quad.bc_transgression(fam, s).relative,
                                  S(radial=8, angular=2), 3)
    assert quad.converges(table)


def test_bc_family_validation():
    C1 = ChartSpec("complex", 1)
    h1 = line_metric(jet(C1, {"z1*zb1": "1"}))
    h2 = GeneralMetric.identity(C1, 2, 4)
    with pytest.raises(quad.QuadratureError):
        quad.MetricFamily(h1, h2)
    with pytest.raises(quad.QuadratureError):
        quad.MetricFamily(h1, h1, "exponent")

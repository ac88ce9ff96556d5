"""Floating-point fiber integrals: Poincare-Lelong check, Chern-Simons forms
over S^1 and Bott-Chern forms over P^1.

Everything here is numeric: jets carry float coefficients and lambda is the
number sqrt(-1)/2pi.  The exact engine is reused at each fiber node by
adjoining the fiber coordinate as one more jet variable.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .chernweil import GeneralMetric, chern_character
from .forms import Form, FormError, d, max_abs_coeff, wedge, wedge_sign
from .jetring import EXACT, ChartSpec, Jet, JetError, jet_exp, key_degree
from .matforms import LambdaPoly, MatrixForm, mat_mul, mat_trace

LAMBDA = 1j / (2 * math.pi)

NumericForm = Form


class QuadratureError(ValueError):
    pass


@dataclass(frozen=True)
class QuadratureScheme:
    """radial: Gauss-Legendre nodes on [0, 1] per disk chart; angular: uniform
    nodes on the circle; fiber: trapezoid intervals on [pi, 2pi]."""

    radial: int = 24
    angular: int = 8
    fiber: int = 64

    def __post_init__(self):
        for name in ("radial", "angular", "fiber"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise QuadratureError(f"{name} node count must be a positive integer")

    def refined(self, factor: int = 2) -> "QuadratureScheme":
        return QuadratureScheme(self.radial * factor, self.angular * factor, self.fiber * factor)

    def to_dict(self):
        return {"radial": self.radial, "angular": self.angular, "fiber": self.fiber}


def _disk_nodes(scheme: QuadratureScheme):
    """(point, weight * log|w|^2) pairs for int_{|w|<=1} F log|w|^2 dA."""
    x, wr = np.polynomial.legendre.leggauss(scheme.radial)
    r = (x + 1) / 2
    wr = wr / 2
    M = scheme.angular
    out = []
    for ri, wi in zip(r, wr):
        for j in range(M):
            th = 2 * math.pi * j / M
            out.append((complex(ri * math.cos(th), ri * math.sin(th)),
                        float(wi * ri * 2 * math.log(ri) * 2 * math.pi / M)))
    return out


# ---------------------------------------------------------------------------
# Poincare-Lelong

@dataclass
class RationalFunction:
    """P(w, wb)/Q(w, wb) with dicts {(a, b): coefficient} for w^a wb^b."""

    num: dict
    den: dict = field(default_factory=lambda: {(0, 0): 1})

    def _deg(self):
        keys = list(self.num) + list(self.den)
        return max(a for a, _ in keys), max(b for _, b in keys)

    def inverted(self) -> "RationalFunction":
        """The same function in u = 1/w."""
        A, B = self._deg()
        return RationalFunction({(A - a, B - b): c for (a, b), c in self.num.items()},
                                {(A - a, B - b): c for (a, b), c in self.den.items()})

    @staticmethod
    def _eval_poly(p, w):
        return sum(complex(c) * w ** a * w.conjugate() ** b for (a, b), c in p.items())

    def value(self, w: complex) -> complex:
        q = self._eval_poly(self.den, w)
        if abs(q) < 1e-300:
            raise QuadratureError(f"test function singular at w={w}")
        return self._eval_poly(self.num, w) / q

    def value_at_infinity(self) -> complex:
        return self.inverted().value(0j)

    def jet_at(self, w0: complex, order: int = 2) -> Jet:
        """Numeric jet of the function in (delta, delta-bar) around w0."""
        ch = ChartSpec("complex", 1)
        W = Jet.var(ch, 0, order, numeric=True) + Jet.const(ch, w0, order, numeric=True)
        Wb = Jet.var(ch, 1, order, numeric=True) + Jet.const(ch, w0.conjugate(), order, numeric=True)

        def poly(p):
            acc = Jet.zero(ch, order, numeric=True)
            for (a, b), c in sorted(p.items()):
                acc = acc + (W ** a * Wb ** b).scale(complex(c))
            return acc
        q = poly(self.den)
        if abs(q.constant_term()) < 1e-300:
            raise QuadratureError(f"test function singular at w={w0}")
        return poly(self.num) / q


@dataclass
class PLResult:
    integral: complex
    target: complex
    residual: float
    scheme: QuadratureScheme

    def to_dict(self):
        return {"integral": [self.integral.real, self.integral.imag],
                "target": [self.target.real, self.target.imag],
                "residual": self.residual, "scheme": self.scheme.to_dict()}


def _ddbar_density(phi: RationalFunction, w0: complex) -> complex:
    """(i/2pi) dbar del phi = -(1/pi) phi_{w wb} dx dy."""
    j = phi.jet_at(w0, 2)
    return -j.coeff((1, 1)) / math.pi


def pl_check(phi: RationalFunction, scheme: QuadratureScheme | None = None) -> PLResult:
    """|int_{P^1} (i/2pi) dbar del phi log|w|^2 - (phi(inf) - phi(0))|."""
    scheme = scheme or QuadratureScheme()
    psi = phi.inverted()
    phi.value(0j)
    psi.value(0j)
    total = 0j
    # log|w|^2 = -log|u|^2 on the outer chart
    for fn, sign in ((phi, 1.0), (psi, -1.0)):
        for w0, wt in _disk_nodes(scheme):
            total += sign * wt * _ddbar_density(fn, w0)
    target = phi.value_at_infinity() - phi.value(0j)
    return PLResult(total, target, abs(total - target), scheme)


# ---------------------------------------------------------------------------
# chart extension helpers

def _embed_jet(j: Jet, chart: ChartSpec, varmap) -> Jet:
    return j.to_numeric().embed(chart, varmap)


def _embed_form(a: Form, chart: ChartSpec, varmap) -> Form:
    out = {}
    for m, j in a.terms.items():
        nm = 0
        for v in range(a.chart.nvars):
            if m >> v & 1:
                nm |= 1 << varmap[v]
        out[nm] = _embed_jet(j, chart, varmap)
    return Form(chart, out, a.order)


def _restrict(j: Jet, drop: Sequence[int], chart: ChartSpec, varmap) -> Jet:
    """Set the fiber offsets to zero and move to the base chart."""
    for v in drop:
        j = j.substitute_zero(v)
    return j.embed(chart, varmap)


def numeric_lambda(p: LambdaPoly, top: int | None = None) -> Form:
    """Evaluate a formal lambda-polynomial at lambda = i/2pi."""
    acc = None
    for k, c in sorted(p.coeffs.items()):
        if top is not None and k > top:
            continue
        t = c.to_numeric().scale(LAMBDA ** k)
        acc = t if acc is None else acc + t
    return acc if acc is not None else Form.zero(p.chart)


def form_residual(a: Form, b: Form, order=None) -> float:
    """max |coefficient| of a - b up to the common valid (or given) order."""
    diff = a.to_numeric() - b.to_numeric()
    o = diff.order if order is None else min(diff.order, order)
    return max_abs_coeff(diff.truncate(o))


# ---------------------------------------------------------------------------
# Chern-Simons forms on a real chart

def _bump_taylor(kind: str, theta0: float, order: int) -> list:
    """Taylor coefficients of s(theta0 + delta), s(0) = 0, s(pi) = 1."""
    c = [math.cos(theta0), -math.sin(theta0), -math.cos(theta0), math.sin(theta0)]
    s1 = [0.5 - 0.5 * c[0]] + [-0.5 * c[j % 4] / math.factorial(j) for j in range(1, order + 1)]
    if kind == "cosine":
        return s1
    if kind == "cosine-squared":
        out = [0.0] * (order + 1)
        for i, a in enumerate(s1):
            for j, b in enumerate(s1):
                if i + j <= order:
                    out[i + j] += a * b
        return out
    raise QuadratureError(f"unknown interpolation {kind!r}")


@dataclass
class ConnectionFamily:
    """Normalized connections A = -2 pi i a on a trivial bundle over a real
    chart; a0, a1 are square lists of 1-forms.  The family over S^1 is
    a0 + s(theta)(a1 - a0)."""

    a0: list
    a1: list
    interpolation: str = "cosine"

    def __post_init__(self):
        r = len(self.a0)
        if r == 0 or len(self.a1) != r:
            raise QuadratureError("endpoint connections must have the same rank")
        for A in (self.a0, self.a1):
            for row in A:
                if len(row) != r:
                    raise QuadratureError("connection matrix must be square")
                for x in row:
                    if x.chart.is_complex or not x.is_zero() and x.degrees() != {1}:
                        raise QuadratureError("connection entries must be 1-forms on a real chart")
        s0 = _bump_taylor(self.interpolation, 0.0, 0)[0]
        spi = _bump_taylor(self.interpolation, math.pi, 0)[0]
        if abs(s0) > 1e-12 or abs(spi - 1) > 1e-12:
            raise QuadratureError("interpolation does not match the endpoints")

    @property
    def chart(self) -> ChartSpec:
        return self.a0[0][0].chart

    @property
    def rank(self) -> int:
        return len(self.a0)

    @classmethod
    def line(cls, eta: Form, interpolation="cosine") -> "ConnectionFamily":
        return cls([[Form.zero(eta.chart, eta.order)]], [[eta]], interpolation)


def connection_ch(a: list, top: int) -> Form:
    """ch of A = -2 pi i a: lambda F = da - 2 pi i a ^ a; sum_k Tr((lambda F)^k)/k!."""
    r = len(a)
    A = MatrixForm([[x.to_numeric() for x in row] for row in a])
    G = A.map(d)
    if r > 1:
        G = G + mat_mul(A, A).scale(-2j * math.pi)
    chart = a[0][0].chart
    out = Form.const(chart, r, G.entries[0][0].order, numeric=True)
    P = None
    for k in range(1, top // 2 + 1):
        P = G if P is None else mat_mul(P, G)
        out = out + mat_trace(P).scale(1.0 / math.factorial(k))
    return out


def cs_numeric(family: ConnectionFamily, scheme: QuadratureScheme | None = None,
               order: int = 3) -> Form:
    """cs = int_{[pi, 2pi]} of the dtheta-component of ch of the family over
    X x S^1 (dtheta placed last), composite trapezoid on a uniform grid."""
    scheme = scheme or QuadratureScheme()
    base = family.chart
    m = base.nvars
    ext = ChartSpec("real", m + 1)
    N = order + 1
    ident = list(range(m))
    a0 = [[_embed_form(x.truncate(N), ext, ident) for x in row] for row in family.a0]
    a1 = [[_embed_form(x.truncate(N), ext, ident) for x in row] for row in family.a1]
    r = family.rank
    theta = 1 << m
    M = scheme.fiber
    h = math.pi / M
    back = list(range(m)) + [0]
    acc = Form(base, {}, order)
    for j in range(M + 1):
        th = math.pi + j * h
        wt = h * (0.5 if j in (0, M) else 1.0)
        coeffs = _bump_taylor(family.interpolation, th, N)
        s = Jet.zero(ext, N, numeric=True)
        dv = Jet.const(ext, 1.0, N, numeric=True)
        delta = Jet.var(ext, m, N, numeric=True)
        for c in coeffs:
            s = s + dv.scale(c)
            dv = dv * delta
        at = [[a0[i][k] + (a1[i][k] - a0[i][k]).times_function(s) for k in range(r)]
              for i in range(r)]
        chx = connection_ch(at, m + 1)
        terms = {}
        for mask, jet in chx.terms.items():
            if not mask & theta:
                continue
            bm = mask & ~theta
            # e_mask = sign * e_bm ^ dtheta
            sgn = wedge_sign(bm, theta)
            terms[bm] = _restrict(jet, [m], base, back).scale(sgn * wt)
        acc = acc + Form(base, terms, order)
    return acc


@dataclass
class TransgressionResult:
    residual: float
    scale: float
    scheme: QuadratureScheme
    order: int

    @property
    def relative(self) -> float:
        return self.residual / self.scale if self.scale else self.residual

    def to_dict(self):
        return {"residual": self.residual, "relative": self.relative,
                "scheme": self.scheme.to_dict(), "verified_order": self.order}


def cs_transgression(family: ConnectionFamily, scheme: QuadratureScheme | None = None,
                     order: int = 3, check_order: int = 2) -> TransgressionResult:
    """||d cs - (ch(a1) - ch(a0))|| up to x-order check_order."""
    scheme = scheme or QuadratureScheme()
    cs = cs_numeric(family, scheme, order)
    top = family.chart.nvars
    delta = connection_ch(family.a1, top) - connection_ch(family.a0, top)
    o = min(check_order, order - 1)
    res = form_residual(d(cs), delta, o)
    return TransgressionResult(res, max_abs_coeff(delta.truncate(o)), scheme, o)


# ---------------------------------------------------------------------------
# Bott-Chern forms on a complex chart

@dataclass
class MetricFamily:
    """Endpoint metrics over P^1 with t = |w|^2/(1+|w|^2): 'entry' mixes the
    entries (1-t) h1 + t h2; 'exponent' (rank one) uses exp((1-t) s1 + t s2)."""

    h1: GeneralMetric
    h2: GeneralMetric
    rule: str = "entry"
    sigmas: tuple | None = None

    def __post_init__(self):
        if self.h1.rank != self.h2.rank or self.h1.chart != self.h2.chart:
            raise QuadratureError("endpoint metrics differ in rank or chart")
        if self.rule not in ("entry", "exponent"):
            raise QuadratureError(f"unknown interpolation rule {self.rule!r}")
        if self.rule == "exponent" and (self.sigmas is None or self.h1.rank != 1):
            raise QuadratureError("the exponent rule needs rank one and exponents")

    @classmethod
    def line(cls, s1: Jet, s2: Jet) -> "MetricFamily":
        h1 = GeneralMetric([[jet_exp(s1)]], check=False)
        h2 = GeneralMetric([[jet_exp(s2)]], check=False)
        return cls(h1, h2, "exponent", (s1, s2))

    @property
    def chart(self):
        return self.h1.chart


def _fiber_t(ext: ChartSpec, w0: complex, order: int, outer: bool) -> Jet:
    n = ext.dim - 1
    W = Jet.var(ext, n, order, numeric=True) + Jet.const(ext, w0, order, numeric=True)
    Wb = Jet.var(ext, 2 * n + 1, order, numeric=True) + Jet.const(ext, w0.conjugate(), order,
                                                                  numeric=True)
    a = W * Wb
    one = Jet.const(ext, 1.0, order, numeric=True)
    # w-chart: t = |w|^2/(1+|w|^2); u-chart (u = 1/w): t = 1/(1+|u|^2)
    return (one if outer else a) / (one + a)


def bc_numeric(family: MetricFamily, scheme: QuadratureScheme | None = None,
               order: int = 4) -> Form:
    """bc = int_{P^1} ch(family) log|w|^2, with lambda = i/2pi; the fiber
    coordinate is placed last and dw ^ dwb = -2i dx dy."""
    scheme = scheme or QuadratureScheme(radial=16, angular=2)
    base = family.chart
    n = base.dim
    ext = ChartSpec("complex", n + 1)
    vmap = list(range(n)) + [n + 1 + i for i in range(n)]
    back = list(range(n)) + [0] + [n + i for i in range(n)] + [0]
    wmask = (1 << n) | (1 << (2 * n + 1))
    r = family.h1.rank
    if family.rule == "exponent":
        s1, s2 = (_embed_jet(s.truncate(order), ext, vmap) for s in family.sigmas)
    else:
        H1 = [[_embed_jet(x.truncate(order), ext, vmap) for x in row] for row in family.h1.entries]
        H2 = [[_embed_jet(x.truncate(order), ext, vmap) for x in row] for row in family.h2.entries]
    acc = Form(base, {}, order - 2)
    for outer, sign in ((False, 1.0), (True, -1.0)):
        for w0, wt in _disk_nodes(scheme):
            t = _fiber_t(ext, w0, order, outer)
            if family.rule == "exponent":
                H = [[jet_exp(s1 + (s2 - s1) * t)]]
            else:
                H = [[H1[i][j] + (H2[i][j] - H1[i][j]) * t for j in range(r)] for i in range(r)]
            chx = chern_character(GeneralMetric(H, check=False), n + 1)
            terms = {}
            for k, form in chx.coeffs.items():
                if k == 0:
                    continue
                lk = LAMBDA ** k
                for mask, jet in form.terms.items():
                    if mask & wmask != wmask:
                        continue
                    bm = mask & ~wmask
                    sgn = wedge_sign(bm, wmask)
                    base_mask = 0
                    for v in range(2 * n + 2):
                        if bm >> v & 1:
                            base_mask |= 1 << back[v]
                    val = _restrict(jet, [n, 2 * n + 1], base, back).scale(
                        lk * sgn * (-2j) * sign * wt)
                    terms[base_mask] = terms[base_mask] + val if base_mask in terms else val
            acc = acc + Form(base, terms, order - 2)
    return acc


def bc_transgression(family: MetricFamily, scheme: QuadratureScheme | None = None,
                     order: int = 4) -> TransgressionResult:
    """||(i/2pi) dbar del bc - (ch(h2) - ch(h1))|| relative to the size of the
    exact difference, compared through x-order order - 4."""
    from .forms import ddbar
    scheme = scheme or QuadratureScheme(radial=16, angular=2)
    bc = bc_numeric(family, scheme, order)
    n = family.chart.dim
    exact = chern_character(family.h2, n) - chern_character(family.h1, n)
    delta = numeric_lambda(exact)
    o = order - 4
    lhs = ddbar(bc).scale(LAMBDA)
    res = form_residual(lhs, delta, o)
    return TransgressionResult(res, max_abs_coeff(delta.truncate(o)), scheme, o)


# ---------------------------------------------------------------------------
# refinement

def refinement_table(run: Callable[[QuadratureScheme], float], scheme: QuadratureScheme,
                     levels: int = 3) -> list:
    """[(scheme, residual)] for scheme, 2 scheme, 4 scheme, ..."""
    out = []
    s = scheme
    for _ in range(levels):
        out.append((s, run(s)))
        s = s.refined()
    return out


def converges(table, factor: float = 2.0, floor: float = 1e-12) -> bool:
    """Each doubling divides the residual by at least `factor`, unless both
    residuals already sit at the roundoff floor."""
    for (_, a), (_, b) in zip(table, table[1:]):
        if b <= floor and a <= floor:
            continue
        if b > a / factor and b > floor:
            return False
    return True


# ---------------------------------------------------------------------------
# shipped examples

def pl_examples() -> dict:
    return {
        "inverse-fs": RationalFunction({(0, 0): 1}, {(0, 0): 1, (1, 1): 1}),
        "fs-complement": RationalFunction({(1, 1): 1}, {(0, 0): 1, (1, 1): 1}),
        "constant": RationalFunction({(0, 0): 3}),
        "quartic": RationalFunction({(0, 0): 1, (1, 0): 1, (0, 1): 1},
                                    {(0, 0): 2, (2, 2): 1}),
    }


def cs_examples() -> dict:
    from .jetring import GaussianRational as G
    r4 = ChartSpec("real", 4)
    x = [Jet.var(r4, i) for i in range(4)]
    one = Form.const(r4, 1)

    def fdg(f, g):
        return wedge(Form.function(f), d(Form.function(g)))
    eta = fdg(x[0] + x[1] * x[2], x[1]) + fdg(x[2], x[3] + x[0] * x[0])
    r3 = ChartSpec("real", 3)
    y = [Jet.var(r3, i) for i in range(3)]
    dy = [d(Form.function(v)) for v in y]
    z = Form.zero(r3)
    a1 = [[dy[0].times_function(y[1]), dy[2].times_function(y[0] + 1)],
          [dy[1].scale(G(1, 1)).times_function(y[2]), dy[0].times_function(y[0] * y[1])]]
    return {
        "rank1": ConnectionFamily.line(eta),
        "rank1-squared-bump": ConnectionFamily.line(eta, "cosine-squared"),
        "rank2": ConnectionFamily([[z, z], [z, z]], a1),
    }


def bc_examples() -> dict:
    from .chernweil import StructuredMetric, direct_sum, line_metric, metric_assemble
    from .jetring import GaussianRational as G
    c1 = ChartSpec("complex", 1)
    z, zb = Jet.var(c1, 0), Jet.var(c1, 1)
    s1 = z * zb + z + zb
    s2 = (z * zb).scale(2) - (z * z + zb * zb)
    c2 = ChartSpec("complex", 2)
    z1, z2, w1, w2 = (Jet.var(c2, i) for i in range(4))
    sig = z1 * w1 + z2 * w2 + z1 * w2 + z2 * w1
    f = z1 + z2 * w1 + z1 * z2
    h = metric_assemble(StructuredMetric(sig.truncate(4), [f.truncate(4)]))
    h0 = direct_sum([line_metric(sig.truncate(4)), GeneralMetric.identity(c2, 1, 4)])
    return {
        "rank1": MetricFamily.line(s1.truncate(4), s2.truncate(4)),
        "rank2": MetricFamily(h0, h),
    }

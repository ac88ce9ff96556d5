"""Exterior algebra of differential forms with jet coefficients.

Wedge basis elements are bitmasks.  On a complex chart of dimension n bit
i-1 is dz_i and bit n+i-1 is dzb_i, so the canonical order
dz1 < ... < dzn < dzb1 < ... < dzbn is plain bit order.  Conveniently the
bit of a generator equals the jet variable index it differentiates, which
makes d, del and delbar one loop each.  Real charts use bit i-1 for dx_i.

A single :class:`Form` may mix degrees; ``MixedForm`` is the same class.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .jetring import (EXACT, ChartSpec, GaussianRational, Jet, JetError,
                      format_gaussian, jet_conjugate, jet_derive, jet_sum_products,
                      key_degree, monomial_str, parse_gaussian, parse_monomial)


class FormError(ValueError):
    pass


_SIGN: dict[tuple[int, int], int] = {}


def wedge_sign(a: int, b: int) -> int:
    """Sign of e_a ^ e_b relative to the sorted basis element e_{a|b}."""
    key = (a, b)
    s = _SIGN.get(key)
    if s is None:
        if a & b:
            s = 0
        else:
            inv = 0
            bb = b
            while bb:
                low = bb & -bb
                inv += bin(a & ~((low << 1) - 1)).count("1")
                bb ^= low
            s = -1 if inv & 1 else 1
        _SIGN[key] = s
    return s


def popcount(m: int) -> int:
    return bin(m).count("1")


def split_mask(mask: int, chart: ChartSpec) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """(I, J) as 1-based index tuples; J empty on real charts."""
    n = chart.dim
    bits = [i for i in range(chart.nvars) if mask >> i & 1]
    if not chart.is_complex:
        return tuple(b + 1 for b in bits), ()
    return (tuple(b + 1 for b in bits if b < n),
            tuple(b - n + 1 for b in bits if b >= n))


def make_mask(chart: ChartSpec, I=(), J=()) -> int:
    m = 0
    for i in I:
        if not 1 <= i <= chart.dim:
            raise FormError(f"basis index {i} out of range")
        m |= 1 << (i - 1)
    if J:
        if not chart.is_complex:
            raise FormError("dzb indices on a real chart")
        for j in J:
            if not 1 <= j <= chart.dim:
                raise FormError(f"basis index {j} out of range")
            m |= 1 << (chart.dim + j - 1)
    if popcount(m) != len(I) + len(J):
        raise FormError("repeated basis index")
    return m


def mask_bidegree(mask: int, chart: ChartSpec):
    if not chart.is_complex:
        return popcount(mask)
    lo = mask & ((1 << chart.dim) - 1)
    return popcount(lo), popcount(mask >> chart.dim)


def _basis_label(mask: int, chart: ChartSpec) -> str:
    if mask == 0:
        return "1"
    I, J = split_mask(mask, chart)
    if chart.is_complex:
        return "^".join([f"dz{i}" for i in I] + [f"dzb{j}" for j in J])
    return "^".join(f"dx{i}" for i in I)


class Form:
    """A (possibly inhomogeneous) differential form on a chart.

    ``terms`` maps wedge-basis masks to coefficient jets; zero coefficients
    are never stored.  ``order`` is the valid jet order of the whole form,
    which survives even when every coefficient vanishes.
    """

    __slots__ = ("chart", "terms", "order")

    def __init__(self, chart: ChartSpec, terms: dict | None = None, order=None):
        self.chart = chart
        terms = {m: j for m, j in (terms or {}).items() if not j.is_zero()}
        if order is None:
            order = min((j.order for j in (terms or {}).values()), default=EXACT)
        self.order = order
        self.terms = {m: (j.truncate(order) if j.order > order else j) for m, j in terms.items()}
        for m, j in self.terms.items():
            if j.chart != chart:
                raise FormError("coefficient jet lives on another chart")
            if m >> chart.nvars:
                raise FormError("basis mask out of range")

    # -- construction ------------------------------------------------------
    @classmethod
    def zero(cls, chart, order=EXACT):
        return cls(chart, {}, order)

    @classmethod
    def function(cls, f: Jet) -> "Form":
        return cls(f.chart, {0: f}, f.order)

    @classmethod
    def const(cls, chart, c, order=EXACT, numeric=False):
        return cls.function(Jet.const(chart, c, order, numeric))

    @classmethod
    def basis(cls, chart, I=(), J=(), coeff=None, order=EXACT):
        if coeff is None:
            coeff = Jet.const(chart, 1, order)
        return cls(chart, {make_mask(chart, I, J): coeff}, coeff.order)

    @classmethod
    def dz(cls, chart, i, order=EXACT):
        return cls.basis(chart, (i,), (), order=order)

    @classmethod
    def dzb(cls, chart, i, order=EXACT):
        return cls.basis(chart, (), (i,), order=order)

    @classmethod
    def dx(cls, chart, i, order=EXACT):
        return cls.basis(chart, (i,), order=order)

    # -- inspection --------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    @property
    def numeric(self) -> bool:
        return any(j.numeric for j in self.terms.values())

    def degrees(self) -> set:
        return {popcount(m) for m in self.terms}

    def bidegrees(self) -> set:
        return {mask_bidegree(m, self.chart) for m in self.terms}

    def is_homogeneous(self) -> bool:
        return len(self.bidegrees()) <= 1

    def is_even(self) -> bool:
        return all(popcount(m) % 2 == 0 for m in self.terms)

    def is_odd(self) -> bool:
        return all(popcount(m) % 2 == 1 for m in self.terms)

    def component(self, p, q=None) -> "Form":
        """The (p,q) part on complex charts, the degree-p part on real ones."""
        if q is None:
            return self.degree_part(p)
        return Form(self.chart, {m: j for m, j in self.terms.items()
                                 if mask_bidegree(m, self.chart) == (p, q)}, self.order)

    def degree_part(self, k: int) -> "Form":
        return Form(self.chart, {m: j for m, j in self.terms.items() if popcount(m) == k},
                    self.order)

    def coeff(self, I=(), J=()) -> Jet:
        m = make_mask(self.chart, I, J)
        return self.terms.get(m, Jet.zero(self.chart, self.order))

    def function_part(self) -> Jet:
        return self.terms.get(0, Jet.zero(self.chart, self.order))

    def truncate(self, order) -> "Form":
        if order >= self.order:
            return self
        return Form(self.chart, {m: j.truncate(order) for m, j in self.terms.items()}, order)

    def to_numeric(self) -> "Form":
        return Form(self.chart, {m: j.to_numeric() for m, j in self.terms.items()}, self.order)

    def __repr__(self):
        if not self.terms:
            return f"Form(0; order={self.order})"
        parts = [f"[{j.to_str()}] {_basis_label(m, self.chart)}"
                 for m, j in sorted(self.terms.items())]
        return "Form(" + " + ".join(parts) + f"; order={self.order})"

    # -- linear structure --------------------------------------------------
    def _check(self, other: "Form"):
        if self.chart != other.chart:
            raise FormError(f"chart mismatch: {self.chart} vs {other.chart}")

    def _lift(self, other) -> Optional["Form"]:
        if isinstance(other, Form):
            self._check(other)
            return other
        if isinstance(other, Jet):
            return Form.function(other)
        try:
            numeric = isinstance(other, (float, complex))
            return Form.const(self.chart, other, numeric=numeric)
        except (TypeError, ValueError):
            return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        order = min(self.order, o.order)
        terms = dict(self.terms)
        for m, j in o.terms.items():
            terms[m] = terms[m] + j if m in terms else j
        return Form(self.chart, terms, order)

    __radd__ = __add__

    def __neg__(self):
        return Form(self.chart, {m: -j for m, j in self.terms.items()}, self.order)

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def scale(self, c) -> "Form":
        return Form(self.chart, {m: j.scale(c) for m, j in self.terms.items()}, self.order)

    def times_function(self, f: Jet) -> "Form":
        if f.chart != self.chart:
            raise FormError("chart mismatch")
        return Form(self.chart, {m: j * f for m, j in self.terms.items()},
                    min(self.order, f.order))

    def __mul__(self, other):
        if isinstance(other, Form):
            return wedge(self, other)
        if isinstance(other, Jet):
            return self.times_function(other)
        try:
            return self.scale(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Jet):
            return self.times_function(other)
        try:
            return self.scale(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __truediv__(self, c):
        if isinstance(c, (float, complex)):
            return self.scale(1 / c)
        return self.scale(GaussianRational(1) / GaussianRational.coerce(c))

    def __pow__(self, k: int) -> "Form":
        if k < 0:
            raise FormError("negative wedge power")
        out = Form.const(self.chart, 1, numeric=self.numeric)
        for _ in range(k):
            out = wedge(out, self)
        return out

    def __eq__(self, other):
        o = self._lift(other) if not isinstance(other, Form) else other
        if o is None:
            return NotImplemented
        return bool(form_equal(self, o))

    __hash__ = None

    # -- calculus shortcuts ------------------------------------------------
    def d(self):
        return exterior_derivative(self, "d")

    def partial(self):
        return exterior_derivative(self, "del")

    def dbar(self):
        return exterior_derivative(self, "delbar")

    def conjugate(self):
        return conjugate_form(self)

    def is_real(self) -> bool:
        return bool(form_equal(self, conjugate_form(self)))


MixedForm = Form


# ---------------------------------------------------------------------------

def _constant_scalar(a: Form):
    """The scalar c when a is the constant function c, else None."""
    if not a.terms:
        return 0
    if len(a.terms) != 1 or 0 not in a.terms:
        return None
    j = a.terms[0]
    if j.keys() != {0}:
        return None
    return j.constant_term()


def wedge(a: Form, b: Form) -> Form:
    """Graded product; Koszul signs come from sorting into the canonical basis."""
    a._check(b)
    order = min(a.order, b.order)
    # constant scalar factors (identity entries, unit forms) need no jet products
    for x, y in ((a, b), (b, a)):
        c = _constant_scalar(x)
        if c is not None:
            if c == 0:
                return Form(a.chart, {}, order)
            if x.numeric and not y.numeric:
                y = y.to_numeric()
            return Form(a.chart, {m: j.scale(c) for m, j in y.terms.items()}, order)
    buckets: dict[int, list] = {}
    for ma, ja in a.terms.items():
        for mb, jb in b.terms.items():
            s = wedge_sign(ma, mb)
            if s:
                buckets.setdefault(ma | mb, []).append((s < 0, ja, jb))
    numeric = a.numeric or b.numeric
    terms = {m: jet_sum_products(a.chart, items, order, numeric)
             for m, items in buckets.items()}
    return Form(a.chart, terms, order)


def wedge_all(forms, chart=None) -> Form:
    forms = list(forms)
    if not forms:
        return Form.const(chart, 1)
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


_FLAVORS = {"d": "d", "del": "del", "partial": "del", "∂": "del",
            "delbar": "delbar", "dbar": "delbar", "∂̄": "delbar"}


def exterior_derivative(a: Form, flavor: str = "d") -> Form:
    """d, del (z-derivatives) or delbar (zb-derivatives)."""
    fl = _FLAVORS.get(flavor)
    if fl is None:
        raise FormError(f"unknown derivative flavor {flavor!r}")
    ch = a.chart
    if fl != "d" and not ch.is_complex:
        raise FormError("del/delbar need a complex chart")
    if a.order != EXACT and a.order < 1:
        raise JetError("order exhausted")
    if fl == "d":
        vars_ = range(ch.nvars)
    elif fl == "del":
        vars_ = range(ch.dim)
    else:
        vars_ = range(ch.dim, 2 * ch.dim)
    order = a.order - 1 if a.order != EXACT else EXACT
    buckets: dict[int, list] = {}
    for m, j in a.terms.items():
        for v in vars_:
            bit = 1 << v
            if m & bit:
                continue
            dj = jet_derive(j, v)
            if dj.is_zero():
                continue
            s = wedge_sign(bit, m)
            buckets.setdefault(m | bit, []).append((s < 0, dj, None))
    terms = {m: jet_sum_products(ch, items, order, a.numeric) for m, items in buckets.items()}
    return Form(ch, terms, order)


def d(a):
    return exterior_derivative(_as_form(a), "d")


def partial(a):
    return exterior_derivative(_as_form(a), "del")


def dbar(a):
    return exterior_derivative(_as_form(a), "delbar")


def ddbar(a):
    """delbar del, the operator written first in every identity here."""
    return dbar(partial(a))


def _as_form(a):
    return Form.function(a) if isinstance(a, Jet) else a


def _conj_mask(m: int, n: int) -> tuple[int, int]:
    lo = m & ((1 << n) - 1)
    hi = m >> n
    sign = -1 if (popcount(lo) * popcount(hi)) & 1 else 1
    return (hi | (lo << n)), sign


def conjugate_form(a: Form) -> Form:
    if not a.chart.is_complex:
        raise FormError("conjugation needs a complex chart")
    n = a.chart.dim
    terms = {}
    for m, j in a.terms.items():
        cm, s = _conj_mask(m, n)
        cj = jet_conjugate(j)
        terms[cm] = cj if s > 0 else -cj
    return Form(a.chart, terms, a.order)


def real_part(a: Form) -> Form:
    return (a + conjugate_form(a)).scale(GaussianRational(1) / 2)


# ---------------------------------------------------------------------------
# comparison

@dataclass
class Verdict:
    """Outcome of an identity check."""

    equal: bool
    order: object = EXACT
    mismatch: Optional[dict] = None
    detail: dict = field(default_factory=dict)

    def __bool__(self):
        return self.equal

    def to_dict(self):
        return {"equal": self.equal, "verified_order": order_str(self.order),
                "mismatch": self.mismatch}


def order_str(order):
    return "exact" if order == EXACT else int(order)


def form_equal(a: Form, b: Form, order=None) -> Verdict:
    """Compare coefficientwise up to the common valid order."""
    a._check(b)
    n = min(a.order, b.order)
    if order is not None:
        n = min(n, order)
    for m in sorted(set(a.terms) | set(b.terms)):
        ja = a.terms.get(m)
        jb = b.terms.get(m)
        keys = (ja.keys() if ja is not None else set()) | (jb.keys() if jb is not None else set())
        for k in sorted(keys, key=lambda k: (key_degree(k), k)):
            if key_degree(k) > n:
                continue
            va = ja.coeff_key(k) if ja is not None else GaussianRational(0)
            vb = jb.coeff_key(k) if jb is not None else GaussianRational(0)
            if va != vb:
                I, J = split_mask(m, a.chart)
                return Verdict(False, n, {
                    "I": list(I), "J": list(J),
                    "monomial": monomial_str(k, a.chart),
                    "left": str(va), "right": str(vb)})
    return Verdict(True, n)


def max_abs_coeff(a: Form) -> float:
    """Largest coefficient modulus (for numeric residuals)."""
    best = 0.0
    for j in a.terms.values():
        for k in j.keys():
            best = max(best, abs(complex(j.coeff_key(k))))
    return best


# ---------------------------------------------------------------------------
# serialization

def jet_to_dict(j: Jet) -> dict:
    return {monomial_str(k, j.chart): str(j.coeff_key(k)) if not j.numeric
            else repr(j.coeff_key(k))
            for k in sorted(j.keys(), key=lambda k: (key_degree(k), k))}


def jet_from_dict(chart: ChartSpec, d: dict, order) -> Jet:
    re, im = {}, {}
    for mono, c in d.items():
        k = parse_monomial(mono, chart)
        g = parse_gaussian(c)
        re[k] = re.get(k, 0) + g.re
        im[k] = im.get(k, 0) + g.im
    return Jet(chart, order, re, im)


def form_to_dict(a: Form) -> dict:
    out = {"chart": a.chart.to_dict(), "order": order_str(a.order), "terms": []}
    for m in sorted(a.terms):
        I, J = split_mask(m, a.chart)
        rec = {"I": list(I)}
        if a.chart.is_complex:
            rec["J"] = list(J)
        rec["coeffs"] = jet_to_dict(a.terms[m])
        out["terms"].append(rec)
    return out


def form_from_dict(d: dict) -> Form:
    chart = ChartSpec.from_dict(d["chart"])
    order = EXACT if d.get("order", "exact") == "exact" else int(d["order"])
    terms = {}
    for rec in d["terms"]:
        m = make_mask(chart, rec.get("I", ()), rec.get("J", ()))
        terms[m] = jet_from_dict(chart, rec["coeffs"], order)
    return Form(chart, terms, order)


__all__ = ["Form", "MixedForm", "FormError", "Verdict", "wedge", "wedge_all",
           "exterior_derivative", "d", "partial", "dbar", "ddbar", "conjugate_form",
           "real_part", "form_equal", "form_to_dict", "form_from_dict", "jet_to_dict",
           "jet_from_dict", "make_mask", "split_mask", "mask_bidegree", "wedge_sign",
           "popcount", "format_gaussian", "max_abs_coeff", "order_str"]

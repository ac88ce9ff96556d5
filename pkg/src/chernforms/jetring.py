"""Truncated multivariate power series (jets) over the Gaussian rationals.

A jet lives on a chart.  Complex charts of dimension n carry the 2n
independent variables z1..zn, zb1..zbn; real charts carry x1..xm.  Every
jet remembers the order up to which its coefficients are trustworthy and
that order is propagated through arithmetic.

Monomials are packed into a single integer (8 bits per exponent) so a
monomial product is an integer addition.  Real and imaginary parts are
stored in separate sparse dicts, which keeps real-valued jets cheap.
"""

from __future__ import annotations

import cmath
import math
from math import gcd
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

from gmpy2 import mpq

EXACT = math.inf  # valid order of a polynomial known exactly
_BITS = 8
_MASK = (1 << _BITS) - 1
_MAX_EXP = _MASK


class JetError(ValueError):
    """Raised on contract violations in jet arithmetic."""


# ---------------------------------------------------------------------------
# scalars

def _to_mpq(x):
    if isinstance(x, bool):
        return mpq(int(x))
    if isinstance(x, str):
        return mpq(Fraction(x.strip()))
    return mpq(x)


class GaussianRational:
    """Exact element p + q i of Q(i)."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, GaussianRational):
            re, im = re.re, re.im + _to_mpq(im)
        elif isinstance(re, complex):
            raise TypeError("floating complex values are not exact")
        elif isinstance(re, float):
            raise TypeError("floats are not exact; pass a Fraction or string")
        self.re = _to_mpq(re)
        self.im = _to_mpq(im)

    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        return cls(x)

    I: "GaussianRational"

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __add__(self, o):
        o = _gr_or_none(o)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o):
        o = _gr_or_none(o)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        o = _gr_or_none(o)
        if o is None:
            return NotImplemented
        return o - self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, o):
        o = _gr_or_none(o)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = _gr_or_none(o)
        if o is None:
            return NotImplemented
        n = o.re * o.re + o.im * o.im
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return self * GaussianRational(o.re / n, -o.im / n)

    def __rtruediv__(self, o):
        o = _gr_or_none(o)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, k: int):
        if k < 0:
            return (GaussianRational(1) / self) ** (-k)
        out = GaussianRational(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, o):
        o = _gr_or_none(o)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({self})"

    def __str__(self):
        return format_gaussian(self.re, self.im)

    @classmethod
    def parse(cls, text: str) -> "GaussianRational":
        return parse_gaussian(text)


GaussianRational.I = GaussianRational(0, 1)


def _gr_or_none(o):
    if isinstance(o, GaussianRational):
        return o
    if isinstance(o, (int, Fraction)) or type(o).__name__ == "mpq":
        return GaussianRational(o)
    return None


def _fmt_q(q) -> str:
    q = mpq(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def format_gaussian(re, im) -> str:
    """Render p/q + r/s i in the report format, e.g. '3/2-1/2i'."""
    re, im = mpq(re), mpq(im)
    if im == 0:
        return _fmt_q(re)
    ims = "" if abs(im) == 1 else _fmt_q(abs(im))
    if re == 0:
        return ("-" if im < 0 else "") + ims + "i"
    return _fmt_q(re) + ("-" if im < 0 else "+") + ims + "i"


def parse_gaussian(text) -> GaussianRational:
    """Inverse of :func:`format_gaussian`; also accepts plain ints."""
    if isinstance(text, (int, Fraction)):
        return GaussianRational(text)
    s = str(text).replace(" ", "")
    try:
        if not s.endswith(("i", "j")):
            return GaussianRational(Fraction(s))
        body = s[:-1]
        cut = max(body.rfind("+"), body.rfind("-"))
        if cut > 0:
            re_s, im_s = body[:cut], body[cut:]
        else:
            re_s, im_s = "0", body
        if im_s in ("", "+", "-"):
            im_s += "1"
        return GaussianRational(Fraction(re_s), Fraction(im_s))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot parse Gaussian rational {text!r}") from exc


# ---------------------------------------------------------------------------
# charts and monomials

@dataclass(frozen=True)
class ChartSpec:
    """A coordinate chart: complex of dimension n (2n jet variables) or real."""

    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in ("complex", "real"):
            raise JetError(f"unknown chart kind {self.kind!r}")
        if not isinstance(self.dim, int) or self.dim < 1:
            raise JetError("chart dimension must be a positive integer")

    @property
    def is_complex(self) -> bool:
        return self.kind == "complex"

    @property
    def nvars(self) -> int:
        return 2 * self.dim if self.is_complex else self.dim

    def var_names(self) -> list[str]:
        if self.is_complex:
            return ([f"z{i + 1}" for i in range(self.dim)]
                    + [f"zb{i + 1}" for i in range(self.dim)])
        return [f"x{i + 1}" for i in range(self.dim)]

    def z(self, i: int) -> int:
        """Variable index of z_i (1-based)."""
        return i - 1

    def zb(self, i: int) -> int:
        return self.dim + i - 1

    def to_dict(self):
        return {"kind": self.kind, "dim": self.dim}

    @classmethod
    def from_dict(cls, d):
        return cls(d["kind"], int(d["dim"]))


def complex_chart(n: int) -> ChartSpec:
    return ChartSpec("complex", n)


def real_chart(m: int) -> ChartSpec:
    return ChartSpec("real", m)


_DEG: dict[int, int] = {0: 0}


def key_degree(k: int) -> int:
    d = _DEG.get(k)
    if d is None:
        d, kk = 0, k
        while kk:
            d += kk & _MASK
            kk >>= _BITS
        _DEG[k] = d
    return d


def pack(exps: Iterable[int]) -> int:
    k = 0
    for i, e in enumerate(exps):
        if e < 0 or e > _MAX_EXP:
            raise JetError(f"exponent {e} out of range")
        k |= e << (_BITS * i)
    return k


def unpack(k: int, nvars: int) -> tuple[int, ...]:
    return tuple((k >> (_BITS * i)) & _MASK for i in range(nvars))


def var_exponent(k: int, var: int) -> int:
    return (k >> (_BITS * var)) & _MASK


def monomial_str(k: int, chart: ChartSpec) -> str:
    if k == 0:
        return "1"
    parts = []
    for name, e in zip(chart.var_names(), unpack(k, chart.nvars)):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def parse_monomial(text: str, chart: ChartSpec) -> int:
    text = text.strip()
    if text == "1":
        return 0
    names = {n: i for i, n in enumerate(chart.var_names())}
    exps = [0] * chart.nvars
    for part in text.split("*"):
        name, _, e = part.strip().partition("^")
        if name not in names:
            raise JetError(f"unknown variable {name!r} for chart {chart}")
        exps[names[name]] += int(e) if e else 1
    return pack(exps)


# ---------------------------------------------------------------------------
# sparse kernels
#
# Exact jets keep integer numerators over one positive common denominator;
# numeric jets keep floats with denominator 1.

def _sorted_terms(d: dict) -> list:
    return sorted(((key_degree(k), k, v) for k, v in d.items()), key=lambda t: t[0])


def _mul_into(a: list, b: list, order, acc: dict, factor):
    """acc += factor * a*b truncated at total degree `order`."""
    get = acc.get
    for da, ka, va in a:
        room = order - da
        if room < 0:
            break
        if factor != 1:
            va = va * factor
        for db, kb, vb in b:
            if db > room:
                break
            k = ka + kb
            acc[k] = get(k, 0) + va * vb


def _clean(d: dict) -> dict:
    return {k: v for k, v in d.items() if v}


def _min_order(a, b):
    return a if a <= b else b


def _split_q(x):
    """(numerator, denominator) of an exact rational-like value."""
    if isinstance(x, int):
        return x, 1
    q = _to_mpq(x)
    return int(q.numerator), int(q.denominator)


def _reduce(re: dict, im: dict, den: int):
    if den == 1:
        return re, im, 1
    g = gcd(den, *re.values(), *im.values())
    if g > 1:
        re = {k: v // g for k, v in re.items()}
        im = {k: v // g for k, v in im.items()}
        den //= g
    return re, im, den


# Gaussian integers a + b i are packed as a + b*2**K (Kronecker substitution), so
# one big-int product yields ac + (ad + bc) 2**K + bd 2**2K.  K is chosen so no
# slot can overflow; slots are then read back in balanced form.

def _pack_width(bits: int, pairs: int) -> int:
    K = bits + pairs.bit_length() + 3
    return (K + 31) & ~31


def _unpack(acc: dict, K: int):
    B = 1 << K
    half = B >> 1
    mask = B - 1
    re, im = {}, {}
    for k, V in acc.items():
        s0 = V & mask
        if s0 >= half:
            s0 -= B
        V = (V - s0) >> K
        s1 = V & mask
        if s1 >= half:
            s1 -= B
        s2 = (V - s1) >> K
        x = s0 - s2
        if x:
            re[k] = x
        if s1:
            im[k] = s1
    return re, im


def _as_int_gauss(c: "GaussianRational"):
    """c = (p + q i)/s with integers p, q and s > 0."""
    pr, qr = _split_q(c.re)
    pi, qi = _split_q(c.im)
    s = qr * qi // gcd(qr, qi)
    return pr * (s // qr), pi * (s // qi), s


# ---------------------------------------------------------------------------
# Jet

class Jet:
    """Immutable truncated power series on a chart.

    Coefficients are exact Gaussian rationals, stored as integer numerators
    over a shared denominator, or Python floats when the jet is numeric
    (used only by the quadrature layer).
    """

    __slots__ = ("chart", "order", "_re", "_im", "_den", "numeric", "_sre", "_sim",
                 "_pk", "_nbits")

    def __init__(self, chart: ChartSpec, order, re: dict | None = None,
                 im: dict | None = None, numeric: bool = False, den: int = 1,
                 _trusted=False):
        if order != EXACT and (order < 0 or int(order) != order):
            raise JetError("valid order must be a non-negative integer")
        self.chart = chart
        self.order = order if order == EXACT else int(order)
        self.numeric = numeric
        re = re or {}
        im = im or {}
        if not _trusted:
            if numeric:
                re = {k: float(v) / den for k, v in re.items() if v}
                im = {k: float(v) / den for k, v in im.items() if v}
                den = 1
            else:
                qre = {k: _to_mpq(v) / den for k, v in re.items() if v}
                qim = {k: _to_mpq(v) / den for k, v in im.items() if v}
                den = 1
                for v in list(qre.values()) + list(qim.values()):
                    d = int(v.denominator)
                    den = den * d // gcd(den, d)
                re = {k: int(v * den) for k, v in qre.items()}
                im = {k: int(v * den) for k, v in qim.items()}
                re, im, den = _reduce(re, im, den)
            for k in list(re) + list(im):
                if key_degree(k) > self.order:
                    raise JetError(
                        f"monomial {monomial_str(k, chart)} exceeds order {order}")
        self._re = re
        self._im = im
        self._den = den
        self._sre = None
        self._sim = None
        self._pk = None
        self._nbits = None

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls, chart, order=EXACT, numeric=False):
        return cls(chart, order, numeric=numeric, _trusted=True)

    @classmethod
    def const(cls, chart, value, order=EXACT, numeric=False):
        if numeric:
            c = complex(value)
            return cls(chart, order, {0: c.real}, {0: c.imag}, numeric=True)
        g = GaussianRational.coerce(value)
        p, q, s = _as_int_gauss(g)
        return cls(chart, order, {0: p} if p else {}, {0: q} if q else {}, den=s,
                   _trusted=True)

    @classmethod
    def var(cls, chart, index: int, order=EXACT, numeric=False):
        if not 0 <= index < chart.nvars:
            raise JetError(f"variable index {index} out of range")
        if order < 1:
            return cls.zero(chart, order, numeric)
        one = 1.0 if numeric else 1
        return cls(chart, order, {1 << (_BITS * index): one}, numeric=numeric, _trusted=True)

    # -- inspection --------------------------------------------------------
    def _terms_re(self):
        if self._sre is None:
            self._sre = _sorted_terms(self._re)
        return self._sre

    def _terms_im(self):
        if self._sim is None:
            self._sim = _sorted_terms(self._im)
        return self._sim

    def _bits(self) -> int:
        if self._nbits is None:
            self._nbits = max((abs(v).bit_length() for d in (self._re, self._im)
                               for v in d.values()), default=0)
        return self._nbits

    def _packed(self, K: int):
        """Sorted (degree, key, re + im * 2**K) triples for exact jets."""
        pk = self._pk
        if pk is None or pk[0] != K:
            re, im = self._re, self._im
            vals = dict(re)
            for k, v in im.items():
                vals[k] = vals.get(k, 0) + (v << K)
            pk = self._pk = (K, _sorted_terms(vals))
        return pk[1]

    def keys(self) -> set:
        return set(self._re) | set(self._im)

    def coeff_key(self, k: int):
        if self.numeric:
            return complex(self._re.get(k, 0.0), self._im.get(k, 0.0))
        return GaussianRational(mpq(self._re.get(k, 0), self._den),
                                mpq(self._im.get(k, 0), self._den))

    def coeff(self, exps) -> GaussianRational:
        return self.coeff_key(pack(exps))

    def terms(self) -> Iterator[tuple[tuple[int, ...], GaussianRational]]:
        """Yield (exponent tuple, coefficient) in a deterministic order."""
        for k in sorted(self.keys()):
            yield unpack(k, self.chart.nvars), self.coeff_key(k)

    def constant_term(self):
        return self.coeff_key(0)

    def is_zero(self) -> bool:
        return not self._re and not self._im

    def is_real_valued(self) -> bool:
        return not self._im

    def max_degree(self) -> int:
        return max((key_degree(k) for k in self.keys()), default=0)

    def __repr__(self):
        o = "exact" if self.order == EXACT else self.order
        return f"Jet({self.to_str()}; order={o})"

    def to_str(self) -> str:
        if self.is_zero():
            return "0"
        parts = []
        for k in sorted(self.keys(), key=lambda k: (key_degree(k), k)):
            c = self.coeff_key(k)
            parts.append(f"({c})*{monomial_str(k, self.chart)}")
        return " + ".join(parts)

    # -- helpers -----------------------------------------------------------
    def _check(self, other: "Jet"):
        if self.chart != other.chart:
            raise JetError(f"chart mismatch: {self.chart} vs {other.chart}")

    def _new(self, order, re, im, den=None, numeric=None, reduce=False):
        if den is None:
            den = self._den
        num = self.numeric if numeric is None else numeric
        if reduce and not num:
            re, im, den = _reduce(re, im, den)
        return Jet(self.chart, order, re, im, num, den, _trusted=True)

    def to_numeric(self) -> "Jet":
        if self.numeric:
            return self
        d = self._den
        return Jet(self.chart, self.order,
                   {k: v / d for k, v in self._re.items()},
                   {k: v / d for k, v in self._im.items()}, numeric=True, _trusted=True)

    def _coerce(self, other) -> "Jet | None":
        if isinstance(other, Jet):
            self._check(other)
            if self.numeric and not other.numeric:
                return other.to_numeric()
            return other
        if self.numeric and isinstance(other, (int, float, complex, Fraction)):
            return Jet.const(self.chart, other, numeric=True)
        g = _gr_or_none(other)
        if g is None:
            return None
        return Jet.const(self.chart, g)

    # -- ring operations ---------------------------------------------------
    def truncate(self, order) -> "Jet":
        if order >= self.order:
            return self
        if order < 0:
            raise JetError("order exhausted")
        return self._new(order,
                         {k: v for k, v in self._re.items() if key_degree(k) <= order},
                         {k: v for k, v in self._im.items() if key_degree(k) <= order},
                         reduce=True)

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a = self.to_numeric() if o.numeric and not self.numeric else self
        order = _min_order(a.order, o.order)
        a, o = a.truncate(order), o.truncate(order)
        da, db = a._den, o._den
        if da == db:
            fa = fb = 1
            den = da
        else:
            den = da * db // gcd(da, db)
            fa, fb = den // da, den // db
        re = {k: v * fa for k, v in a._re.items()} if fa != 1 else dict(a._re)
        for k, v in o._re.items():
            re[k] = re.get(k, 0) + v * fb
        im = {k: v * fa for k, v in a._im.items()} if fa != 1 else dict(a._im)
        for k, v in o._im.items():
            im[k] = im.get(k, 0) + v * fb
        return a._new(order, _clean(re), _clean(im), den, a.numeric or o.numeric, reduce=True)

    __radd__ = __add__

    def __neg__(self):
        return self._new(self.order, {k: -v for k, v in self._re.items()},
                         {k: -v for k, v in self._im.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def scale(self, c) -> "Jet":
        """Multiply by a scalar (Gaussian rational, or complex for numeric jets)."""
        if self.numeric or isinstance(c, (float, complex)):
            a = self.to_numeric()
            c = complex(c)
            cr, ci = c.real, c.imag
            re, im = {}, {}
            for k in a.keys():
                xr, xi = a._re.get(k, 0.0), a._im.get(k, 0.0)
                r, i = xr * cr - xi * ci, xr * ci + xi * cr
                if r:
                    re[k] = r
                if i:
                    im[k] = i
            return a._new(a.order, re, im, 1, True)
        g = GaussianRational.coerce(c)
        cr, ci, s = _as_int_gauss(g)
        den = self._den * s
        if not ci:
            if not cr:
                return self._new(self.order, {}, {}, 1)
            return self._new(self.order, {k: v * cr for k, v in self._re.items()},
                             {k: v * cr for k, v in self._im.items()}, den, reduce=True)
        re, im = {}, {}
        for k in self.keys():
            xr, xi = self._re.get(k, 0), self._im.get(k, 0)
            r, i = xr * cr - xi * ci, xr * ci + xi * cr
            if r:
                re[k] = r
            if i:
                im[k] = i
        return self._new(self.order, re, im, den, reduce=True)

    def __mul__(self, other):
        if isinstance(other, Jet):
            return jet_mul(self, other)
        if _gr_or_none(other) is not None or isinstance(other, (float, complex)):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if _gr_or_none(other) is not None or isinstance(other, (float, complex)):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return jet_mul(self, jet_inverse(other))
        if isinstance(other, (float, complex)) or self.numeric:
            return self.scale(1 / complex(other))
        g = _gr_or_none(other)
        if g is None:
            return NotImplemented
        return self.scale(GaussianRational(1) / g)

    def __pow__(self, k: int):
        if k < 0:
            return jet_inverse(self) ** (-k)
        out = Jet.const(self.chart, 1, numeric=self.numeric)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def equals(self, other, order=None) -> bool:
        """Coefficient-wise equality up to the common valid order."""
        o = self._coerce(other)
        if o is None:
            return False
        n = _min_order(self.order, o.order)
        if order is not None:
            n = _min_order(n, order)
        diff = self - o
        return diff.truncate(n).is_zero() if n != EXACT else diff.is_zero()

    def __eq__(self, other):
        if not isinstance(other, Jet) and self._coerce(other) is None:
            return NotImplemented
        return self.equals(other)

    __hash__ = None

    def __bool__(self):
        return not self.is_zero()

    # -- calculus ----------------------------------------------------------
    def derive(self, var: int) -> "Jet":
        return jet_derive(self, var)

    def conjugate(self) -> "Jet":
        return jet_conjugate(self)

    def inverse(self) -> "Jet":
        return jet_inverse(self)

    def exp(self) -> "Jet":
        return jet_exp(self)

    def real_part(self) -> "Jet":
        """(a + conj a)/2 on complex charts; coefficientwise real part otherwise."""
        if self.chart.is_complex:
            return (self + jet_conjugate(self)).scale(GaussianRational(mpq(1, 2)))
        return self._new(self.order, dict(self._re), {}, reduce=True)

    def imag_part(self) -> "Jet":
        if self.chart.is_complex:
            return (self - jet_conjugate(self)).scale(GaussianRational(0, mpq(-1, 2)))
        return self._new(self.order, dict(self._im), {}, reduce=True)

    def is_real(self) -> bool:
        """Conjugation-fixed on complex charts, real coefficients on real charts."""
        if self.chart.is_complex:
            return self.equals(jet_conjugate(self))
        return not self._im

    def substitute_zero(self, var: int) -> "Jet":
        """Drop every monomial containing `var`."""
        return self._new(self.order,
                         {k: v for k, v in self._re.items() if not var_exponent(k, var)},
                         {k: v for k, v in self._im.items() if not var_exponent(k, var)},
                         reduce=True)

    def embed(self, chart: ChartSpec, varmap: list[int]) -> "Jet":
        """Rename variable i to varmap[i] on another chart."""
        n = self.chart.nvars

        def mk(d):
            out = {}
            for k, v in d.items():
                nk = 0
                for i, ei in enumerate(unpack(k, n)):
                    if ei:
                        nk += ei << (_BITS * varmap[i])
                out[nk] = out.get(nk, 0) + v
            return _clean(out)
        return Jet(chart, self.order, mk(self._re), mk(self._im), self.numeric, self._den,
                   _trusted=True)

    def map_keys(self, fn) -> "Jet":
        """Apply a monomial-key map; fn returns (new_key, integer factor) or None."""
        re, im = {}, {}
        for src, dst in ((self._re, re), (self._im, im)):
            for k, v in src.items():
                r = fn(k)
                if r is None:
                    continue
                nk, f = r
                dst[nk] = dst.get(nk, 0) + v * f
        return self._new(self.order, _clean(re), _clean(im), reduce=True)

    def evaluate(self, point) -> complex:
        """Numerically evaluate the stored polynomial at a point (floats)."""
        vals = [complex(p) for p in point]
        tot = 0j
        for k in self.keys():
            m = 1 + 0j
            for i, e in enumerate(unpack(k, self.chart.nvars)):
                if e:
                    m *= vals[i] ** e
            tot += complex(self.coeff_key(k)) * m
        return tot


# ---------------------------------------------------------------------------
# top-level operations

def jet_from_poly(chart: ChartSpec, terms, order) -> Jet:
    """Build a jet from (multi-index, coefficient) pairs or a dict of them."""
    if isinstance(terms, dict):
        terms = terms.items()
    re, im = {}, {}
    for idx, c in terms:
        idx = tuple(idx)
        if len(idx) != chart.nvars:
            raise JetError(f"multi-index {idx} has wrong length for {chart}")
        if sum(idx) > order:
            raise JetError(f"term {idx} has degree {sum(idx)} > order {order}")
        g = parse_gaussian(c) if isinstance(c, str) else GaussianRational.coerce(c)
        k = pack(idx)
        re[k] = re.get(k, 0) + g.re
        im[k] = im.get(k, 0) + g.im
    return Jet(chart, order, re, im)


def jet_mul(a: Jet, b: Jet) -> Jet:
    a._check(b)
    if a.numeric != b.numeric:
        a, b = a.to_numeric(), b.to_numeric()
    order = _min_order(a.order, b.order)
    lim = order if order != EXACT else 1 << 30
    if not a.numeric:
        na, nb = len(a._re) + len(a._im), len(b._re) + len(b._im)
        K = _pack_width(a._bits() + b._bits() + 1, na * nb)
        acc = {}
        _mul_into(a._packed(K), b._packed(K), lim, acc, 1)
        re, im = _unpack(acc, K)
        return a._new(order, re, im, a._den * b._den, reduce=True)
    re, im = {}, {}
    ar, ai, br, bi = a._terms_re(), a._terms_im(), b._terms_re(), b._terms_im()
    if ar and br:
        _mul_into(ar, br, lim, re, 1)
    if ai and bi:
        _mul_into(ai, bi, lim, re, -1)
    if ar and bi:
        _mul_into(ar, bi, lim, im, 1)
    if ai and br:
        _mul_into(ai, br, lim, im, 1)
    return a._new(order, _clean(re), _clean(im), a._den * b._den, reduce=True)


def jet_inverse(a: Jet, order=None) -> Jet:
    """Multiplicative inverse by the geometric series around the constant term."""
    c0 = a.constant_term()
    if not c0:
        raise JetError("non-invertible jet (zero constant term)")
    if order is None:
        order = a.order
    else:
        order = _min_order(order, a.order)
    a = a.truncate(order)
    inv0 = (1 / c0) if a.numeric else GaussianRational(1) / c0
    if a.keys() <= {0}:
        return Jet.const(a.chart, inv0, order, numeric=a.numeric)
    if order == EXACT:
        raise JetError("inverse of a non-constant exact polynomial needs a finite order")
    # a = c0 (1 + u), u without constant term; 1/(1+u) = sum (-u)^j
    neg_u = -(a.scale(inv0) - 1)
    out = Jet.const(a.chart, 1, order, numeric=a.numeric)
    p = out
    for _ in range(int(order)):
        p = p * neg_u
        if p.is_zero():
            break
        out = out + p
    return out.scale(inv0)


def jet_exp(a: Jet, order=None) -> Jet:
    """exp of a jet with zero constant term (numeric jets may have any)."""
    c0 = a.constant_term()
    if order is None:
        order = a.order
    a = a.truncate(order)
    pref = None
    if c0:
        if not a.numeric:
            raise JetError("non-nilpotent exponent: exp needs a zero constant term")
        pref = cmath.exp(complex(c0))
        a = a - complex(c0)
    out = Jet.const(a.chart, 1, a.order, numeric=a.numeric)
    if not a.is_zero():
        if a.order == EXACT:
            raise JetError("exp of a non-constant exact polynomial needs a finite order")
        p = out
        for j in range(1, int(a.order) + 1):
            p = (p * a).scale(_recip(j, a.numeric))
            if p.is_zero():
                break
            out = out + p
    if pref is not None:
        out = out.scale(pref)
    return out


def jet_log1p(u: Jet, order=None) -> Jet:
    """log(1+u) for u with zero constant term."""
    if u.constant_term():
        raise JetError("log1p needs a zero constant term")
    if order is None:
        order = u.order
    u = u.truncate(order)
    if u.is_zero():
        return u
    if u.order == EXACT:
        raise JetError("log1p of an exact polynomial needs a finite order")
    out = Jet.zero(u.chart, u.order, u.numeric)
    p = Jet.const(u.chart, 1, u.order, numeric=u.numeric)
    for j in range(1, int(u.order) + 1):
        p = p * u
        if p.is_zero():
            break
        c = _recip(j, u.numeric)
        out = out + (p.scale(c) if j % 2 else p.scale(-c))
    return out


def _recip(j, numeric):
    return 1.0 / j if numeric else GaussianRational(mpq(1, j))


def jet_derive(a: Jet, var: int) -> Jet:
    if not 0 <= var < a.chart.nvars:
        raise JetError(f"variable index {var} out of range")
    if a.order != EXACT and a.order < 1:
        raise JetError("order exhausted")
    shift = _BITS * var
    one = 1 << shift

    def d(src):
        out = {}
        for k, v in src.items():
            e = (k >> shift) & _MASK
            if e:
                out[k - one] = v * e
        return out
    return a._new(a.order - 1 if a.order != EXACT else EXACT, d(a._re), d(a._im),
                  reduce=True)


def _swap_key(k: int, n: int) -> int:
    lo_mask = (1 << (_BITS * n)) - 1
    return ((k & lo_mask) << (_BITS * n)) | (k >> (_BITS * n))


def jet_conjugate(a: Jet) -> Jet:
    if not a.chart.is_complex:
        raise JetError("conjugation needs a complex chart")
    n = a.chart.dim
    return a._new(a.order, {_swap_key(k, n): v for k, v in a._re.items()},
                  {_swap_key(k, n): -v for k, v in a._im.items()})


def jet_zeros_like(a: Jet) -> Jet:
    return Jet.zero(a.chart, a.order, a.numeric)


def jet_sum_products(chart: ChartSpec, items, order, numeric=False) -> Jet:
    """Sum of signed products: items are (negate, a, b) with b possibly None.

    Accumulates straight into one coefficient table, avoiding intermediate jets.
    """
    items = list(items)
    if not numeric:
        numeric = any(a.numeric or (b is not None and b.numeric) for _, a, b in items)
    lim = order if order != EXACT else 1 << 30
    if not numeric:
        return _sum_products_exact(chart, items, order, lim)
    re, im = {}, {}
    for neg, a, b in items:
        if not a.numeric:
            a = a.to_numeric()
        f = -1 if neg else 1
        if b is None:
            for src, dst in ((a._re, re), (a._im, im)):
                for k, v in src.items():
                    if key_degree(k) <= order:
                        dst[k] = dst.get(k, 0) + v * f
            continue
        if not b.numeric:
            b = b.to_numeric()
        ar, ai, br, bi = a._terms_re(), a._terms_im(), b._terms_re(), b._terms_im()
        if ar and br:
            _mul_into(ar, br, lim, re, f)
        if ai and bi:
            _mul_into(ai, bi, lim, re, -f)
        if ar and bi:
            _mul_into(ar, bi, lim, im, f)
        if ai and br:
            _mul_into(ai, br, lim, im, f)
    return Jet(chart, order, _clean(re), _clean(im), True, 1, _trusted=True)


def _sum_products_exact(chart, items, order, lim) -> Jet:
    den = 1
    for _, a, b in items:
        d = a._den * (b._den if b is not None else 1)
        den = den * d // gcd(den, d)
    factors = []
    bits = 0
    pairs = 0
    for neg, a, b in items:
        if b is None:
            f = den // a._den
            bits = max(bits, a._bits() + f.bit_length())
            pairs += len(a._re) + len(a._im)
        else:
            f = den // (a._den * b._den)
            bits = max(bits, a._bits() + b._bits() + f.bit_length() + 1)
            pairs += (len(a._re) + len(a._im)) * (len(b._re) + len(b._im))
        factors.append(-f if neg else f)
    K = _pack_width(bits, pairs)
    acc = {}
    for (neg, a, b), f in zip(items, factors):
        if b is None:
            get = acc.get
            for d, k, v in a._packed(K):
                if d > lim:
                    break
                acc[k] = get(k, 0) + v * f
        else:
            _mul_into(a._packed(K), b._packed(K), lim, acc, f)
    re, im = _unpack(acc, K)
    re, im, den = _reduce(re, im, den)
    return Jet(chart, order, re, im, False, den, _trusted=True)

"""Constructive realizations of exact forms as Chern-character differences.

Complex case: real dbar-del-exact (k,k)-forms are realized as ch of virtual
Hermitian bundles built from structured metrics.  Smooth case: exact even
forms are realized by sums of normalized line-bundle connections, where a
connection is stored as a 1-form eta with ch := exp(d eta).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from gmpy2 import mpq

from .chernweil import (MetricError, StructuredMetric, chern_character,
                        metric_assemble)
from .forms import (Form, FormError, Verdict, conjugate_form, d, dbar, ddbar,
                    form_equal, partial, popcount, wedge)
from .jetring import (EXACT, ChartSpec, GaussianRational, Jet, JetError,
                      jet_conjugate, jet_exp, jet_log1p)
from .matforms import LambdaPoly, lambda_equal


class RealizeError(ValueError):
    pass


I_UNIT = GaussianRational(0, 1)


def _gq(x) -> GaussianRational:
    return GaussianRational.coerce(x)


def jet_key(j: Jet):
    """Hashable canonical identity of a jet."""
    return (j.order, j._den, tuple(sorted(j._re.items())), tuple(sorted(j._im.items())))


def _frac(x) -> Fraction:
    x = mpq(x)
    return Fraction(int(x.numerator), int(x.denominator))


# ---------------------------------------------------------------------------
# basic forms and blocks

@dataclass(frozen=True)
class BasicFormTerm:
    """f0 df1 ^ ... ^ dfk."""

    funcs: tuple

    def __post_init__(self):
        object.__setattr__(self, "funcs", tuple(self.funcs))
        if not self.funcs:
            raise RealizeError("a basic form needs at least the coefficient f0")
        ch = self.funcs[0].chart
        if any(f.chart != ch for f in self.funcs):
            raise RealizeError("basic form functions on different charts")
        if self.degree > ch.nvars:
            raise RealizeError("basic form degree exceeds the chart dimension")

    @property
    def chart(self) -> ChartSpec:
        return self.funcs[0].chart

    @property
    def degree(self) -> int:
        return len(self.funcs) - 1

    def to_form(self) -> Form:
        out = Form.function(self.funcs[0])
        for f in self.funcs[1:]:
            out = wedge(out, d(Form.function(f)))
        return out


def basic_terms_from_form(a: Form) -> list[BasicFormTerm]:
    """phi dz_I ^ dzb_J  ->  phi d(z_I) ^ d(zb_J), one term per basis element."""
    ch = a.chart
    out = []
    for mask, coef in sorted(a.terms.items()):
        if coef.is_zero():
            continue
        funcs = [coef]
        for v in range(ch.nvars):
            if mask >> v & 1:
                funcs.append(Jet.var(ch, v, coef.order))
        out.append(BasicFormTerm(tuple(funcs)))
    return out


@dataclass(frozen=True)
class CompositeBlock:
    """sqrt(-1) e^sigma del f ^ dbar fbar."""

    sigma: Jet
    f: Jet

    def __post_init__(self):
        if not self.sigma.is_real():
            raise RealizeError("block exponent must be real")
        if self.sigma.constant_term():
            raise RealizeError("block exponent must have zero constant term")

    def form(self, order=None) -> Form:
        o = order if order is not None else min(self.sigma.order, self.f.order)
        core = _B(self.f)
        if not self.sigma.is_zero():
            core = core * jet_exp(self.sigma, o if o != EXACT else None)
        return core.scale(I_UNIT)


@dataclass(frozen=True)
class ElementaryBlock:
    """sqrt(-1) h dbar del rho."""

    h: Jet
    rho: Jet

    def __post_init__(self):
        if not (self.h.is_real() and self.rho.is_real()):
            raise RealizeError("elementary block functions must be real")

    def form(self) -> Form:
        return ddbar(Form.function(self.rho)).times_function(self.h).scale(I_UNIT)


def _B(f: Jet) -> Form:
    """del f ^ dbar fbar."""
    return wedge(partial(Form.function(f)), dbar(Form.function(jet_conjugate(f))))


def expand_blocks(terms, chart: ChartSpec, order=EXACT) -> Form:
    """Sum of coefficient * wedge of blocks, through the forms engine."""
    acc = Form.zero(chart, order)
    for c, blocks in terms:
        prod = Form.const(chart, 1)
        for b in blocks:
            prod = wedge(prod, b.form())
        acc = acc + prod.scale(_gq(mpq(c.numerator, c.denominator)
                                   if isinstance(c, Fraction) else c))
    return acc


# ---------------------------------------------------------------------------
# decomposition into composite blocks

class _Accumulator:
    """Sums of (complex jet) * prod B(f_j), keyed by the sorted f keys."""

    def __init__(self):
        self.funcs = {}      # product key -> function jet
        self.jets = {}       # jet key -> jet

    def key(self, j: Jet):
        k = jet_key(j)
        self.jets.setdefault(k, j)
        return k

    def add(self, prod_key: tuple, fn: Jet):
        cur = self.funcs.get(prod_key)
        self.funcs[prod_key] = fn if cur is None else cur + fn


def _polarize(a: Jet, b: Jet) -> list:
    """del a ^ dbar bbar as a combination of B(f):
    (B(a+b) - B(a) - B(b))/2 + i (B(a+ib) - B(a) - B(b))/2."""
    if jet_key(a) == jet_key(b):
        return [(_gq(1), a)]
    half = _gq(mpq(1, 2))
    ihalf = GaussianRational(0, mpq(1, 2))
    return [(half, a + b), (ihalf, a + b.scale(I_UNIT)),
            (-(half + ihalf), a), (-(half + ihalf), b)]


def _pair_expansions(pairs, acc: _Accumulator):
    """Expand a wedge of (1,1)-factors, each a list of (coeff, f), into
    {sorted f-key tuple: coeff}; repeated f's vanish since B(f)^2 = 0."""
    out = {(): _gq(1)}
    for options in pairs:
        nxt = {}
        for key, c in out.items():
            for c2, f in options:
                fk = acc.key(f)
                if fk in key:
                    continue
                nk = tuple(sorted(key + (fk,)))
                nxt[nk] = nxt.get(nk, _gq(0)) + c * c2
        out = {k: v for k, v in nxt.items() if v}
    return out


def _is_zero_form(a: Form) -> bool:
    return all(j.is_zero() for j in a.terms.values())


def _expand_real_pairs(term: BasicFormTerm, k: int, acc: _Accumulator):
    """Real functions: group dh_{2j-1} ^ dh_{2j}; a (1,1)-typed pair uses
    del h ^ dbar g + dbar h ^ del g = i(B(h + i g) - B(h) - B(g))."""
    f0, hs = term.funcs[0], term.funcs[1:]
    npairs = len(hs) // 2
    # per pair: "11" (mixed), "20" (del h ^ del g), "02" (dbar h ^ dbar g)
    for types in itertools.product(("11", "20", "02"), repeat=npairs):
        if types.count("20") != types.count("02"):
            continue
        coeff = _gq(1)
        mixed = []       # (1,1) pair factors, as polarization option lists
        holo, anti = [], []
        for t, j in zip(types, range(npairs)):
            h, g = hs[2 * j], hs[2 * j + 1]
            if t == "11":
                f = h + g.scale(I_UNIT)
                mixed.append([(I_UNIT, f), (-I_UNIT, h), (-I_UNIT, g)])
            elif t == "20":
                holo += [h, g]
            else:
                anti += [jet_conjugate(h), jet_conjugate(g)]
        # del a1 ^ del a2 ^ ... ^ dbar b1 ^ ... in the order the pairs appear;
        # move to (del a1 ^ dbar b1) ^ (del a2 ^ dbar b2) ^ ...
        coeff = coeff * _gq(_regroup_sign(types))
        m = len(holo)
        for j in range(m):
            mixed.append(_polarize(holo[j], anti[j]))
        prods = _pair_expansions(mixed, acc)
        for pk, c in prods.items():
            acc.add(pk, f0.scale(coeff * c))


def _regroup_sign(types) -> int:
    """Sign taking the wedge of pair factors (in order) to
    [mixed pairs] ^ prod_j (del a_j ^ dbar b_j), where the "20" pairs supply
    the a's and the "02" pairs the b's."""
    # build the sequence of 1-form labels in original order
    seq = []
    ai = bi = 0
    mi = 0
    for t in types:
        if t == "11":
            seq += [("m", mi)]
            mi += 1
        elif t == "20":
            seq += [("a", ai), ("a", ai + 1)]
            ai += 2
        else:
            seq += [("b", bi), ("b", bi + 1)]
            bi += 2
    # target order: mixed (even, so position-free), then a0 b0 a1 b1 ...
    target = [("m", i) for i in range(mi)]
    for j in range(ai):
        target += [("a", j), ("b", j)]
    # mixed factors are 2-forms: only the odd letters matter for the sign
    odd = [x for x in seq if x[0] != "m"]
    odd_target = [x for x in target if x[0] != "m"]
    pos = {x: i for i, x in enumerate(odd_target)}
    perm = [pos[x] for x in odd]
    inv = sum(1 for i in range(len(perm)) for j in range(i + 1, len(perm)) if perm[i] > perm[j])
    return -1 if inv % 2 else 1


def _expand_general(term: BasicFormTerm, k: int, acc: _Accumulator):
    """Complex functions: choose del or dbar per factor, regroup into
    (del a ^ dbar bbar) pairs and polarize each."""
    f0, hs = term.funcs[0], term.funcs[1:]
    m = len(hs)
    dparts = [partial(Form.function(h)) for h in hs]
    bparts = [dbar(Form.function(h)) for h in hs]
    for S in itertools.combinations(range(m), k):
        if any(_is_zero_form(dparts[s]) for s in S):
            continue
        T = [t for t in range(m) if t not in S]
        if any(_is_zero_form(bparts[t]) for t in T):
            continue
        # sign of moving the S factors (in order) in front of the T factors
        inv = sum(1 for s in S for t in T if t < s)
        # p1..pk q1..qk -> (p1 q1)(p2 q2)...: k(k-1)/2 transpositions
        sign = (-1) ** (inv + k * (k - 1) // 2)
        mixed = [_polarize(hs[s], jet_conjugate(hs[t])) for s, t in zip(S, T)]
        for pk, c in _pair_expansions(mixed, acc).items():
            acc.add(pk, f0.scale(c * sign))


def _split_positive(phi: Jet):
    """phi = A e^{s} - M with rationals A, M > 0 and s real with zero constant
    term; constant phi gives [(phi, 0)].  Returns [(coeff, exponent jet)]."""
    c0 = phi.constant_term()
    c0 = mpq(GaussianRational.coerce(c0).re) if c0 else mpq(0)
    rest = phi - phi.constant_term()
    if rest.is_zero():
        return [(c0, None)] if c0 else []
    M = abs(c0) + 1
    A = c0 + M
    s = jet_log1p(rest.scale(_gq(1 / A)))
    return [(A, s), (-M, None)]


def decompose_composite(terms: Sequence[BasicFormTerm], k: int):
    """Write the (k,k)-component of sum(terms) as sum_t c_t prod_j CompositeBlock.

    Returns a list of (Fraction, [CompositeBlock] * k).
    """
    terms = [t for t in terms]
    if not terms:
        return []
    chart = terms[0].chart
    if not chart.is_complex:
        raise RealizeError("composite decomposition needs a complex chart")
    target = Form.zero(chart)
    for t in terms:
        target = target + t.to_form()
    target = target.component(k, k)
    if not form_equal(target, conjugate_form(target)):
        raise RealizeError(f"the ({k},{k})-component is not real")
    if _is_zero_form(target):
        return []
    acc = _Accumulator()
    for t in terms:
        if t.degree != 2 * k:
            continue
        if all(f.is_real() for f in t.funcs):
            _expand_real_pairs(t, k, acc)
        else:
            _expand_general(t, k, acc)
    # prod B = (-i)^k prod (i B); keep the real part of each coefficient
    # function, which is legitimate because the total is real
    rot = GaussianRational(0, -1) ** k
    out = []
    for pk in sorted(acc.funcs):
        phi = acc.funcs[pk].scale(rot).real_part()
        if phi.is_zero():
            continue
        fs = [acc.jets[x] for x in pk]
        for c, s in _split_positive(phi):
            zero = Jet.zero(chart, phi.order)
            blocks = [CompositeBlock(s if s is not None else zero, fs[0])]
            blocks += [CompositeBlock(Jet.zero(chart, phi.order), f) for f in fs[1:]]
            out.append((_frac(c), blocks))
    return out


# ---------------------------------------------------------------------------
# decomposition into elementary blocks

def decompose_elementary(a: Form, k: int):
    """Rewrite the real (k,k)-component through dz_i ^ dzb_j = -dbar del(z_i zb_j)
    = i E(1, Re z_i zb_j) - E(1, Im z_i zb_j), E(h, rho) = i h dbar del rho.

    Returns a list of (Fraction, [ElementaryBlock] * k)."""
    ch = a.chart
    if not ch.is_complex:
        raise RealizeError("elementary decomposition needs a complex chart")
    w = a.component(k, k)
    if not form_equal(w, conjugate_form(w)):
        raise RealizeError(f"the ({k},{k})-component is not real")
    n = ch.dim
    rho = {}

    def rho_pair(i, j):
        if (i, j) not in rho:
            zz = Jet.var(ch, i) * Jet.var(ch, n + j)
            rho[(i, j)] = (zz.real_part(), zz.imag_part())
        return rho[(i, j)]

    acc = {}
    for mask, coef in sorted(w.terms.items()):
        if coef.is_zero():
            continue
        I = [v for v in range(n) if mask >> v & 1]
        J = [v - n for v in range(n, 2 * n) if mask >> v & 1]
        # dz_I ^ dzb_J = s * prod_t (dz_{i_t} ^ dzb_{j_t})
        s = (-1) ** (k * (k - 1) // 2)
        options = [[(I_UNIT, (i, j, 0)), (_gq(-1), (i, j, 1))] for i, j in zip(I, J)]
        for choice in itertools.product(*options):
            c = _gq(s)
            key = []
            for cc, lab in choice:
                c = c * cc
                key.append(lab)
            key = tuple(sorted(key))
            # the coefficient function rides on the first block; split into
            # real and imaginary parts so every h is real
            for part, mult in ((coef.real_part(), c), (coef.imag_part(), c * I_UNIT)):
                if part.is_zero():
                    continue
                cur = acc.get(key)
                val = part.scale(mult)
                acc[key] = val if cur is None else cur + val
    out = []
    for key in sorted(acc):
        h = acc[key].real_part()
        if h.is_zero():
            continue
        blocks = []
        for t, (i, j, which) in enumerate(key):
            r = rho_pair(i, j)[which]
            hh = h if t == 0 else Jet.const(ch, 1, h.order)
            blocks.append(ElementaryBlock(hh, r))
        out.append((Fraction(1), blocks))
    return out


# ---------------------------------------------------------------------------
# virtual bundles

def metric_key(m: StructuredMetric):
    return (jet_key(m.sigma), tuple(jet_key(f) for f in m.f))


@dataclass
class VirtualSummand:
    """multiplicity * ( (+)h1 blocks  minus  (+)h2 blocks ); blocks carry counts."""

    h1: tuple            # ((count, StructuredMetric), ...)
    h2: tuple
    multiplicity: int = 1

    @property
    def rank(self) -> int:
        return sum(c * m.rank for c, m in self.h1)

    def key(self):
        return (tuple((c, metric_key(m)) for c, m in self.h1),
                tuple((c, metric_key(m)) for c, m in self.h2))


@dataclass
class VirtualBundle:
    summands: list = field(default_factory=list)

    def add(self, s: VirtualSummand):
        if sum(c * m.rank for c, m in s.h1) != sum(c * m.rank for c, m in s.h2):
            raise RealizeError("virtual summand ranks differ")
        k = s.key()
        for t in self.summands:
            if t.key() == k:
                t.multiplicity += s.multiplicity
                return
        self.summands.append(s)

    def extend(self, other: "VirtualBundle"):
        for s in other.summands:
            self.add(VirtualSummand(s.h1, s.h2, s.multiplicity))

    def metrics(self):
        seen = {}
        for s in self.summands:
            for _, m in s.h1 + s.h2:
                seen.setdefault(metric_key(m), m)
        return list(seen.values())

    def to_dict(self):
        from .forms import jet_to_dict

        def md(m):
            return {"sigma": jet_to_dict(m.sigma), "f": [jet_to_dict(f) for f in m.f]}
        return {"summands": [{"rank": s.rank, "multiplicity": s.multiplicity,
                              "h1": [{"count": c, **md(m)} for c, m in s.h1],
                              "h2": [{"count": c, **md(m)} for c, m in s.h2]}
                             for s in self.summands]}


class _ChCache:
    def __init__(self, top: int):
        self.top = top
        self.data = {}

    def __call__(self, m: StructuredMetric) -> LambdaPoly:
        k = metric_key(m)
        if k not in self.data:
            self.data[k] = chern_character(metric_assemble(m), self.top)
        return self.data[k]


def virtual_ch(E: VirtualBundle, top: int, cache: _ChCache | None = None) -> LambdaPoly:
    """sum over summands of multiplicity * (ch h1 - ch h2), degrees <= top."""
    cache = cache or _ChCache(top)
    out = None
    for s in E.summands:
        for sign, blocks in ((1, s.h1), (-1, s.h2)):
            for c, m in blocks:
                term = cache(m).scale(_gq(sign * c * s.multiplicity))
                out = term if out is None else out + term
    return out


def layer_bundle(sigma: Jet, fs: Sequence[Jet], multiplicity=1, swap=False) -> VirtualSummand:
    """F_k for (sigma, f_1..f_{k-1}): even-length sub-metrics minus odd ones,
    padded with trivial line blocks when the ranks differ (k = 2)."""
    k = len(fs) + 1
    even, odd = {}, {}
    for l in range(1, k + 1):
        for S in itertools.combinations(range(k - 1), l - 1):
            m = StructuredMetric(sigma, [fs[i] for i in S])
            side = even if l % 2 == 0 else odd
            key = metric_key(m)
            cnt, _ = side.get(key, (0, m))
            side[key] = (cnt + 1, m)
    h1 = tuple(sorted(even.values(), key=lambda t: (t[1].rank, metric_key(t[1]))))
    h2 = tuple(sorted(odd.values(), key=lambda t: (t[1].rank, metric_key(t[1]))))
    r1 = sum(c * m.rank for c, m in h1)
    r2 = sum(c * m.rank for c, m in h2)
    if r1 != r2:
        triv = StructuredMetric(Jet.zero(sigma.chart, sigma.order), [])
        pad = ((abs(r1 - r2), triv),)
        if r1 < r2:
            h1 = h1 + pad
        else:
            h2 = h2 + pad
    if swap:
        h1, h2 = h2, h1
    return VirtualSummand(h1, h2, multiplicity)


def composite_target(k: int, sigma: Jet, fs: Sequence[Jet], order=None) -> Form:
    """omega = 1/(k-1) ddbar(U^{k-1}/(k-1)!), U = e^{-sigma} sum del f ^ dbar fbar;
    with k-1 functions U^{k-1}/(k-1)! = e^{-(k-1)sigma} prod_j B(f_j)."""
    if k < 2 or len(fs) != k - 1:
        raise RealizeError("composite targets need k >= 2 and k-1 functions")
    chart = sigma.chart
    o = order if order is not None else min([sigma.order] + [f.order for f in fs])
    prod = Form.const(chart, 1)
    for f in fs:
        prod = wedge(prod, _B(f))
    e = jet_exp(sigma.scale(_gq(-(k - 1))).truncate(o - 1), o - 1)
    return ddbar(prod * e).scale(_gq(mpq(1, k - 1)))


def _scaled_layer(sigma, fs, coeff: Fraction) -> VirtualSummand | None:
    """coeff * F_l(sigma, fs) with rational coeff: with coeff = p/q use p*q
    copies and f_1/q, since B(f/q) = B(f)/q^2."""
    if coeff == 0:
        return None
    p, q = abs(coeff.numerator), coeff.denominator
    fs = list(fs)
    if q != 1:
        fs[0] = fs[0].scale(_gq(mpq(1, q)))
    return layer_bundle(sigma, fs, multiplicity=p * q, swap=coeff < 0)


# homotopy operators -------------------------------------------------------

def homotopy(a: Form, holomorphic: bool = True) -> Form:
    """Koszul homotopy K for del (or dbar): del K + K del = id on terms of
    positive weight, weight = z-degree of the coefficient + number of dz's."""
    ch = a.chart
    n = ch.dim
    vars_ = range(n) if holomorphic else range(n, 2 * n)
    out = {}
    from .jetring import key_degree, unpack
    for mask, coef in a.terms.items():
        nform = sum(1 for v in vars_ if mask >> v & 1)
        for v in vars_:
            bit = 1 << v
            if not mask & bit:
                continue
            sign = -1 if popcount(mask & (bit - 1)) % 2 else 1
            nm = mask & ~bit

            # multiply by z_v and divide by the weight monomialwise
            terms = {}
            for k2 in coef.keys():
                exps = unpack(k2, ch.nvars)
                wdeg = sum(exps[u] for u in vars_) + nform
                c = coef.coeff_key(k2) * GaussianRational(mpq(sign, wdeg))
                terms[k2 + (1 << (8 * v))] = c
            if not terms:
                continue
            o = coef.order + 1 if coef.order != EXACT else EXACT
            j = Jet(ch, o, {k: c.re for k, c in terms.items()},
                    {k: c.im for k, c in terms.items()}, numeric=coef.numeric)
            out[nm] = out[nm] + j if nm in out else j
    order = a.order + 1 if a.order != EXACT else EXACT
    return Form(ch, out, order)


def ddbar_primitive(R: Form) -> Form:
    """P with dbar del P = R for a del- and dbar-closed R of positive bidegree:
    R = del K R and K R is dbar-closed, so K R = dbar Kbar K R and
    R = del dbar Kbar K R = -dbar del Kbar K R."""
    return -homotopy(homotopy(R, True), False)


# ---------------------------------------------------------------------------
# realizations

@dataclass
class Realization:
    bundle: VirtualBundle
    target: LambdaPoly
    verdict: Verdict
    layers: list = field(default_factory=list)


def _verify(E: VirtualBundle, target: LambdaPoly, top: int, cache=None) -> Verdict:
    chv = virtual_ch(E, top, cache)
    return lambda_equal(chv, target, top)


def _residue_layers(R: Form, l: int, n: int, order):
    """Virtual summands whose ch_l equals the (l,l) residue R (lambda^l part)."""
    chart = R.chart
    if _is_zero_form(R):
        return []
    if l == n:
        return _top_degree_layers(R, n, order)
    P0 = ddbar_primitive(R)
    sign = -1 if (l - 1) % 2 else 1
    P = (P0 + conjugate_form(P0).scale(_gq(sign))).scale(_gq(mpq(1, 2)))
    Q = P.scale(I_UNIT ** (l - 1)).truncate(order)
    out = []
    for c, blocks in decompose_composite(basic_terms_from_form(Q), l - 1):
        # prod blocks = i^{l-1} e^{sigma} prod B(f): the P-coefficient is c
        s = blocks[0].sigma
        sig = s.scale(_gq(mpq(-1, l - 1)))
        summ = _scaled_layer(sig, [b.f for b in blocks], c * (l - 1))
        if summ is not None:
            out.append(summ)
    return out


def _top_degree_layers(R: Form, n: int, order):
    """R = psi dz_1..dz_n dzb_1..dzb_n: take f_j = z_j (j < n) and solve
    G_{n nbar} for R = dbar del(G prod_{j<n} B(z_j))."""
    chart = R.chart
    full = (1 << (2 * n)) - 1
    psi = R.terms.get(full)
    if psi is None or psi.is_zero():
        return []
    zs = [Jet.var(chart, j, order) for j in range(n)]
    Pi = Form.const(chart, 1)
    for j in range(n - 1):
        Pi = wedge(Pi, _B(zs[j]))
    zn, znb = n - 1, 2 * n - 1
    # dbar del(G Pi) = -G_{n nbar} dz_n ^ dzb_n ^ Pi
    probe = wedge(wedge(Form.dz(chart, n), Form.dzb(chart, n)), Pi)
    s = probe.terms[full].constant_term()
    from .jetring import unpack
    terms = {}
    for key in psi.keys():
        e = unpack(key, chart.nvars)
        c = psi.coeff_key(key) * (GaussianRational(-1) / s) * GaussianRational(
            mpq(1, (e[zn] + 1) * (e[znb] + 1)))
        nk = key + (1 << (8 * zn)) + (1 << (8 * znb))
        terms[nk] = c
    G = Jet(chart, order, {k: c.re for k, c in terms.items()},
            {k: c.im for k, c in terms.items()})
    G = G.real_part()
    out = []
    for c, sexp in _split_positive(G):
        if sexp is None:
            continue            # constants are killed by dbar del
        sig = sexp.scale(_gq(mpq(-1, n - 1)))
        summ = _scaled_layer(sig, zs[:n - 1], _frac(c) * (n - 1))
        if summ is not None:
            out.append(summ)
    return out


def realize_composite(k: int, sigma: Jet, fs: Sequence[Jet], n: int | None = None) -> Realization:
    """Virtual bundle E with ch(E) = omega exactly in lambda-degrees <= n, where
    omega = lambda^k/(k-1) ddbar(U^{k-1}/(k-1)!) for the data (sigma, f)."""
    chart = sigma.chart
    if n is None:
        n = chart.dim
    if n != chart.dim:
        raise RealizeError("n must equal the chart dimension")
    if not 2 <= k <= n:
        raise RealizeError("need 2 <= k <= n")
    fs = list(fs)
    StructuredMetric(sigma, fs)        # validates sigma, charts
    order = min([sigma.order] + [f.order for f in fs])
    if order == EXACT or order < 3:
        raise JetError("realize_composite needs data of finite jet order >= 3")
    omega = composite_target(k, sigma, fs, order)
    target = LambdaPoly(chart, {k: omega})
    E = VirtualBundle()
    E.add(layer_bundle(sigma, fs))
    layers = [("base", k)]
    cache = _ChCache(n)
    for l in range(k + 1, n + 1):
        cur = virtual_ch(E, n, cache)
        R = -cur.coeff(l)
        new = _residue_layers(R.truncate(order - 2), l, n, order)
        for s in new:
            E.add(s)
        layers.append(("residue", l, len(new)))
    verdict = _verify(E, target, n, cache)
    return Realization(E, target, verdict, layers)


def solve_vandermonde(alphas: Sequence[Fraction]) -> list[Fraction]:
    """c with sum_i c_i alpha_i^j = delta_{j1}, j = 0..len-1 (exact elimination)."""
    m = len(alphas)
    if len(set(alphas)) != m:
        raise RealizeError("Vandermonde nodes must be distinct")
    A = [[Fraction(a) ** j for a in alphas] + [Fraction(1 if j == 1 else 0)] for j in range(m)]
    for c in range(m):
        p = next(i for i in range(c, m) if A[i][c] != 0)
        A[c], A[p] = A[p], A[c]
        piv = A[c][c]
        A[c] = [x / piv for x in A[c]]
        for i in range(m):
            if i != c and A[i][c] != 0:
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[c])]
    return [A[i][m] for i in range(m)]


@dataclass
class VandermondeData:
    alphas: list
    c: list
    N: int
    betas: list
    counts: list


def realize_line_vandermonde(sigma: Jet, n: int | None = None, alphas=None):
    """Line-bundle realization of lambda ddbar(sigma):
    sum_i c_i' ch(e^{beta_i sigma}) with integers c_i' = N c_i, beta_i = alpha_i/N."""
    chart = sigma.chart
    if n is None:
        n = chart.dim
    if not sigma.is_real() or sigma.constant_term():
        raise RealizeError("sigma must be real with zero constant term")
    if alphas is None:
        alphas = [Fraction(i) for i in range(1, n + 2)]
    alphas = [Fraction(a) for a in alphas]
    if len(alphas) != n + 1:
        raise RealizeError("need n+1 nodes")
    c = solve_vandermonde(alphas)
    for j in range(n + 1):
        if sum(ci * a ** j for ci, a in zip(c, alphas)) != (1 if j == 1 else 0):
            raise RealizeError("Vandermonde solve failed")
    N = math.lcm(*[x.denominator for x in c])
    betas = [a / N for a in alphas]
    counts = [x * N for x in c]
    if any(x.denominator != 1 for x in counts):
        raise RealizeError("rescaled multiplicities are not integral")
    counts = [int(x) for x in counts]
    pos, neg = [], []
    for b, cnt in zip(betas, counts):
        if cnt == 0:
            continue
        m = StructuredMetric(sigma.scale(_gq(mpq(b.numerator, b.denominator))), [])
        (pos if cnt > 0 else neg).append((abs(cnt), m))
    E = VirtualBundle()
    if pos or neg:
        E.add(VirtualSummand(tuple(pos), tuple(neg), 1))
    target = LambdaPoly(chart, {1: ddbar(Form.function(sigma))})
    verdict = _verify(E, target, n) if E.summands else lambda_equal(
        LambdaPoly(chart, {}), target, n)
    data = VandermondeData(alphas, c, N, betas, counts)
    return Realization(E, target, verdict, [data])


# ---------------------------------------------------------------------------
# smooth case

@dataclass
class LineConnection:
    """Normalized rank-one connection: ch := exp(d eta)."""

    eta: Form
    sign: int = 1


def exp_form(F: Form, top: int) -> Form:
    """sum_{j <= top} F^j / j! for an even form F without degree-0 part."""
    out = Form.const(F.chart, 1)
    p = Form.const(F.chart, 1)
    for j in range(1, top + 1):
        p = wedge(p, F).scale(_gq(mpq(1, j)))
        if _is_zero_form(p):
            break
        out = out + p
    return out


def cs_closed_form(eta: Form, top_degree: int | None = None) -> Form:
    """sum_{l >= 1} eta ^ (d eta)^{l-1} / l!, through form degree top_degree."""
    if not _is_zero_form(eta) and eta.degrees() != {1}:
        raise RealizeError("eta must be a 1-form")
    chart = eta.chart
    if top_degree is None:
        top_degree = chart.nvars
    if _is_zero_form(eta):
        return Form.zero(chart, eta.order)
    de = d(eta)
    out = Form.zero(chart, eta.order)
    p = Form.const(chart, 1)
    l = 1
    while 2 * l - 1 <= top_degree:
        term = wedge(eta, p).scale(_gq(mpq(1, math.factorial(l))))
        if _is_zero_form(term):
            break
        out = out + term
        p = wedge(p, de)
        l += 1
    return out


def realize_smooth_exact(alpha_terms: Sequence[BasicFormTerm]):
    """Line connections eta_j with sum_j sign_j (exp(d eta_j) - 1) = d(sum alpha)."""
    alpha_terms = list(alpha_terms)
    if not alpha_terms:
        return [], Verdict(True, EXACT, None, {})
    chart = alpha_terms[0].chart
    for t in alpha_terms:
        if t.degree % 2 == 0:
            raise RealizeError(f"basic form of even degree {t.degree}")
    work = list(alpha_terms)
    conns = []
    while work:
        t = work.pop(0)
        fs = t.funcs
        m = (len(fs) - 1) // 2          # degree 2m+1
        pairs = [(fs[2 * j], fs[2 * j + 1]) for j in range(m + 1)]
        eta = Form.zero(chart)
        for a, b in pairs:
            eta = eta + wedge(Form.function(a), d(Form.function(b)))
        conns.append(LineConnection(eta, 1))
        # exp(d eta) - 1 - omega = sum_{j=1}^{m} d(eta ^ (d eta)^{j-1})/j!; the
        # correction terms are (-1/j) f_a df_b ^ prod_{t in T} df ^ df, |T| = j-1
        for j in range(1, m + 1):
            for i in range(m + 1):
                rest = [x for x in range(m + 1) if x != i]
                for T in itertools.combinations(rest, j - 1):
                    f0 = pairs[i][0].scale(_gq(mpq(-1, j)))
                    funcs = [f0, pairs[i][1]]
                    for x in T:
                        funcs += [pairs[x][0], pairs[x][1]]
                    work.append(BasicFormTerm(tuple(funcs)))
    omega = Form.zero(chart)
    for t in alpha_terms:
        omega = omega + d(t.to_form())
    verdict = form_equal(smooth_ch_sum(conns, chart), omega)
    return conns, verdict


def smooth_ch_sum(conns: Sequence[LineConnection], chart: ChartSpec) -> Form:
    acc = Form.zero(chart)
    for c in conns:
        e = exp_form(d(c.eta), chart.nvars // 2)
        acc = acc + (e - Form.const(chart, 1)).scale(_gq(c.sign))
    return acc

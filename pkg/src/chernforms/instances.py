"""Seeded random instances for the verification suites."""

from __future__ import annotations

import hashlib
import itertools
import random

from .forms import Form
from .jetring import ChartSpec, GaussianRational, Jet, pack, _swap_key
from .chernweil import StructuredMetric


def sub_seed(seed: int, *labels) -> int:
    """Deterministic per-case seed, independent of PYTHONHASHSEED."""
    text = ":".join([str(seed)] + [str(x) for x in labels])
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


def monomials(nvars: int, max_deg: int, min_deg: int = 0):
    out = []
    for d in range(min_deg, max_deg + 1):
        for combo in itertools.combinations_with_replacement(range(nvars), d):
            e = [0] * nvars
            for v in combo:
                e[v] += 1
            out.append(pack(e))
    return out


def random_complex_jet(rng: random.Random, chart: ChartSpec, order, deg=2, bound=3,
                       constant=True, density=1.0) -> Jet:
    """Gaussian-integer coefficients with parts in [-bound, bound]."""
    re, im = {}, {}
    for k in monomials(chart.nvars, deg, 0 if constant else 1):
        if density < 1 and rng.random() > density:
            continue
        re[k] = rng.randint(-bound, bound)
        if chart.is_complex:
            im[k] = rng.randint(-bound, bound)
    return Jet(chart, order, re, im)


def random_real_jet(rng: random.Random, chart: ChartSpec, order, deg=2, bound=3,
                    constant=False, density=1.0) -> Jet:
    """Conjugation-invariant jet: conjugate monomials get conjugate coefficients."""
    if not chart.is_complex:
        re = {k: rng.randint(-bound, bound) for k in monomials(chart.nvars, deg, 0 if constant else 1)
              if density >= 1 or rng.random() <= density}
        return Jet(chart, order, re)
    n = chart.dim
    re, im = {}, {}
    seen = set()
    for k in monomials(chart.nvars, deg, 0 if constant else 1):
        if k in seen:
            continue
        kc = _swap_key(k, n)
        seen.update((k, kc))
        if density < 1 and rng.random() > density:
            continue
        a = rng.randint(-bound, bound)
        if kc == k:
            re[k] = a
        else:
            b = rng.randint(-bound, bound)
            re[k], im[k] = a, b
            re[kc], im[kc] = a, -b
    return Jet(chart, order, re, im)


def random_structured_metric(rng, chart, rank, order=4, deg=2, bound=3, density=1.0):
    sigma = random_real_jet(rng, chart, order, deg, bound, density=density)
    f = [random_complex_jet(rng, chart, order, deg, bound, density=density)
         for _ in range(rank - 1)]
    return StructuredMetric(sigma, f)


def random_general_metric(rng, chart, rank, order=4, deg=2, bound=3):
    """Hermitian metric I*c + (B + B*) with a dominant diagonal constant."""
    from .chernweil import GeneralMetric
    ent = [[None] * rank for _ in range(rank)]
    for i in range(rank):
        for j in range(i, rank):
            if i == j:
                x = random_real_jet(rng, chart, order, deg, bound)
                ent[i][i] = x + (2 * bound * rank + rng.randint(1, 3))
            else:
                x = random_complex_jet(rng, chart, order, deg, bound)
                ent[i][j] = x
                ent[j][i] = x.conjugate()
    return GeneralMetric(ent)


def random_form(rng, chart, order, degree=None, max_terms=3, deg=2, bound=3,
                bidegree=None) -> Form:
    """Sparse random form with a few basis terms."""
    nb = chart.nvars
    masks = list(range(1 << nb))
    if bidegree is not None:
        from .forms import mask_bidegree
        masks = [m for m in masks if mask_bidegree(m, chart) == tuple(bidegree)]
    elif degree is not None:
        masks = [m for m in masks if bin(m).count("1") == degree]
    terms = {}
    for _ in range(max_terms):
        m = rng.choice(masks)
        j = random_complex_jet(rng, chart, order, deg, bound, density=0.4)
        terms[m] = terms[m] + j if m in terms else j
    return Form(chart, terms, order)


def random_one_form(rng, chart, order, deg=1, bound=3) -> Form:
    terms = {}
    for v in range(chart.nvars):
        terms[1 << v] = random_complex_jet(rng, chart, order, deg, bound, density=0.5)
    return Form(chart, terms, order)


def gaussian(x) -> GaussianRational:
    return GaussianRational.coerce(x)

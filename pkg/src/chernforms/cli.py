"""Command-line driver: seeded verification suites, realizations, quadrature.

Reports are newline-delimited JSON: one record per case, then a summary.
Exit status: 0 all checks pass, 1 some check failed, 2 bad configuration.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from dataclasses import dataclass, field
from typing import Callable

from .chernweil import (MetricError, alternating_sum_check,
                        chern_character, chern_total, lemma_main_check, matched_order,
                        newton_convert, rank2_remark_check, sub_metric_characters)
from .forms import (Form, FormError, conjugate_form, d, dbar, form_equal,
                    form_to_dict, jet_from_dict, order_str, partial, wedge)
from .instances import (random_complex_jet, random_form, random_general_metric,
                        random_real_jet, random_structured_metric, sub_seed)
from .jetring import EXACT, ChartSpec, JetError
from .matforms import OddVectorPair, lambda_equal, lemma_algebra_check
from . import quadrature as quad
from . import realize as rz

SUITES = ["lemma-algebra", "lemma-main", "corollary-id", "newton", "decompose",
          "realize-composite", "realize-vandermonde", "realize-smooth", "cs-closed",
          "calculus", "quadrature-pl", "quadrature-cs", "quadrature-bc"]

DEFAULT_CASES = {"lemma-algebra": 25, "lemma-main": 20, "corollary-id": 10, "newton": 50,
                 "decompose": 20, "realize-composite": 10, "realize-vandermonde": 10,
                 "realize-smooth": 10, "cs-closed": 20, "calculus": 100}

DEFAULT_TOL = {"quadrature-pl": 1e-4, "quadrature-cs": 1e-3, "quadrature-bc": 1e-3}


class ConfigError(ValueError):
    def __init__(self, problems):
        super().__init__("; ".join(problems))
        self.problems = problems


@dataclass
class SuiteConfig:
    suite: str
    seed: int = 0
    cases: int | None = None
    order: int | None = None
    n: int | None = None
    rank: int | None = None
    k: int | None = None
    deg: int = 2
    bound: int = 3
    tol: float | None = None
    levels: int = 3

    def validate(self):
        problems = []
        if self.suite not in SUITES + ["all"]:
            problems.append(f"suite: unknown suite {self.suite!r}")
        if self.cases is not None and self.cases < 1:
            problems.append("cases: must be positive")
        if self.order is not None and self.order < 4 and self.suite in (
                "lemma-main", "corollary-id", "newton", "realize-composite", "all"):
            problems.append("order: curvature-based suites need jet order >= 4")
        if self.order is not None and self.order < 1:
            problems.append("order: must be positive")
        if self.n is not None and not 1 <= self.n <= 6:
            problems.append("n: chart dimension must lie in 1..6")
        if self.rank is not None and not 1 <= self.rank <= 6:
            problems.append("rank: must lie in 1..6")
        if self.k is not None and self.k < 1:
            problems.append("k: must be positive")
        if self.tol is not None and not self.tol > 0:
            problems.append("tol: tolerances must be positive")
        if self.deg < 1:
            problems.append("deg: polynomial degree bound must be positive")
        if self.bound < 1:
            problems.append("bound: coefficient bound must be positive")
        if self.levels < 2:
            problems.append("levels: refinement needs at least two levels")
        if problems:
            raise ConfigError(problems)
        return self

    def ncases(self, suite):
        return self.cases if self.cases is not None else DEFAULT_CASES.get(suite, 1)


def _record(check, seed, params, verdict, extra=None):
    ok = bool(verdict.equal) if hasattr(verdict, "equal") else bool(verdict)
    rec = {"check": check, "seed": seed, "parameters": params,
           "verdict": "pass" if ok else "fail"}
    if hasattr(verdict, "order"):
        rec["verified_order"] = order_str(verdict.order)
        rec["first_mismatch"] = verdict.mismatch
    if extra:
        rec.update(extra)
    return rec


def _guard(check, seed, params, fn):
    """Run one case; engine errors become failing records with a diagnosis."""
    try:
        return fn()
    except (JetError, FormError, MetricError, rz.RealizeError, ArithmeticError) as e:
        return {"check": check, "seed": seed, "parameters": params, "verdict": "fail",
                "verified_order": None, "first_mismatch": None,
                "error": f"{type(e).__name__}: {e}"}


def _cases(cfg: SuiteConfig, suite: str, grid):
    """(case seed, params) for every grid point and case index."""
    for params in grid:
        for i in range(cfg.ncases(suite)):
            labels = [f"{k}={v}" for k, v in sorted(params.items())]
            s = sub_seed(cfg.seed, suite, *labels, i)
            yield s, dict(params, case=i)


# ---------------------------------------------------------------------------
# suites

def suite_lemma_algebra(cfg):
    n = cfg.n or 3
    order = cfg.order or 4
    ch = ChartSpec("complex", n)
    ks = [cfg.k] if cfg.k else [1, 2, 3, 4]
    total = cfg.ncases("lemma-algebra")
    for i in range(total):
        k = ks[i % len(ks)]
        params = {"k": k, "n": n, "order": order, "case": i}
        s = sub_seed(cfg.seed, "lemma-algebra", i)
        rng = random.Random(s)

        def run():
            gen = lambda: random_form(rng, ch, order, degree=1, max_terms=3, deg=cfg.deg,
                                      bound=cfg.bound)
            pair = OddVectorPair([gen() for _ in range(k)], [gen() for _ in range(k)])
            return _record("lemma-algebra", s, params, lemma_algebra_check(pair))
        yield _guard("lemma-algebra", s, params, run)


def suite_lemma_main(cfg):
    ranks = [cfg.rank] if cfg.rank else [1, 2, 3, 4]
    ns = [cfg.n] if cfg.n else [2, 3]
    order = cfg.order or 4
    grid = [{"r": r, "n": n, "order": order} for r in ranks for n in ns]
    for s, params in _cases(cfg, "lemma-main", grid):
        def run():
            rng = random.Random(s)
            ch = ChartSpec("complex", params["n"])
            m = random_structured_metric(rng, ch, params["r"], order, cfg.deg, cfg.bound)
            v = lemma_main_check(m)
            extra = {}
            if params["r"] == 2:
                rv = rank2_remark_check(m.sigma, m.f[0])
                extra["remark_rank2"] = rv.to_dict()
                if not rv:
                    v.equal = False
            if v.detail:
                extra["diagnostics"] = v.detail
            return _record("lemma-main", s, params, v, extra)
        yield _guard("lemma-main", s, params, run)


def suite_corollary(cfg):
    ranks = [cfg.rank] if cfg.rank else [2, 3, 4]
    order = cfg.order or 4
    for r in ranks:
        if r < 2:
            raise ConfigError(["rank: the alternating-sum identity needs rank >= 2"])
    grid = [{"r": r, "n": cfg.n or r + 1, "order": order} for r in ranks]
    for s, params in _cases(cfg, "corollary-id", grid):
        def run():
            rng = random.Random(s)
            r, n = params["r"], params["n"]
            ch = ChartSpec("complex", n)
            m = random_structured_metric(rng, ch, r, order, cfg.deg, cfg.bound)
            top = min(n, r + 1)
            chars = sub_metric_characters(m, top, matched_order(m))
            per_k = {}
            ok = True
            vo = EXACT
            first = None
            for k in range(1, top + 1):
                v = alternating_sum_check(m, k, chars)
                per_k[str(k)] = v.to_dict()
                vo = min(vo, v.order)
                if not v and ok:
                    ok = False
                    first = dict(v.mismatch, k=k)
            rec = {"check": "corollary-id", "seed": s, "parameters": params,
                   "verdict": "pass" if ok else "fail", "verified_order": order_str(vo),
                   "first_mismatch": first, "per_k": per_k}
            return rec
        yield _guard("corollary-id", s, params, run)


def suite_newton(cfg):
    n = cfg.n or 2
    order = cfg.order or 4
    ranks = [cfg.rank] if cfg.rank else [1, 2, 3, 4, 5]
    total = cfg.ncases("newton")
    for i in range(total):
        r = ranks[i % len(ranks)]
        params = {"rank": r, "n": n, "order": order, "case": i}
        s = sub_seed(cfg.seed, "newton", i)

        def run():
            rng = random.Random(s)
            h = random_general_metric(rng, ChartSpec("complex", n), r, order, cfg.deg, cfg.bound)
            c = chern_total(h)
            chv = chern_character(h)
            v1 = lambda_equal(newton_convert(c, "c->ch", r), chv)
            v2 = lambda_equal(newton_convert(chv, "ch->c", r), c)
            v3 = lambda_equal(newton_convert(newton_convert(c, "c->ch", r), "ch->c", r), c)
            v = v1 if not v1 else (v2 if not v2 else v3)
            return _record("newton", s, params, v,
                           {"c_to_ch": v1.to_dict(), "ch_to_c": v2.to_dict(),
                            "roundtrip": v3.to_dict()})
        yield _guard("newton", s, params, run)


def _random_real_kk(rng, ch, k, order, deg, bound, mode):
    """Basic terms whose (k,k)-component is real."""
    if mode == "real-functions":
        funcs = [random_real_jet(rng, ch, order, deg, bound, constant=True)
                 for _ in range(2 * k + 1)]
        return [rz.BasicFormTerm(tuple(funcs))]
    a = random_form(rng, ch, order, bidegree=(k, k), max_terms=2, deg=deg, bound=bound)
    a = a + conjugate_form(a)
    return rz.basic_terms_from_form(a)


def suite_decompose(cfg):
    order = cfg.order or 3
    ks = [cfg.k] if cfg.k else [1, 2, 3]
    combos = [(k, n) for k in ks for n in ([cfg.n] if cfg.n else range(k, 4)) if n >= k]
    total = cfg.ncases("decompose")
    for i in range(total):
        k, n = combos[i % len(combos)]
        mode = "real-functions" if i % 2 == 0 else "conjugate-pair"
        params = {"k": k, "n": n, "order": order, "input": mode, "case": i}
        s = sub_seed(cfg.seed, "decompose", i)

        def run():
            rng = random.Random(s)
            ch = ChartSpec("complex", n)
            terms = _random_real_kk(rng, ch, k, order, min(cfg.deg, 1 if k == 3 else 2),
                                    cfg.bound, mode)
            target = Form.zero(ch)
            for t in terms:
                target = target + t.to_form()
            target = target.component(k, k)
            comp = rz.decompose_composite(terms, k)
            v1 = form_equal(rz.expand_blocks(comp, ch), target)
            elem = rz.decompose_elementary(target, k)
            v2 = form_equal(rz.expand_blocks(elem, ch), target)
            v = v1 if not v1 else v2
            return _record("decompose", s, params, v,
                           {"composite": dict(v1.to_dict(), blocks=len(comp)),
                            "elementary": dict(v2.to_dict(), blocks=len(elem))})
        yield _guard("decompose", s, params, run)


def _bundle_summary(E: rz.VirtualBundle):
    return [{"rank": x.rank, "multiplicity": x.multiplicity,
             "h1": [[c, m.rank] for c, m in x.h1], "h2": [[c, m.rank] for c, m in x.h2]}
            for x in E.summands]


def suite_realize_composite(cfg):
    order = cfg.order or 4
    ks = [cfg.k] if cfg.k else [2, 3]
    combos = [(k, n) for k in ks for n in ([cfg.n] if cfg.n else range(k, 4)) if n >= k]
    total = cfg.ncases("realize-composite")
    for i in range(total):
        k, n = combos[i % len(combos)]
        params = {"k": k, "n": n, "order": order, "case": i}
        s = sub_seed(cfg.seed, "realize-composite", i)

        def run():
            rng = random.Random(s)
            ch = ChartSpec("complex", n)
            sigma = random_real_jet(rng, ch, order, cfg.deg, cfg.bound)
            fs = [random_complex_jet(rng, ch, order, cfg.deg, cfg.bound) for _ in range(k - 1)]
            R = rz.realize_composite(k, sigma, fs, n)
            return _record("realize-composite", s, params, R.verdict,
                           {"summands": len(R.bundle.summands),
                            "layers": [list(x) for x in R.layers]})
        yield _guard("realize-composite", s, params, run)


def suite_realize_vandermonde(cfg):
    order = cfg.order or 4
    ns = [cfg.n] if cfg.n else [1, 2, 3, 4]
    total = cfg.ncases("realize-vandermonde")
    for i in range(total):
        n = ns[i % len(ns)]
        params = {"n": n, "order": order, "case": i}
        s = sub_seed(cfg.seed, "realize-vandermonde", i)

        def run():
            rng = random.Random(s)
            ch = ChartSpec("complex", n)
            sigma = random_real_jet(rng, ch, order, cfg.deg, cfg.bound)
            R = rz.realize_line_vandermonde(sigma, n)
            data = R.layers[0]
            nonzero = [k for k, c in virtual_degrees(R).items() if c]
            ok = R.verdict.equal and nonzero == [1] or (sigma.is_zero() and not nonzero)
            v = R.verdict
            if not ok:
                v.equal = False
            return _record("realize-vandermonde", s, params, v,
                           {"multiplicities": data.counts, "N": data.N,
                            "nonzero_degrees": nonzero})
        yield _guard("realize-vandermonde", s, params, run)


def virtual_degrees(R) -> dict:
    """lambda-degree -> whether the virtual ch difference is nonzero there."""
    E = R.bundle
    ch = R.target.chart
    if not E.summands:
        return {}
    p = rz.virtual_ch(E, ch.dim)
    return {k: not all(j.is_zero() for j in c.terms.values()) for k, c in sorted(p.coeffs.items())}


def suite_realize_smooth(cfg):
    m = cfg.n or 6
    degs = [cfg.k] if cfg.k else [1, 3, 5]
    total = cfg.ncases("realize-smooth")
    for i in range(total):
        deg = degs[i % len(degs)]
        params = {"degree": deg, "dim": m, "case": i}
        s = sub_seed(cfg.seed, "realize-smooth", i)

        def run():
            rng = random.Random(s)
            ch = ChartSpec("real", m)
            funcs = tuple(random_real_jet(rng, ch, EXACT, cfg.deg, cfg.bound, constant=True,
                                          density=0.5) for _ in range(deg + 1))
            conns, v = rz.realize_smooth_exact([rz.BasicFormTerm(funcs)])
            # closed loop through the Chern-Simons series
            cs = Form.zero(ch)
            for c in conns:
                cs = cs + rz.cs_closed_form(c.eta, m).scale(c.sign)
            loop = form_equal(d(cs), rz.smooth_ch_sum(conns, ch))
            w = v if not v else loop
            return _record("realize-smooth", s, params, w,
                           {"connections": len(conns), "cs_loop": loop.to_dict()})
        yield _guard("realize-smooth", s, params, run)


def suite_cs_closed(cfg):
    m = cfg.n or 4
    total = cfg.ncases("cs-closed")
    for i in range(total):
        params = {"dim": m, "case": i}
        s = sub_seed(cfg.seed, "cs-closed", i)

        def run():
            rng = random.Random(s)
            ch = ChartSpec("real", m)
            eta = random_form(rng, ch, EXACT, degree=1, max_terms=3, deg=cfg.deg,
                              bound=cfg.bound)
            cs = rz.cs_closed_form(eta, m)
            rhs = rz.exp_form(d(eta), m // 2) - Form.const(ch, 1)
            return _record("cs-closed", s, params, form_equal(d(cs), rhs))
        yield _guard("cs-closed", s, params, run)


def _calculus_props():
    """Each property takes forms a, b of degrees p, q."""
    zero = lambda a: Form.zero(a.chart)
    return {
        "d-squared": lambda a, b, p, q: form_equal(d(d(a)), zero(a)),
        "del-squared": lambda a, b, p, q: form_equal(partial(partial(a)), zero(a)),
        "dbar-squared": lambda a, b, p, q: form_equal(dbar(dbar(a)), zero(a)),
        "del-dbar-anticommute": lambda a, b, p, q: form_equal(partial(dbar(a)),
                                                              -dbar(partial(a))),
        "graded-commutativity": lambda a, b, p, q: form_equal(
            wedge(a, b), wedge(b, a).scale(-1 if (p * q) % 2 else 1)),
        "leibniz": lambda a, b, p, q: form_equal(
            d(wedge(a, b)), wedge(d(a), b) + wedge(a, d(b)).scale((-1) ** p)),
        "conjugation-involution": lambda a, b, p, q: form_equal(
            conjugate_form(conjugate_form(a)), a),
    }


def suite_calculus(cfg):
    n = cfg.n or 2
    order = cfg.order or 3
    ch = ChartSpec("complex", n)
    props = _calculus_props()
    for name, fn in props.items():
        for i in range(cfg.ncases("calculus")):
            s = sub_seed(cfg.seed, "calculus", name, i)
            rng = random.Random(s)
            p = rng.randint(0, 2 * n)
            q = rng.randint(0, 2 * n)
            params = {"property": name, "n": n, "order": order, "degrees": [p, q], "case": i}

            def run():
                a = random_form(rng, ch, order, degree=p, deg=cfg.deg, bound=cfg.bound)
                b = random_form(rng, ch, order, degree=q, deg=cfg.deg, bound=cfg.bound)
                return _record("calculus", s, params, fn(a, b, p, q))
            yield _guard("calculus", s, params, run)


def _quad_case(check, name, tol, table, extra=None):
    scheme, residual = table[0]
    conv = quad.converges(table)
    ok = residual <= tol and conv
    rec = {"check": check, "seed": None,
           "parameters": {"example": name, "scheme": scheme.to_dict(), "tol": tol},
           "verdict": "pass" if ok else "fail", "residual": residual,
           "convergence": [{"nodes": s.to_dict(), "residual": r} for s, r in table],
           "converges": conv}
    if extra:
        rec.update(extra)
    return rec


def suite_quadrature_pl(cfg, scheme=None):
    tol = cfg.tol or DEFAULT_TOL["quadrature-pl"]
    scheme = scheme or quad.QuadratureScheme()
    for name, phi in quad.pl_examples().items():
        table = quad.refinement_table(lambda s: quad.pl_check(phi, s).residual, scheme, cfg.levels)
        r = quad.pl_check(phi, scheme)
        yield _quad_case("quadrature-pl", name, tol, table,
                         {"integral": r.to_dict()["integral"], "target": r.to_dict()["target"]})


def suite_quadrature_cs(cfg, scheme=None):
    tol = cfg.tol or DEFAULT_TOL["quadrature-cs"]
    scheme = scheme or quad.QuadratureScheme()
    for name, fam in quad.cs_examples().items():
        runs = {}

        def run(s):
            t = quad.cs_transgression(fam, s)
            runs[s] = t
            return t.relative
        table = quad.refinement_table(run, scheme, cfg.levels)
        extra = {"verified_order": runs[scheme].order}
        if fam.rank == 1:
            cs = quad.cs_numeric(fam, scheme)
            extra["vs_closed_form"] = quad.form_residual(cs, rz.cs_closed_form(fam.a1[0][0]), 2)
        yield _quad_case("quadrature-cs", name, tol, table, extra)


def suite_quadrature_bc(cfg, scheme=None):
    tol = cfg.tol or DEFAULT_TOL["quadrature-bc"]
    scheme = scheme or quad.QuadratureScheme(radial=16, angular=2)
    for name, fam in quad.bc_examples().items():
        runs = {}

        def run(s):
            t = quad.bc_transgression(fam, s)
            runs[s] = t
            return t.relative
        table = quad.refinement_table(run, scheme, min(cfg.levels, 2) if fam.h1.rank > 1
                                      else cfg.levels)
        yield _quad_case("quadrature-bc", name, tol, table,
                         {"verified_order": runs[scheme].order})


SUITE_FUNCS: dict[str, Callable] = {
    "lemma-algebra": suite_lemma_algebra, "lemma-main": suite_lemma_main,
    "corollary-id": suite_corollary, "newton": suite_newton, "decompose": suite_decompose,
    "realize-composite": suite_realize_composite,
    "realize-vandermonde": suite_realize_vandermonde,
    "realize-smooth": suite_realize_smooth, "cs-closed": suite_cs_closed,
    "calculus": suite_calculus, "quadrature-pl": suite_quadrature_pl,
    "quadrature-cs": suite_quadrature_cs, "quadrature-bc": suite_quadrature_bc,
}


@dataclass
class Report:
    records: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r["verdict"] == "pass" for r in self.records)

    def summary(self, suites) -> list:
        out = []
        for s in suites:
            rs = [r for r in self.records if r["check"] == s]
            out.append({"summary": s, "cases": len(rs),
                        "passed": sum(r["verdict"] == "pass" for r in rs),
                        "failed": sum(r["verdict"] != "pass" for r in rs)})
        return out

    def lines(self, suites, timing=False) -> list[str]:
        out = [json.dumps(r, sort_keys=True) for r in self.records]
        for srec in self.summary(suites):
            if timing:
                srec["wall_clock_s"] = round(self.timings.get(srec["summary"], 0.0), 3)
            out.append(json.dumps(srec, sort_keys=True))
        total = {"summary": "total", "cases": len(self.records),
                 "passed": sum(r["verdict"] == "pass" for r in self.records),
                 "status": "pass" if self.passed else "fail"}
        out.append(json.dumps(total, sort_keys=True))
        return out


def run_suite(cfg: SuiteConfig) -> Report:
    cfg.validate()
    suites = SUITES if cfg.suite == "all" else [cfg.suite]
    rep = Report()
    for s in suites:
        t0 = time.perf_counter()
        rep.records.extend(SUITE_FUNCS[s](cfg))
        rep.timings[s] = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------------------------
# realize subcommand

def _parse_chart(spec, field_name="chart"):
    try:
        return ChartSpec.from_dict(spec[field_name])
    except KeyError:
        raise ConfigError([f"{field_name}: missing"])
    except (TypeError, ValueError) as e:
        raise ConfigError([f"{field_name}: {e}"])


def _parse_jet(ch, data, order, where):
    if not isinstance(data, dict):
        raise ConfigError([f"{where}: expected a {{monomial: coefficient}} object"])
    try:
        return jet_from_dict(ch, data, order)
    except (JetError, ValueError, ZeroDivisionError) as e:
        raise ConfigError([f"{where}: {e}"])


def run_realize(spec: dict):
    """Returns (artifact dict, report record)."""
    if not isinstance(spec, dict):
        raise ConfigError(["spec: top level must be an object"])
    kind = spec.get("kind")
    if kind not in ("composite", "vandermonde", "smooth"):
        raise ConfigError([f"kind: expected composite, vandermonde or smooth, got {kind!r}"])
    ch = _parse_chart(spec)
    order = spec.get("order", 4)
    if kind == "smooth":
        if ch.is_complex:
            raise ConfigError(["chart: smooth realizations need a real chart"])
        terms = spec.get("terms")
        if not isinstance(terms, list) or not terms:
            raise ConfigError(["terms: expected a non-empty list of function lists"])
        bts = []
        for i, t in enumerate(terms):
            if not isinstance(t, list) or not t:
                raise ConfigError([f"terms[{i}]: expected a list of functions"])
            funcs = [_parse_jet(ch, x, EXACT, f"terms[{i}][{j}]") for j, x in enumerate(t)]
            try:
                bts.append(rz.BasicFormTerm(tuple(funcs)))
            except rz.RealizeError as e:
                raise ConfigError([f"terms[{i}]: {e}"])
        try:
            conns, v = rz.realize_smooth_exact(bts)
        except rz.RealizeError as e:
            raise ConfigError([f"terms: {e}"])
        artifact = {"kind": "smooth", "connections": [
            {"sign": c.sign, "eta": _form_json(c.eta)} for c in conns]}
        return artifact, _record("realize-smooth", None, {"terms": len(bts)}, v)
    if not ch.is_complex:
        raise ConfigError(["chart: complex realizations need a complex chart"])
    if not isinstance(order, int) or order < 3:
        raise ConfigError(["order: must be an integer >= 3"])
    sigma = _parse_jet(ch, spec.get("sigma", {}), order, "sigma")
    if not sigma.is_real() or sigma.constant_term():
        raise ConfigError(["sigma: must be real with zero constant term"])
    if kind == "vandermonde":
        alphas = spec.get("alphas")
        try:
            from fractions import Fraction
            alphas = None if alphas is None else [Fraction(str(a)) for a in alphas]
            R = rz.realize_line_vandermonde(sigma, ch.dim, alphas)
        except (ValueError, ZeroDivisionError) as e:
            raise ConfigError([f"alphas: {e}"])
        data = R.layers[0]
        artifact = {"kind": "vandermonde", "alphas": [str(a) for a in data.alphas],
                    "c": [str(c) for c in data.c], "N": data.N,
                    "betas": [str(b) for b in data.betas], "multiplicities": data.counts,
                    "bundle": R.bundle.to_dict()}
        return artifact, _record("realize-vandermonde", None, {"n": ch.dim}, R.verdict)
    k = spec.get("k")
    fs = spec.get("f", [])
    if not isinstance(k, int) or not 2 <= k <= ch.dim:
        raise ConfigError([f"k: must be an integer in 2..{ch.dim}"])
    if not isinstance(fs, list) or len(fs) != k - 1:
        raise ConfigError([f"f: expected a list of k-1 = {k - 1} functions"])
    fj = [_parse_jet(ch, x, order, f"f[{i}]") for i, x in enumerate(fs)]
    R = rz.realize_composite(k, sigma, fj, ch.dim)
    artifact = {"kind": "composite", "k": k, "bundle": R.bundle.to_dict(),
                "layers": [list(x) for x in R.layers]}
    return artifact, _record("realize-composite", None, {"k": k, "n": ch.dim}, R.verdict)


def _form_json(a: Form):
    return form_to_dict(a)


# ---------------------------------------------------------------------------
# argument parsing

def _add_common(p):
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--cases", type=int, default=None)
    p.add_argument("--order", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--deg", type=int, default=None)
    p.add_argument("--bound", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--levels", type=int, default=None)
    p.add_argument("--config", default=None, help="JSON file with the same fields")
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    p.add_argument("--timing", action="store_true",
                   help="add wall-clock seconds to summaries (breaks byte-identical reruns)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chernforms",
                                 description="Exact Chern-Weil identity checks and realizations.")
    sub = ap.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", choices=SUITES + ["all"])
    _add_common(v)
    r = sub.add_parser("realize", help="realize a target given in a JSON spec file")
    r.add_argument("spec")
    r.add_argument("--out", default=None)
    q = sub.add_parser("quadrature", help="numeric fiber-integral checks")
    q.add_argument("which", choices=["pl", "cs", "bc", "all"])
    q.add_argument("--radial", type=int, default=None)
    q.add_argument("--angular", type=int, default=None)
    q.add_argument("--fiber", type=int, default=None)
    _add_common(q)
    return ap


def _config_from(args, suite) -> SuiteConfig:
    data = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError([f"config: {e}"])
        if not isinstance(data, dict):
            raise ConfigError(["config: top level must be an object"])
        known = set(SuiteConfig.__dataclass_fields__)
        bad = sorted(set(data) - known)
        if bad:
            raise ConfigError([f"{b}: unknown field" for b in bad])
    data["suite"] = suite
    for name in ("seed", "cases", "order", "n", "rank", "k", "deg", "bound", "tol", "levels"):
        val = getattr(args, name, None)
        if val is not None:
            data[name] = val
    try:
        cfg = SuiteConfig(**data)
    except TypeError as e:
        raise ConfigError([f"config: {e}"])
    for name, typ in (("seed", int), ("cases", int), ("order", int), ("n", int),
                      ("rank", int), ("k", int), ("deg", int), ("bound", int), ("levels", int)):
        val = getattr(cfg, name)
        if val is not None and (not isinstance(val, typ) or isinstance(val, bool)):
            raise ConfigError([f"{name}: expected an integer"])
    if cfg.tol is not None and not isinstance(cfg.tol, (int, float)):
        raise ConfigError(["tol: expected a number"])
    return cfg.validate()


def _emit(lines, out):
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    try:
        if args.command == "verify":
            cfg = _config_from(args, args.suite)
            rep = run_suite(cfg)
            suites = SUITES if cfg.suite == "all" else [cfg.suite]
            _emit(rep.lines(suites, args.timing), args.out)
            return 0 if rep.passed else 1
        if args.command == "quadrature":
            which = {"pl": ["quadrature-pl"], "cs": ["quadrature-cs"],
                     "bc": ["quadrature-bc"]}.get(args.which,
                                                  ["quadrature-pl", "quadrature-cs",
                                                   "quadrature-bc"])
            rep = Report()
            for s in which:
                cfg = _config_from(args, s)
                kw = {}
                if args.radial or args.angular or args.fiber:
                    base = (quad.QuadratureScheme(radial=16, angular=2) if s == "quadrature-bc"
                            else quad.QuadratureScheme())
                    kw["scheme"] = quad.QuadratureScheme(args.radial or base.radial,
                                                         args.angular or base.angular,
                                                         args.fiber or base.fiber)
                t0 = time.perf_counter()
                rep.records.extend(SUITE_FUNCS[s](cfg, **kw))
                rep.timings[s] = time.perf_counter() - t0
            _emit(rep.lines(which, args.timing), args.out)
            return 0 if rep.passed else 1
        if args.command == "realize":
            try:
                with open(args.spec) as fh:
                    spec = json.load(fh)
            except json.JSONDecodeError as e:
                raise ConfigError([f"spec: line {e.lineno} column {e.colno}: {e.msg}"])
            except OSError as e:
                raise ConfigError([f"spec: {e}"])
            artifact, rec = run_realize(spec)
            if rec["verdict"] != "pass":
                _emit([json.dumps({"report": rec}, sort_keys=True)], args.out)
                return 1
            _emit([json.dumps({"artifact": artifact, "report": rec}, sort_keys=True)], args.out)
            return 0
    except (ConfigError, quad.QuadratureError) as e:
        problems = getattr(e, "problems", [str(e)])
        for p in problems:
            print(f"config error: {p}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())

"""Independent oracle: recomputes reference values with sympy/scipy and freezes them.

Nothing here imports chernforms.  Run ``python tests/oracle/generate.py`` to
rewrite ``frozen.json``; the tests only read the frozen file.
"""

import json
import itertools
from pathlib import Path

import sympy as sp
from scipy import integrate

OUT = Path(__file__).with_name("frozen.json")


# --- a tiny exterior algebra: {sorted tuple of basis ids: expr} -------------

def _sort_sign(idx):
    idx = list(idx)
    if len(set(idx)) < len(idx):
        return 0, None
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return sign, tuple(idx)


def wedge(a, b):
    out = {}
    for (ka, va), (kb, vb) in itertools.product(a.items(), b.items()):
        s, k = _sort_sign(ka + kb)
        if s:
            out[k] = sp.expand(out.get(k, 0) + s * va * vb)
    return {k: v for k, v in out.items() if v != 0}


def add(*forms):
    out = {}
    for f in forms:
        for k, v in f.items():
            out[k] = sp.expand(out.get(k, 0) + v)
    return {k: v for k, v in out.items() if v != 0}


def scale(c, a):
    return {k: sp.expand(c * v) for k, v in a.items()}


class Chart:
    def __init__(self, n):
        self.n = n
        self.z = sp.symbols(f"z1:{n + 1}")
        self.zb = sp.symbols(f"zb1:{n + 1}")

    def deriv(self, a, which):
        # basis ids: dz_i -> i, dzb_i -> n+i ; new differential goes in front
        out = {}
        vars_ = self.z if which == "del" else self.zb
        off = 0 if which == "del" else self.n
        for k, v in a.items():
            for i, x in enumerate(vars_):
                dv = sp.diff(v, x)
                if dv == 0:
                    continue
                out = add(out, wedge({(off + i,): dv}, {k: 1}))
        return out

    def conj(self, a):
        n = self.n
        out = {}
        sub = {**{self.z[i]: self.zb[i] for i in range(n)}, **{self.zb[i]: self.z[i] for i in range(n)}}
        for k, v in a.items():
            nk = tuple((i + n) % (2 * n) for i in k)
            s, kk = _sort_sign(nk)
            cv = sp.expand(sp.conjugate(v)).subs(
                {sp.conjugate(x): y for x, y in sub.items()}, simultaneous=True)
            out = add(out, {kk: s * cv})
        return out


def sign_oracles():
    C = Chart(1)
    z, zb = C.z[0], C.zb[0]
    r = C.deriv(C.deriv({(): z * zb}, "del"), "dbar")
    # conj(i dz^dzb): coefficient of basis (0,1)
    c = C.conj({(0, 1): sp.I})
    return {"dbar_del_zzb": pair(r[(0, 1)]), "conj_i_dz_dzb": pair(c[(0, 1)])}


# --- jets via truncated Taylor expansion -------------------------------------

def pair(c):
    c = sp.nsimplify(c)
    return [str(sp.re(c)), str(sp.im(c))]


def taylor(expr, vars_, order):
    t = sp.Symbol("t")
    e = expr.subs({v: t * v for v in vars_}, simultaneous=True)
    s = sp.series(e, t, 0, order + 1).removeO()
    poly = sp.Poly(sp.expand(s.subs(t, 1)), *vars_)
    return {"*".join(f"{v}^{p}" if p > 1 else str(v)
                     for v, p in zip(vars_, mon) if p) or "1": pair(c)
            for mon, c in poly.terms() if c != 0}


def jet_oracles():
    C = Chart(2)
    z1, z2 = C.z
    zb1, zb2 = C.zb
    vars_ = list(C.z) + list(C.zb)
    a = 1 + z1 + 2 * z1 * zb2 - sp.I * z2 ** 2
    u = z1 * zb1 + sp.Rational(1, 2) * z2 - sp.I * zb2
    return {
        "inverse": {"input": {"1": "1", "z1": "1", "z1*zb2": "2", "z2^2": "-i"}, "order": 4,
                    "value": taylor(1 / a, vars_, 4)},
        "exp": {"input": {"z1*zb1": "1", "z2": "1/2", "zb2": "-i"}, "order": 4,
                "value": taylor(sp.exp(u), vars_, 4)},
        "log1p": {"input": {"z1*zb1": "1", "z2": "1/2", "zb2": "-i"}, "order": 4,
                  "value": taylor(sp.log(1 + u), vars_, 4)},
    }


# --- curvature of a rank-2 structured metric, symbolically ------------------

def chern_oracle():
    """c_1, c_2 of h(sigma, f) on C^2 with the determinant of I + lam*Theta."""
    C = Chart(2)
    z1, z2 = C.z
    zb1, zb2 = C.zb
    sigma = z1 * zb1 + z2 * zb2 - z1 * zb2 - z2 * zb1 + 2 * z1 * z1 * zb1 * zb1 / 2
    f = z1 + 2 * z1 * z2 - sp.I * z2 * z2
    fb = zb1 + 2 * zb1 * zb2 + sp.I * zb2 * zb2
    es = sp.exp(sigma)
    h = sp.Matrix([[1, fb], [f, f * fb + es]])
    hinv = h.inv()
    n = 2
    # Theta_{ab} as a (1,1)-form: dbar of (hinv dh)
    A = [[{} for _ in range(2)] for _ in range(2)]
    for a_, b_ in itertools.product(range(2), range(2)):
        acc = {}
        for i, x in enumerate(C.z):
            e = sum(hinv[a_, c] * sp.diff(h[c, b_], x) for c in range(2))
            acc = add(acc, {(i,): e})
        A[a_][b_] = acc
    Th = [[C.deriv(A[a_][b_], "dbar") for b_ in range(2)] for a_ in range(2)]
    c1 = add(Th[0][0], Th[1][1])
    c2 = add(wedge(Th[0][0], Th[1][1]), scale(-1, wedge(Th[0][1], Th[1][0])))
    vars_ = list(C.z) + list(C.zb)
    out = {"sigma": str(sigma), "f": str(f)}
    out["c1"] = {",".join(map(str, k)): taylor(sp.simplify(v), vars_, 2) for k, v in c1.items()}
    out["c2"] = {",".join(map(str, k)): taylor(sp.simplify(v), vars_, 2) for k, v in c2.items()}
    return out


def vandermonde_oracle():
    out = {}
    for alphas in ([1, -1], [1, 2, 3], [1, 2, 3, 4], [1, 2, 3, 4, 5]):
        m = len(alphas)
        V = sp.Matrix([[sp.Rational(a) ** j for a in alphas] for j in range(m)])
        rhs = sp.Matrix([1 if j == 1 else 0 for j in range(m)])
        c = V.LUsolve(rhs)
        out[",".join(map(str, alphas))] = [str(x) for x in c]
    return out


def pl_oracle():
    """int (i/2pi) ddbar(phi) log|w|^2 over P^1, radial functions phi(|w|^2)."""
    import math

    def integral(g):
        # for phi = g(s), s = |w|^2: dbar del phi = (g' + s g'') dwb^dw = -(g' + s g'') dw^dwb
        # and dw^dwb = -2i dx dy, so (i/2pi) dbar del phi = -(1/pi)(g' + s g'') dx dy
        def dens(r):
            s = r * r
            return -(1 / math.pi) * g(s) * math.log(s) * 2 * math.pi * r
        return dens

    res = {}
    # inverse Fubini-Study potential 1/(1+s): g' + s g'' = (s-1)/(1+s)^3
    f1 = integral(lambda s: (s - 1) / (1 + s) ** 3)
    v1 = integrate.quad(f1, 0, 1, limit=200)[0] + integrate.quad(f1, 1, math.inf, limit=200)[0]
    res["inverse-fs"] = v1
    res["fs-complement"] = -v1
    return res


if __name__ == "__main__":
    data = {"signs": sign_oracles(), "jets": jet_oracles(), "chern_rank2": chern_oracle(),
            "vandermonde": vandermonde_oracle(), "pl": pl_oracle()}
    OUT.write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")
    print(json.dumps(data["signs"]), data["vandermonde"], data["pl"])

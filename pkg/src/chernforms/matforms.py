"""Matrices of forms, polynomials in the formal variable lambda, determinants.

``lambda`` stands for sqrt(-1)/2pi and is never evaluated: it is a grading.
Determinants are only taken over even entries, which commute, so the
permutation expansion has no ordering ambiguity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .forms import Form, FormError, Verdict, form_equal, form_to_dict, wedge
from .jetring import EXACT, ChartSpec, GaussianRational, Jet


class LambdaPoly:
    """Finite polynomial sum_k lambda^k c_k with form coefficients."""

    __slots__ = ("chart", "coeffs")

    def __init__(self, chart: ChartSpec, coeffs: dict | None = None):
        self.chart = chart
        out = {}
        for k, c in (coeffs or {}).items():
            if isinstance(c, Jet):
                c = Form.function(c)
            if c.chart != chart:
                raise FormError("chart mismatch in lambda coefficient")
            out[int(k)] = c
        self.coeffs = out

    @classmethod
    def const(cls, chart, c, order=EXACT):
        return cls(chart, {0: Form.const(chart, c, order)})

    @classmethod
    def monomial(cls, form: Form, k: int = 1):
        return cls(form.chart, {k: form})

    def coeff(self, k: int) -> Form:
        c = self.coeffs.get(k)
        if c is None:
            return Form.zero(self.chart, self.order)
        return c

    __getitem__ = coeff

    @property
    def order(self):
        return min((c.order for c in self.coeffs.values()), default=EXACT)

    def degree(self) -> int:
        return max((k for k, c in self.coeffs.items() if not c.is_zero()), default=-1)

    def degrees(self):
        return sorted(self.coeffs)

    def is_even(self) -> bool:
        return all(c.is_even() for c in self.coeffs.values())

    def is_odd(self) -> bool:
        return all(c.is_odd() for c in self.coeffs.values())

    def truncate_lambda(self, top: int) -> "LambdaPoly":
        return LambdaPoly(self.chart, {k: c for k, c in self.coeffs.items() if k <= top})

    def map(self, fn: Callable[[Form], Form]) -> "LambdaPoly":
        return LambdaPoly(self.chart, {k: fn(c) for k, c in self.coeffs.items()})

    def __repr__(self):
        parts = [f"λ^{k}: {c!r}" for k, c in sorted(self.coeffs.items())]
        return "LambdaPoly{" + ", ".join(parts) + "}"

    def _lift(self, o):
        if isinstance(o, LambdaPoly):
            if o.chart != self.chart:
                raise FormError("chart mismatch")
            return o
        if isinstance(o, (Form, Jet)):
            return LambdaPoly(self.chart, {0: o})
        try:
            return LambdaPoly.const(self.chart, o)
        except (TypeError, ValueError):
            return None

    def __add__(self, o):
        o = self._lift(o)
        if o is None:
            return NotImplemented
        out = dict(self.coeffs)
        for k, c in o.coeffs.items():
            out[k] = out[k] + c if k in out else c
        return LambdaPoly(self.chart, out)

    __radd__ = __add__

    def __neg__(self):
        return self.map(lambda c: -c)

    def __sub__(self, o):
        o = self._lift(o)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, o):
        o = self._lift(o)
        if o is None:
            return NotImplemented
        return o + (-self)

    def scale(self, s) -> "LambdaPoly":
        return self.map(lambda c: c.scale(s))

    def __mul__(self, o):
        if isinstance(o, LambdaPoly):
            if o.chart != self.chart:
                raise FormError("chart mismatch")
            out: dict[int, Form] = {}
            for i, a in sorted(self.coeffs.items()):
                for j, b in sorted(o.coeffs.items()):
                    p = wedge(a, b)
                    out[i + j] = out[i + j] + p if i + j in out else p
            return LambdaPoly(self.chart, out)
        if isinstance(o, Form):
            return self.map(lambda c: wedge(c, o))
        if isinstance(o, Jet):
            return self.map(lambda c: c.times_function(o))
        try:
            return self.scale(o)
        except (TypeError, ValueError):
            return NotImplemented

    def __rmul__(self, o):
        if isinstance(o, Form):
            return self.map(lambda c: wedge(o, c))
        if isinstance(o, Jet):
            return self.map(lambda c: c.times_function(o))
        try:
            return self.scale(o)
        except (TypeError, ValueError):
            return NotImplemented

    def shift(self, k: int = 1) -> "LambdaPoly":
        """Multiply by lambda^k."""
        return LambdaPoly(self.chart, {d + k: c for d, c in self.coeffs.items()})

    def to_dict(self):
        return {str(k): form_to_dict(c) for k, c in sorted(self.coeffs.items())}


def lambda_equal(a: LambdaPoly, b: LambdaPoly, top: int | None = None) -> Verdict:
    """Per lambda-degree form comparison; reports the first mismatch."""
    degs = sorted(set(a.coeffs) | set(b.coeffs))
    order = EXACT
    for k in degs:
        if top is not None and k > top:
            continue
        v = form_equal(a.coeff(k), b.coeff(k))
        order = min(order, v.order)
        if not v:
            v.mismatch["lambda_degree"] = k
            return Verdict(False, v.order, v.mismatch)
    if not degs:
        order = min(a.order, b.order)
    return Verdict(True, order)


# ---------------------------------------------------------------------------

class MatrixForm:
    """Square matrix whose entries are Forms, LambdaPolys or Jets."""

    __slots__ = ("entries",)

    def __init__(self, entries: Sequence[Sequence]):
        rows = [list(r) for r in entries]
        r = len(rows)
        if any(len(row) != r for row in rows):
            raise FormError("matrix must be square")
        self.entries = rows

    @property
    def size(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    @classmethod
    def identity(cls, chart, r: int, kind: str = "form", order=EXACT):
        def one():
            if kind == "lambda":
                return LambdaPoly.const(chart, 1, order)
            if kind == "jet":
                return Jet.const(chart, 1, order)
            return Form.const(chart, 1, order)

        def zero():
            if kind == "lambda":
                return LambdaPoly(chart, {})
            if kind == "jet":
                return Jet.zero(chart, order)
            return Form.zero(chart, order)
        return cls([[one() if i == j else zero() for j in range(r)] for i in range(r)])

    def map(self, fn) -> "MatrixForm":
        return MatrixForm([[fn(x) for x in row] for row in self.entries])

    def __add__(self, o: "MatrixForm"):
        self._check(o)
        return MatrixForm([[a + b for a, b in zip(ra, rb)]
                           for ra, rb in zip(self.entries, o.entries)])

    def __sub__(self, o: "MatrixForm"):
        self._check(o)
        return MatrixForm([[a - b for a, b in zip(ra, rb)]
                           for ra, rb in zip(self.entries, o.entries)])

    def __neg__(self):
        return self.map(lambda x: -x)

    def scale(self, s):
        return self.map(lambda x: x.scale(s))

    def _check(self, o):
        if self.size != o.size:
            raise FormError(f"size mismatch {self.size} vs {o.size}")

    def __matmul__(self, o: "MatrixForm"):
        return mat_mul(self, o)

    def trace(self):
        return mat_trace(self)

    def transpose(self):
        r = self.size
        return MatrixForm([[self.entries[j][i] for j in range(r)] for i in range(r)])

    def diagonal(self):
        return [self.entries[i][i] for i in range(self.size)]

    def __repr__(self):
        return "MatrixForm(" + repr(self.entries) + ")"


def mat_mul(A: MatrixForm, B: MatrixForm) -> MatrixForm:
    """Ordinary product; entry products keep their left-right order."""
    A._check(B)
    r = A.size
    out = []
    for i in range(r):
        row = []
        for j in range(r):
            acc = None
            for k in range(r):
                p = A.entries[i][k] * B.entries[k][j]
                acc = p if acc is None else acc + p
            row.append(acc)
        out.append(row)
    return MatrixForm(out)


def mat_trace(A: MatrixForm):
    acc = None
    for x in A.diagonal():
        acc = x if acc is None else acc + x
    return acc


def mat_power(A: MatrixForm, k: int, identity: MatrixForm) -> MatrixForm:
    out = identity
    for _ in range(k):
        out = mat_mul(out, A)
    return out


def _is_even(x) -> bool:
    if isinstance(x, Jet):
        return True
    return x.is_even()


def super_det(M: MatrixForm):
    """Leibniz expansion over even (commuting) entries.

    Products are built row by row; partial products over the same set of
    used columns are shared, which is the same permutation sum organised
    by prefix.  Summation order is fixed, so results are reproducible.
    """
    r = M.size
    for row in M.entries:
        for x in row:
            if not _is_even(x):
                raise FormError("super_det needs even entries")
    if r == 0:
        raise FormError("empty matrix: use the unit of the ambient ring")
    # partial[S] = signed sum over injective maps rows 0..|S|-1 -> S
    partial = {0: None}
    for i in range(r):
        nxt: dict[int, object] = {}
        for S in sorted(partial):
            acc = partial[S]
            for c in range(r):
                bit = 1 << c
                if S & bit:
                    continue
                x = M.entries[i][c]
                if _vanishes(x):
                    continue
                # moving column c past the larger used columns
                neg = bin(S >> (c + 1)).count("1") & 1
                term = x if acc is None else acc * x
                if neg:
                    term = -term
                T = S | bit
                nxt[T] = nxt[T] + term if T in nxt else term
        partial = nxt
        if not partial:
            break
    full = (1 << r) - 1
    if full in partial:
        return partial[full]
    return _zero_like(M.entries[0][0])


def _vanishes(x) -> bool:
    if isinstance(x, LambdaPoly):
        return all(c.is_zero() for c in x.coeffs.values())
    return x.is_zero()


def _zero_like(x):
    if isinstance(x, LambdaPoly):
        return LambdaPoly(x.chart, {})
    if isinstance(x, Jet):
        return Jet.zero(x.chart, x.order)
    return Form.zero(x.chart, x.order)


# ---------------------------------------------------------------------------

@dataclass
class OddVectorPair:
    """Odd generators alpha_i, beta_j; the matrix A has entries alpha_i beta_j."""

    alpha: list
    beta: list

    def __post_init__(self):
        if len(self.alpha) != len(self.beta):
            raise FormError("alpha and beta must have equal length")
        for x in list(self.alpha) + list(self.beta):
            if not x.is_odd():
                raise FormError("OddVectorPair entries must be odd forms")

    @property
    def k(self) -> int:
        return len(self.alpha)

    def matrix(self) -> MatrixForm:
        return MatrixForm([[wedge(a, b) for b in self.beta] for a in self.alpha])

    def a(self) -> Form:
        out = None
        for x, y in zip(self.alpha, self.beta):
            p = wedge(x, y)
            out = p if out is None else out + p
        return out


def rank_one_inverse(pair: OddVectorPair, chart: ChartSpec | None = None):
    """Closed forms for (I - lambda A)^{-1} and det(I - lambda A).

    inverse = I + (lambda - lambda^2 a + ... + (-1)^k lambda^{k+1} a^k) A
    det     = sum_{j<=k} (-lambda a)^j
    Both are finite because a^{k+1} = 0.  The product with I - lambda A is
    checked before returning.
    """
    k = pair.k
    if k == 0:
        if chart is None:
            raise FormError("empty pair needs an explicit chart")
        return MatrixForm([]), LambdaPoly.const(chart, 1)
    chart = pair.alpha[0].chart
    a = pair.a()
    A = pair.matrix()
    one = Form.const(chart, 1)
    powers = [one]
    for _ in range(k):
        powers.append(wedge(powers[-1], a))
    series = LambdaPoly(chart, {j + 1: powers[j].scale((-1) ** j) for j in range(k + 1)})
    det = LambdaPoly(chart, {j: powers[j].scale((-1) ** j) for j in range(k + 1)})
    Id = MatrixForm.identity(chart, k, "lambda")
    inv = Id + A.map(lambda x: series * x)
    # (I - lambda A)(I + s A) = I + s A - lambda A - lambda s A^2; s is even,
    # so it commutes past A and A^2 is formed once over plain forms
    A2 = mat_mul(A, A)
    ls = series.shift(1)
    prod = MatrixForm([[inv.entries[i][j] - LambdaPoly.monomial(A.entries[i][j], 1)
                        - ls * A2.entries[i][j]
                        for j in range(k)] for i in range(k)])
    for i in range(k):
        for j in range(k):
            want = LambdaPoly.const(chart, 1 if i == j else 0)
            v = lambda_equal(prod.entries[i][j], want)
            if not v:
                raise ArithmeticError(f"rank-one inverse check failed at ({i},{j}): {v.mismatch}")
    return inv, det


def one_minus_lambda(A: MatrixForm, chart) -> MatrixForm:
    """I - lambda A as a matrix of LambdaPolys."""
    Id = MatrixForm.identity(chart, A.size, "lambda")
    return Id - A.map(lambda x: LambdaPoly.monomial(x, 1))


def lemma_algebra_check(pair: OddVectorPair) -> Verdict:
    """super_det(I - lambda A) against sum_j (-lambda a)^j, together with the
    product check of the closed-form inverse."""
    try:
        _, det = rank_one_inverse(pair)
    except ArithmeticError as e:
        return Verdict(False, EXACT, {"inverse": str(e)})
    chart = pair.alpha[0].chart
    sd = super_det(one_minus_lambda(pair.matrix(), chart))
    return lambda_equal(sd, det)


__all__ = ["LambdaPoly", "MatrixForm", "OddVectorPair", "lambda_equal", "mat_mul",
           "mat_trace", "mat_power", "super_det", "rank_one_inverse", "one_minus_lambda",
           "lemma_algebra_check",
           "GaussianRational"]

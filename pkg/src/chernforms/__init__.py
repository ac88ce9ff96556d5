"""Exact Chern-Weil computations on jets of smooth functions.

Modules: ``jetring`` (truncated power series), ``forms`` (exterior calculus),
``matforms`` (matrices of forms, lambda-polynomials), ``chernweil`` (metrics,
curvature, characteristic forms), ``realize`` (decompositions and virtual
bundles), ``quadrature`` (numeric fiber integrals) and ``cli``.
"""

from .jetring import EXACT, ChartSpec, GaussianRational, Jet, JetError
from .forms import (Form, FormError, Verdict, conjugate_form, d, dbar, ddbar,
                    form_equal, partial, wedge)
from .matforms import LambdaPoly, MatrixForm, OddVectorPair, super_det
from .chernweil import (GeneralMetric, MetricError, StructuredMetric, chern_character,
                        chern_closed_form, chern_total, newton_convert)
from .realize import (BasicFormTerm, RealizeError, VirtualBundle, decompose_composite,
                      decompose_elementary, realize_composite, realize_line_vandermonde,
                      realize_smooth_exact)

__version__ = "0.1.0"

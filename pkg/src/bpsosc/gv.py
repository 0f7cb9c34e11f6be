"""Genus-zero Gopakumar-Vafa series and their comparison with oscillator tau sums.

The coefficient of lambda^{2g-2} (g >= 2) is

    chi (-1)^{g-1} B_{2g} B_{2g-2} / (4g (2g-2) (2g-2)!)
      + sum_beta GV(0, beta) (-1)^{g-1} B_{2g} / (2g (2g-2)!) Li_{3-2g}(x^beta),

x^beta = exp(2 pi i v_beta).  On the tau side each class (n, beta) with
Z = v_beta - n contributes Omega log Upsilon(Z/t), whose large-w expansion
has coefficients c_g = B_{2g}/(2g(2g-2)) of w^{2-2g}.  Summing over n,

    sum_n (v - n)^{2-2g} = (2 pi i)^{2g-2}/(2g-3)! Li_{3-2g}(e^{2 pi i v}),

which turns the t^{2g-2} coefficient of the windowed tau sum into the curve
term above at lambda = 2 pi t.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
import cmath
import math

import numpy as np

from .errors import OutOfRangeError, OutOfSectorError, PoleError, ValidationError
from .extrapolation import richardson
from .largen import geometric_weight, tau_m
from .quadrature import default_rule
from .specfun import bernoulli, polylog_neg, upsilon_asymptotic_fit

__all__ = [
    "FormalSeries",
    "CurveClass",
    "CurveClassTable",
    "GvCoefficient",
    "gv_coefficient",
    "gv_series",
    "CyContext",
    "cy_bps_structure",
    "oscillator_tau_sum_cy",
    "resum_check",
    "gv_tau_comparison",
    "G_MAX",
]

G_MAX = 16


class FormalSeries:
    """Truncated power series in one variable with complex coefficients."""

    def __init__(self, variable, coefficients, truncation):
        if int(truncation) != truncation or truncation < 0:
            raise ValidationError("truncation must be a nonnegative integer")
        self.variable = str(variable)
        self.truncation = int(truncation)
        coeffs = {}
        for k, c in dict(coefficients).items():
            if int(k) != k or k < 0:
                raise ValidationError(f"exponents must be nonnegative integers, got {k!r}")
            if k <= self.truncation and c != 0:
                coeffs[int(k)] = complex(c)
        self.coefficients = dict(sorted(coeffs.items()))

    def __getitem__(self, k):
        return self.coefficients.get(k, 0j)

    def _check(self, other):
        if self.variable != other.variable:
            raise ValidationError("series in different variables")

    def __add__(self, other):
        self._check(other)
        trunc = min(self.truncation, other.truncation)
        keys = set(self.coefficients) | set(other.coefficients)
        return FormalSeries(self.variable, {k: self[k] + other[k] for k in keys}, trunc)

    def __mul__(self, other):
        if not isinstance(other, FormalSeries):
            return FormalSeries(self.variable, {k: c * other for k, c in self.coefficients.items()},
                                self.truncation)
        self._check(other)
        trunc = min(self.truncation, other.truncation)
        out = {}
        for a, ca in self.coefficients.items():
            for b, cb in other.coefficients.items():
                if a + b <= trunc:
                    out[a + b] = out.get(a + b, 0j) + ca * cb
        return FormalSeries(self.variable, out, trunc)

    __rmul__ = __mul__

    def substitute(self, factor, variable=None):
        """Coefficients of f(factor * y) as a series in y."""
        return FormalSeries(variable or self.variable,
                            {k: c * factor ** k for k, c in self.coefficients.items()}, self.truncation)

    def is_zero(self):
        return not self.coefficients

    def to_json(self):
        return {"variable": self.variable, "truncation": self.truncation,
                "coefficients": {str(k): [c.real, c.imag] for k, c in self.coefficients.items()}}

    def __repr__(self):
        return f"FormalSeries({self.variable}, {self.coefficients}, O({self.variable}^{self.truncation + 1}))"


@dataclass(frozen=True)
class CurveClass:
    label: str
    gv0: Fraction
    v: complex

    @property
    def x(self):
        return cmath.exp(2j * math.pi * self.v)


@dataclass(frozen=True)
class CurveClassTable:
    """Curve classes with genus-zero GV invariants and complexified volumes v."""

    entries: tuple = field(default_factory=tuple)

    def __post_init__(self):
        items = self.entries.items() if isinstance(self.entries, dict) else self.entries
        out = []
        for item in items:
            if isinstance(item, CurveClass):
                label, gv0, v = item.label, item.gv0, item.v
            else:
                label, (gv0, v) = item
            gv0 = Fraction(gv0) if not isinstance(gv0, str) else Fraction(gv0.strip())
            v = complex(v)
            if v.imag == 0:
                raise PoleError(f"curve class {label!r}: Im v must be nonzero so that |x| != 1", "gv.curve_classes")
            out.append(CurveClass(str(label), gv0, v))
        labels = [c.label for c in out]
        if len(set(labels)) != len(labels):
            raise ValidationError("duplicate curve-class labels", "gv.curve_classes")
        object.__setattr__(self, "entries", tuple(sorted(out, key=lambda c: c.label)))

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class GvCoefficient:
    """Exact form of one lambda^{2g-2} coefficient.

    value = constant + sum_beta curve_prefactors[beta] * Li_{polylog_order}(x^beta)
    """

    g: int
    constant: Fraction
    curve_prefactors: dict
    polylog_order: int

    def value(self, table):
        return complex(self.constant) + self.curve_value(table)

    def curve_value(self, table):
        return sum(complex(self.curve_prefactors[c.label]) * polylog_neg(-self.polylog_order, c.x)
                   for c in table)


def _check_g(g):
    if int(g) != g or not 2 <= g <= G_MAX:
        raise OutOfRangeError(f"genus must lie in 2..{G_MAX}, got {g}")
    return int(g)


def gv_coefficient(chi, table, g):
    """Exact rational prefactors of the lambda^{2g-2} coefficient."""
    g = _check_g(g)
    sign = -1 if (g - 1) % 2 else 1
    b2g = bernoulli(2 * g)
    const = Fraction(chi) * sign * b2g * bernoulli(2 * g - 2) / (4 * g * (2 * g - 2) * factorial(2 * g - 2))
    unit = sign * b2g / (2 * g * factorial(2 * g - 2))
    return GvCoefficient(g, const, {c.label: c.gv0 * unit for c in table}, 3 - 2 * g)


def gv_series(chi, table, g_max):
    """The lambda-series with coefficients for g = 2..g_max (exponents 2g-2)."""
    g_max = _check_g(g_max)
    coeffs = {2 * g - 2: gv_coefficient(chi, table, g).value(table) for g in range(2, g_max + 1)}
    return FormalSeries("lambda", coeffs, 2 * g_max - 2)


@dataclass(frozen=True)
class CyContext:
    """Windowed classes (n, beta) with Omega and Z = v_beta - n."""

    n_window: int
    classes: tuple  # of (n, label, omega, Z)


def cy_bps_structure(table, n_window, omega_beta=None, t=None):
    """Materialize the classes (n, beta), |n| <= n_window.

    ``omega_beta`` maps labels to Omega (defaults to the GV invariants).
    If ``t`` is given, every class must satisfy Re(Z/t) > 0.
    """
    if int(n_window) != n_window or n_window < 0:
        raise ValidationError("n_window must be a nonnegative integer", "gv.n_window")
    n_window = int(n_window)
    omega_beta = omega_beta or {}
    out = []
    for c in table:
        if not c.v.imag > 0:
            raise OutOfSectorError(f"curve class {c.label!r} needs Im v > 0", "gv.curve_classes")
        om = Fraction(omega_beta.get(c.label, c.gv0))
        for n in range(-n_window, n_window + 1):
            z = c.v - n
            if t is not None and not (z / complex(t)).real > 0:
                raise OutOfSectorError(f"class (n={n}, {c.label}) violates Re(Z/t) > 0 at t = {t}")
            out.append((n, c.label, om, z))
    return CyContext(n_window, tuple(out))


def oscillator_tau_sum_cy(ctx, t, hbar, M, method="resummed", rule=None):
    """(1/hbar) sum_{m<=M} sum_{(n,beta)} log tau^{(m)} at (2 pi)^{-1} i t.

    Returns a dict with the value, the change from M/2 to M (an estimate of
    the truncation error in M) and the contribution of the outermost shell
    |n| = n_window.  The full n-sum does not converge; the window is a
    truncation of a formal product.
    """
    t = complex(t)
    rule = rule or default_rule()
    for n, label, _, z in ctx.classes:
        if not (z / t).real > 0:
            raise OutOfSectorError(f"class (n={n}, {label}) violates Re(Z/t) > 0 at t = {t}")
    x = rule.nodes

    def total(MM, shell_only=False):
        acc = 0j
        for n, label, om, z in ctx.classes:
            if shell_only and abs(n) != ctx.n_window:
                continue
            if method == "resummed":
                w = 2 * math.pi * z / t
                acc += float(om) / (2 * math.pi) * rule.integrate(x * np.log(x * x + w * w) * geometric_weight(x, MM))
            else:
                acc += sum(tau_m(om, z, m, t / (2 * math.pi), hbar, rule) for m in range(1, MM + 1)) / hbar
        return acc

    value = total(M)
    return {"value": value,
            "m_tail": abs(value - total(max(1, M // 2))),
            "n_shell": abs(total(M, shell_only=True))}


def _window_sum(v, k, N):
    n = np.arange(-N, N + 1)
    return complex(np.sum((v - n) ** (-float(k))))


def resum_check(v, g, n_window, extrapolate=False):
    """Compare sum_{|n|<=N} (v - n)^{2-2g} with its polylog resummation.

    rhs = (2 pi i)^{2g-2}/(2g-3)! sum_{d>=1} d^{2g-3} e^{2 pi i d v}, the
    d-sum cut once the terms fall below 1e-12 of the running total.
    With ``extrapolate`` the lhs is Richardson-extrapolated from windows
    N/8, N/4, N/2, N using the tail powers N^{3-2g}, N^{2-2g}, N^{1-2g}.
    Returns ``(lhs, rhs, error)``.
    """
    v = complex(v)
    g = int(g)
    if g < 2:
        raise OutOfRangeError("g must be at least 2")
    if not v.imag > 0:
        raise OutOfSectorError("resummation needs Im v > 0")
    N = int(n_window)
    if N < 1:
        raise ValidationError("n_window must be positive")
    k = 2 * g - 2
    if extrapolate:
        if N < 8:
            raise ValidationError("extrapolation needs n_window >= 8")
        Ns = [N // 8, N // 4, N // 2, N]
        lhs = complex(richardson(Ns, [_window_sum(v, k, n) for n in Ns], orders=(k - 1, k, k + 1)))
    else:
        lhs = _window_sum(v, k, N)
    q = cmath.exp(2j * math.pi * v)
    acc = 0j
    d = 1
    while True:
        term = d ** (2 * g - 3) * q ** d
        acc += term
        if abs(term) < 1e-12 * max(abs(acc), 1e-300) and d > 2 * g:
            break
        d += 1
        if d > 100000:
            raise OutOfRangeError("polylog series did not converge; Im v too small")
    rhs = (2j * math.pi) ** (2 * g - 2) / factorial(2 * g - 3) * acc
    return lhs, rhs, abs(lhs - rhs)


def gv_tau_comparison(table, g, n_window, omega_beta=None, fit=None):
    """t^{2g-2} coefficient of the windowed tau side against the GV curve term.

    tau side: sum_beta Omega_beta c_g sum_n (v_beta - n)^{2-2g}, with c_g
    fitted numerically from log Upsilon and the window sum extrapolated.
    GV side: the curve part of the lambda^{2g-2} coefficient times (2 pi)^{2g-2}.
    Returns ``(tau_side, gv_side, relative_error)``.
    """
    g = _check_g(g)
    omega_beta = omega_beta or {}
    if fit is None:
        fit = upsilon_asymptotic_fit(g_max=max(g, 3), ws=tuple(np.geomspace(8.0, 80.0, 24)), terms=8)
    cg = fit[g]
    tau_side = 0j
    for c in table:
        om = float(Fraction(omega_beta.get(c.label, c.gv0)))
        lhs, _, _ = resum_check(c.v, g, n_window, extrapolate=True)
        tau_side += om * cg * lhs
    gv_side = gv_coefficient(0, table, g).curve_value(table) * (2 * math.pi) ** (2 * g - 2)
    return tau_side, gv_side, abs(tau_side - gv_side) / abs(gv_side)

"""Large-N sums of oscillator data: the Lambda and Upsilon limits.

Every oscillator built from an active class gamma_i and a basis vector
beta_j contributes, at leading order in hbar, the explicit arctan integral
of ``rh.psi_12_symmetrized``.  Summing over the frequency m,

    (1/hbar) sum_{m<=M} ((-1)^{mp}/m) Pi log Psi^{(m)}(t/(2 pi))
        = <beta_j, gamma_i> Omega_i (1/pi) int arctan(s/w_i) G_M(s) ds,

with w_i = 2 pi Z(gamma_i)/t and G_M(s) = sum_{m<=M} e^{-ms}.  As M -> inf
G_M -> 1/(e^s - 1) and Binet's second formula gives log Lambda(Z(gamma_i)/t).
The tau sums behave the same way with kernel s log(s^2 + w_i^2).

The default ("resummed") evaluation uses G_M in closed form inside a single
quadrature; ``method="terms"`` sums the per-m integrals explicitly.
"""

from dataclasses import dataclass
import cmath
import math

import numpy as np

from .core import is_uncoupled, pairing
from .errors import (
    BranchError,
    OutOfRangeError,
    OutOfSectorError,
    SectorError,
    StepError,
    UnsupportedStructureError,
    ValidationError,
)
from .extrapolation import loglog_slope, richardson
from .oscillator import SimpleOscillator
from .quadrature import default_rule
from .rh import psi_12_symmetrized
from .specfun import binet_term, dlog_upsilon, log_lambda, log_upsilon

__all__ = [
    "LimitReport",
    "half_plane_family",
    "geometric_weight",
    "log_partial_sum_psi",
    "partial_sum_psi",
    "log_lambda_product_target",
    "lambda_product_target",
    "tau_m",
    "log_partial_sum_tau",
    "partial_sum_tau",
    "log_upsilon_product_target",
    "tau_log_derivative",
    "upsilon_log_derivative_target",
    "tau_equation_sides",
    "tau_equation_residual",
    "limit_report",
    "binet_bridge",
    "DEFAULT_MS",
]

DEFAULT_MS = (50, 100, 200, 400)
BOUNDARY_SLACK = 1e-12


@dataclass(frozen=True)
class LimitReport:
    """Partial value at the largest truncation M and its convergence summary.

    ``fitted_order`` is p in abs_error ~ C M^-p, from a log-log fit over all
    truncations; ``extrapolated`` is the Richardson limit in 1/M.
    """

    M: int
    partial: complex
    target: complex
    abs_error: float
    fitted_order: float
    extrapolated: complex

    def as_row(self):
        return {"M": self.M, "partial": self.partial, "target": self.target,
                "abs_error": self.abs_error, "fitted_order": self.fitted_order,
                "extrapolated": self.extrapolated}


def half_plane_family(s, ray_angle):
    """Active classes with Z(gamma) strictly counterclockwise of the ray (within pi).

    Classes with Z on the boundary line are rejected.
    """
    out = []
    for c in s.active_classes():
        d = (cmath.phase(s.central_charge(c)) - ray_angle + math.pi) % (2 * math.pi) - math.pi
        if abs(d) < BOUNDARY_SLACK or abs(abs(d) - math.pi) < BOUNDARY_SLACK:
            raise SectorError(f"Z{c} lies on the boundary of the half-plane at angle {ray_angle}")
        if d > 0:
            out.append(c)
    return out


def _family(s, ray_angle, t):
    if not is_uncoupled(s):
        raise UnsupportedStructureError("large-N sums need an uncoupled structure")
    t = complex(t)
    if t == 0:
        raise ValidationError("t must be nonzero")
    fam = half_plane_family(s, ray_angle)
    for c in fam:
        if not (s.central_charge(c) / t).real > 0:
            raise OutOfSectorError(f"sector violation: Re(Z{c}/t) <= 0 at t = {t}")
    return fam


def geometric_weight(s, M):
    """sum_{m=1}^{M} e^{-ms} = (1 - e^{-Ms}) / (e^s - 1)."""
    s = np.asarray(s, dtype=float)
    return -np.expm1(-M * s) / np.expm1(s)


def _zvals(s, fam, z):
    z = s.z if z is None else tuple(z)
    return [sum(a * b for a, b in zip(c, z)) for c in fam]


def _psi_exponent(s, fam, j, t, hbar, M, rule, method, z=None):
    beta = tuple(int(k == j) for k in range(s.rank))
    zs = _zvals(s, fam, z)
    total = 0j
    for c, zc in zip(fam, zs):
        p = pairing(s.form, c, beta)
        if p == 0:
            continue
        om = s.omega_of(c)
        if method == "resummed":
            x = rule.nodes
            integral = rule.integrate(np.arctan(x * t / (2 * math.pi * zc)) * geometric_weight(x, M))
            total += -p * float(om) / math.pi * integral
        elif method == "terms":
            zb = s.z[j] if z is None else z[j]
            for m in range(1, M + 1):
                osc = SimpleOscillator.from_classes(m, p, om, zc, zb, hbar)
                sign = -1 if (m * p) % 2 else 1
                total += sign / m * psi_12_symmetrized(osc, t / (2 * math.pi), rule) / hbar
        else:
            raise ValidationError(f"unknown method {method!r}")
    return total


def log_partial_sum_psi(s, j, t, hbar, M, ray_angle, method="resummed", rule=None):
    """Exponent of the M-truncated oscillator product for basis vector j."""
    if not 0 <= j < s.rank:
        raise ValidationError(f"basis index {j} out of range")
    if int(M) != M or M < 1:
        raise ValidationError("M must be a positive integer")
    fam = _family(s, ray_angle, t)
    return _psi_exponent(s, fam, j, complex(t), hbar, int(M), rule or default_rule(), method)


def partial_sum_psi(s, j, t, hbar, M, ray_angle, method="resummed", rule=None):
    return cmath.exp(log_partial_sum_psi(s, j, t, hbar, M, ray_angle, method, rule))


def log_lambda_product_target(s, j, t, ray_angle):
    """sum_i Omega_i <beta_j, gamma_i> log Lambda(Z(gamma_i)/t)."""
    fam = _family(s, ray_angle, t)
    beta = tuple(int(k == j) for k in range(s.rank))
    total = 0j
    for c in fam:
        p = pairing(s.form, beta, c)
        if p:
            total += float(s.omega_of(c)) * p * log_lambda(s.central_charge(c) / t)
    return total


def lambda_product_target(s, j, t, ray_angle):
    return cmath.exp(log_lambda_product_target(s, j, t, ray_angle))


def _check_branch(x):
    if abs(x.real) <= 1e-12 * abs(x):
        raise BranchError(f"s^2 + (Z/t)^2 vanishes on the integration ray for Z/t = {x}")


def tau_m(omega, z, m, t, hbar, rule=None):
    """log tau^{(m)} at i t: (Omega/2 pi) hbar int s log(s^2 + (Z/t)^2) e^{-ms} ds."""
    x = complex(z) / complex(t)
    _check_branch(x)
    rule = rule or default_rule()
    s = rule.nodes
    return float(omega) / (2 * math.pi) * hbar * rule.integrate(s * np.log(s * s + x * x) * np.exp(-m * s))


def _tau_exponent(s, fam, t, hbar, M, rule, method, z=None):
    zs = _zvals(s, fam, z)
    total = 0j
    for c, zc in zip(fam, zs):
        om = s.omega_of(c)
        if method == "resummed":
            x = 2 * math.pi * zc / t
            _check_branch(x)
            nodes = rule.nodes
            integral = rule.integrate(nodes * np.log(nodes * nodes + x * x) * geometric_weight(nodes, M))
            total += float(om) / (2 * math.pi) * integral
        elif method == "terms":
            for m in range(1, M + 1):
                total += tau_m(om, zc, m, t / (2 * math.pi), hbar, rule) / hbar
        else:
            raise ValidationError(f"unknown method {method!r}")
    return total


def log_partial_sum_tau(s, t, hbar, M, ray_angle, method="resummed", rule=None):
    """(1/hbar) sum_{m<=M} sum_i log tau^{(m),i} at (2 pi)^{-1} i t."""
    fam = _family(s, ray_angle, t)
    return _tau_exponent(s, fam, complex(t), hbar, int(M), rule or default_rule(), method)


def partial_sum_tau(s, t, hbar, M, ray_angle, method="resummed", rule=None):
    return cmath.exp(log_partial_sum_tau(s, t, hbar, M, ray_angle, method, rule))


def log_upsilon_product_target(s, t, ray_angle):
    """sum_i Omega_i log Upsilon(Z(gamma_i)/t)."""
    fam = _family(s, ray_angle, t)
    return sum(float(s.omega_of(c)) * log_upsilon(s.central_charge(c) / t) for c in fam)


def _central(f, x0, h):
    return (f(x0 + h) - f(x0 - h)) / (2 * h)


def _checked_derivative(f, x0, h, scale):
    """Central difference with an (h, h/2, h/4) consistency check."""
    d = [_central(f, x0, h / 2 ** k) for k in range(3)]
    e1, e2 = abs(d[0] - d[1]), abs(d[1] - d[2])
    if e2 > 2 * e1 and e2 > 1e-10 * max(1.0, abs(d[1]), scale):
        raise StepError(f"finite-difference step {h:.3g} too small: successive differences {e1:.3g}, {e2:.3g}")
    return d[0]


def tau_log_derivative(s, k, t, hbar, M, ray_angle, h=1e-4, rule=None):
    """d/dZ(beta_k) of log partial_sum_tau by central differences (relative step h)."""
    fam = _family(s, ray_angle, t)
    rule = rule or default_rule()
    z0 = list(s.z)
    step = h * max(abs(z0[k]), 1.0)

    def f(zk):
        z = list(z0)
        z[k] = zk
        return _tau_exponent(s, fam, complex(t), hbar, int(M), rule, "resummed", z)
    return _checked_derivative(f, z0[k], step, 0.0)


def upsilon_log_derivative_target(s, k, t, ray_angle):
    """d/dZ(beta_k) of sum_i Omega_i log Upsilon(Z(gamma_i)/t)."""
    fam = _family(s, ray_angle, t)
    t = complex(t)
    return sum(float(s.omega_of(c)) * c[k] * dlog_upsilon(s.central_charge(c) / t) / t for c in fam)


def tau_equation_sides(s, t, hbar, M, ray_angle, h=1e-4, rule=None):
    """Both sides of d/dt log v^j = sum_p <beta_j, beta_p> d/dZ(beta_p) log tau.

    v^j is the M-truncated oscillator product and tau the M-truncated tau
    sum; all derivatives are central differences with relative step h.
    Returns ``(lhs, rhs)`` as arrays indexed by j.
    """
    fam = _family(s, ray_angle, t)
    rule = rule or default_rule()
    t = complex(t)
    M = int(M)
    n = s.rank
    lhs = np.zeros(n, dtype=complex)
    for j in range(n):
        def f(tt, j=j):
            return _psi_exponent(s, fam, j, tt, hbar, M, rule, "resummed")
        lhs[j] = _checked_derivative(f, t, h * abs(t), 0.0)
    dtau = np.zeros(n, dtype=complex)
    for p in range(n):
        dtau[p] = tau_log_derivative(s, p, t, hbar, M, ray_angle, h, rule)
    F = np.array(s.form.matrix, dtype=float)
    rhs = F @ dtau
    return lhs, rhs


def tau_equation_residual(s, t, hbar, M, ray_angle, h=1e-4, rule=None, jacobian=False):
    """|lhs_j - rhs_j| for each basis index j.

    With ``jacobian=True`` the right side is divided by 2 pi, the factor
    relating d/dt at t to derivatives of functions evaluated at t/(2 pi).
    """
    lhs, rhs = tau_equation_sides(s, t, hbar, M, ray_angle, h, rule)
    if jacobian:
        rhs = rhs / (2 * math.pi)
    return np.abs(lhs - rhs)


def limit_report(Ms, values, target, orders=None):
    """LimitReport for partial values at truncations Ms against a target."""
    Ms = [int(M) for M in Ms]
    if len(Ms) < 4:
        raise ValidationError("a limit report needs at least 4 truncations")
    values = np.asarray(values, dtype=complex)
    errs = np.abs(values - target)
    return LimitReport(
        M=Ms[-1],
        partial=complex(values[-1]),
        target=complex(target),
        abs_error=float(errs[-1]),
        fitted_order=-loglog_slope(Ms, errs) if np.all(errs > 0) else float("nan"),
        extrapolated=complex(richardson(Ms, values, orders)),
    )


def binet_bridge(w, Ms=DEFAULT_MS, rule=None):
    """Resummed arctan integrals against Binet's integral term at w = Z/t.

    Returns ``(extrapolated, reference, values)`` where values[k] is
    (1/pi) int arctan(s/(2 pi w)) G_M(s) ds at M = Ms[k].
    """
    rule = rule or default_rule()
    w = complex(w)
    if not w.real > 0:
        raise OutOfRangeError("Binet's formula needs Re(w) > 0")
    x = rule.nodes
    vals = [rule.integrate(np.arctan(x / (2 * math.pi * w)) * geometric_weight(x, M)) / math.pi for M in Ms]
    return complex(richardson(Ms, vals)), complex(binet_term(w)), vals

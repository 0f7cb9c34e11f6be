"""Integral equations for the oscillator RH problem and their first-order solution.

The jumps of Psi sit on the rays +-l, l = R_{>0} Z(gamma).  Parameterizing
t' = Z(gamma)/s on l and t' = -Z(gamma)/s on -l turns the exponential factors
into e^{-ms}, and the equations read (eta = (S_plus)_12 / (2 pi i))

    Psi11(t) = 1 - eta int t/(Z + ts) Psi12(-Z/s) e^{-ms} ds
    Psi12(t) =   - eta int t/(Z - ts) Psi11( Z/s) e^{-ms} ds
    Psi21(t) =   - eta int t/(Z + ts) Psi22(-Z/s) e^{-ms} ds
    Psi22(t) = 1 - eta int t/(Z - ts) Psi21( Z/s) e^{-ms} ds

with Z = Z(gamma).  Psi11, Psi21 are continuous across l and Psi12, Psi22
across -l, so the values on the rays are unambiguous.  Restricted to the
quadrature nodes the system closes on itself with kernel

    K_kj = w_j e^{-m s_j} / (s_k + s_j).
"""

import cmath
import math
import warnings

import numpy as np

from .errors import DivergenceError, OutOfSectorError, RayCollisionError, ValidationError
from .oscillator import RAY_SLACK, _wrap, stokes_analytic
from .quadrature import default_rule

__all__ = [
    "coupling",
    "kernel_matrix",
    "spectral_radius",
    "picard_solve",
    "first_order_psi",
    "psi_12_symmetrized",
    "RAY_WARNING_ANGLE",
]

RAY_WARNING_ANGLE = 1e-3
CONTRACTION_LIMIT = 0.9


def coupling(osc):
    """eta = (S_plus)_12 / (2 pi i) = sinh(pi v21) / pi."""
    return stokes_analytic(osc)[0][0, 1] / (2j * math.pi)


def _check_ray(osc, t):
    t = complex(t)
    if t == 0:
        raise ValidationError("t must be nonzero")
    d = _wrap(cmath.phase(t) - osc.theta)
    gap = min(abs(d), math.pi - abs(d))
    if gap < RAY_SLACK:
        raise RayCollisionError(f"t = {t} lies on a Stokes ray")
    if gap < RAY_WARNING_ANGLE:
        warnings.warn(f"t = {t} is within {gap:.1e} rad of a Stokes ray; quadrature accuracy degrades",
                      RuntimeWarning, stacklevel=3)
    return t


def kernel_matrix(osc, rule):
    s, w = rule.nodes, rule.weights
    return (w * np.exp(-osc.m * s))[None, :] / (s[:, None] + s[None, :])


def spectral_radius(K, iters=200, rtol=1e-10):
    """Perron root of an entrywise positive matrix by power iteration."""
    v = np.ones(K.shape[0])
    lam = 0.0
    for _ in range(iters):
        u = K @ v
        new = float(np.linalg.norm(u) / np.linalg.norm(v))
        v = u / np.linalg.norm(u)
        if abs(new - lam) <= rtol * new:
            return new
        lam = new
    return lam


def _cauchy(osc, rule, t, sign, values):
    """int t/(Z + sign*t*s) values(s) e^{-ms} ds on the rule."""
    s = rule.nodes
    Z = osc.z_gamma
    f = t / (Z + sign * t * s) * np.exp(-osc.m * s)
    return rule.integrate(f * values)


def picard_solve(osc, t, max_iter=200, tol=1e-14, rule=None):
    """Psi(t) from Picard iteration of the integral equations.

    The unknowns are the boundary values on the quadrature nodes; the
    iteration starts from Psi = I and stops once the sup-norm update is
    below ``tol``.  Raises DivergenceError when |eta| rho(K) >= 0.9 or
    when the iteration fails to settle.
    """
    t = _check_ray(osc, t)
    rule = rule or default_rule()
    eta = coupling(osc)
    if eta == 0:
        return np.eye(2, dtype=complex)
    K = kernel_matrix(osc, rule)
    rho = spectral_radius(K)
    if abs(eta) * rho >= CONTRACTION_LIMIT:
        raise DivergenceError(f"no contraction: |eta| * rho(K) = {abs(eta) * rho:.3f} >= {CONTRACTION_LIMIT}",
                              diagnostic={"eta": abs(eta), "kernel_norm": rho})
    n = len(rule)
    # x = Psi11 on l, y = Psi12 on -l, b = Psi21 on l, a = Psi22 on -l
    x, y = np.ones(n, dtype=complex), np.zeros(n, dtype=complex)
    a, b = np.ones(n, dtype=complex), np.zeros(n, dtype=complex)
    for _ in range(max_iter):
        y_new = eta * (K @ x)
        x_new = 1 - eta * (K @ y_new)
        b_new = -eta * (K @ a)
        a_new = 1 + eta * (K @ b_new)
        delta = max(np.max(np.abs(x_new - x)), np.max(np.abs(y_new - y)),
                    np.max(np.abs(a_new - a)), np.max(np.abs(b_new - b)))
        x, y, a, b = x_new, y_new, a_new, b_new
        if delta < tol:
            break
    else:
        raise DivergenceError(f"Picard iteration did not reach tol {tol} in {max_iter} steps",
                              diagnostic={"last_update": float(delta)})
    return np.array([
        [1 - eta * _cauchy(osc, rule, t, +1, y), -eta * _cauchy(osc, rule, t, -1, x)],
        [-eta * _cauchy(osc, rule, t, +1, a), 1 - eta * _cauchy(osc, rule, t, -1, b)],
    ])


def first_order_psi(osc, t, rule=None):
    """Psi(t) to first order in hbar.

    Psi12 = -v21 int t/(Z - ts) e^{-ms} ds and Psi21 = -v21 int t/(Z + ts) e^{-ms} ds
    with unit diagonal; v21 is the linear part of eta.
    """
    t = _check_ray(osc, t)
    rule = rule or default_rule()
    c = osc.v21
    one = np.ones(len(rule))
    return np.array([
        [1.0 + 0j, -c * _cauchy(osc, rule, t, -1, one)],
        [-c * _cauchy(osc, rule, t, +1, one), 1.0 + 0j],
    ])


def psi_12_symmetrized(osc, t, rule=None):
    """Explicit first-order value of the symmetrized (12) entry of log Psi.

    -(-1)^{mp} m p hbar Omega (1/pi) int arctan(s t / Z(gamma)) e^{-ms} ds,
    defined for Re(Z(gamma)/t) > 0.  It equals
    i [Psi12 + Psi21](i t) of ``first_order_psi``.
    """
    t = complex(t)
    if t == 0:
        raise ValidationError("t must be nonzero")
    Z = osc.z_gamma
    if not (Z / t).real > 0:
        raise OutOfSectorError(f"need Re(Z(gamma)/t) > 0, got Z/t = {Z / t}")
    rule = rule or default_rule()
    s = rule.nodes
    integral = rule.integrate(np.arctan(s * (t / Z)) * np.exp(-osc.m * s))
    return 2 * osc.m * osc.v21 * integral

"""The 2x2 simple-oscillator connection and its Stokes data.

Conventions
-----------
The system is dY/dt = (U/t^2 - V/t) Y with U = diag(z1, z2), z1 = m Z(gamma + beta),
z2 = m Z(beta) and real skew V, v12 = (-1)^{mp} p hbar Omega / (2 pi),
p = <gamma, beta>.  The canonical solutions are Y = Psi diag(e^{-z_j/t}) with
Psi -> I as t -> 0 inside a half-plane bounded by the Stokes rays
+-l, l = R_{>0} w, w = z1 - z2 = m Z(gamma).

Sector +1 is the half-plane counterclockwise from l (arg t in (theta, theta + pi)),
sector -1 the one clockwise from l.  Stokes factors are defined by

    S_plus  = Y_{+1}^{-1} Y_{-1}   on l      (upper triangular)
    S_minus = Y_{-1}^{-1} Y_{+1}   on -l     (lower triangular)

so that Y on the clockwise side equals Y on the counterclockwise side
times the factor.  With these choices the closed form is

    (S_plus)_12 = 2i sinh(pi v21) = 2i sinh(-(-1)^{mp} p hbar Omega / 2),
    (S_minus)_21 = -(S_plus)_12,

and the Fourier-Laplace dictionary 2 pi i v21 2F1(-a, a; 1; 1), a = i v21,
reproduces the same number.
"""

from dataclasses import dataclass
from fractions import Fraction
import cmath
import math
import warnings

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    InvalidOscillatorError,
    RayCollisionError,
    StiffnessError,
    UnsupportedRegionError,
    ValidationError,
)
from .frobenius import MeromorphicConnection
from .specfun import gamma_fn

__all__ = [
    "SimpleOscillator",
    "ConfluentParams",
    "build_connection",
    "confluent_params",
    "stokes_analytic",
    "stokes_printed_entry",
    "gauss_2f1",
    "stokes_via_hypergeometric",
    "formal_series",
    "fundamental_solution",
    "stokes_numeric",
    "confluent_residual",
    "sector_of",
]

RAY_SLACK = 1e-10


def _sign(n):
    return -1 if n % 2 else 1


@dataclass(frozen=True)
class SimpleOscillator:
    """Frequency-m oscillator block for the pair (gamma, beta)."""

    m: int
    pairing: int
    omega: Fraction
    z1: complex
    z2: complex
    hbar: float

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise InvalidOscillatorError(f"m must be a positive integer, got {self.m}")
        if int(self.pairing) != self.pairing or self.pairing == 0:
            raise InvalidOscillatorError("pairing <gamma, beta> must be a nonzero integer")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "pairing", int(self.pairing))
        om = self.omega
        object.__setattr__(self, "omega", Fraction(om) if not isinstance(om, float) else Fraction(om).limit_denominator(10**12))
        object.__setattr__(self, "z1", complex(self.z1))
        object.__setattr__(self, "z2", complex(self.z2))
        if self.z1 == self.z2:
            raise InvalidOscillatorError("z1 == z2 (Z(gamma) = 0)")
        if not float(self.hbar) > 0:
            raise ValidationError("hbar must be positive")
        object.__setattr__(self, "hbar", float(self.hbar))

    @classmethod
    def from_classes(cls, m, pairing, omega, z_gamma, z_beta, hbar):
        """Build from Z(gamma), Z(beta): z1 = m(Z(gamma) + Z(beta)), z2 = m Z(beta)."""
        return cls(m, pairing, omega, m * (complex(z_gamma) + complex(z_beta)), m * complex(z_beta), hbar)

    @property
    def w(self):
        """z1 - z2 = m Z(gamma)."""
        return self.z1 - self.z2

    @property
    def z_gamma(self):
        return self.w / self.m

    @property
    def v12(self):
        return _sign(self.m * self.pairing) * self.pairing * self.hbar * float(self.omega) / (2 * math.pi)

    @property
    def v21(self):
        return -self.v12

    @property
    def theta(self):
        """Angle of the Stokes ray l."""
        return cmath.phase(self.w)

    def with_hbar(self, hbar):
        return SimpleOscillator(self.m, self.pairing, self.omega, self.z1, self.z2, hbar)


@dataclass(frozen=True)
class ConfluentParams:
    z1: complex
    z2: complex
    mu: complex


def build_connection(osc):
    """MeromorphicConnection with u_diag = (z1, z2) and the real V."""
    v = np.array([[0.0, osc.v12], [osc.v21, 0.0]], dtype=complex)
    return MeromorphicConnection(np.array([osc.z1, osc.z2]), v, None, osc.hbar)


def confluent_params(osc):
    """(z1, z2, mu) with mu = -(-1)^{mp} p hbar Omega / (2 pi)."""
    return ConfluentParams(osc.z1, osc.z2, complex(-osc.v12))


def _unipotent(upper=0j, lower=0j):
    return np.array([[1.0, upper], [lower, 1.0]], dtype=complex)


def stokes_analytic(osc):
    """Closed-form Stokes factors (S_plus on l, S_minus on -l)."""
    e = 2j * cmath.sinh(math.pi * osc.v21)
    return _unipotent(upper=e), _unipotent(lower=-e)


def stokes_printed_entry(osc):
    """The expression 2i sinh(-(-1)^{mp} p i hbar Omega / 2).

    Kept for comparison only: for the real coupling used here it is not the
    Stokes multiplier (see ``stokes_analytic``).
    """
    x = -_sign(osc.m * osc.pairing) * osc.pairing * 1j * osc.hbar * float(osc.omega) / 2
    return 2j * cmath.sinh(x)


def _is_nonpositive_int(x):
    return x.imag == 0 and x.real <= 0 and x.real == round(x.real)


def gauss_2f1(a, b, c, z, max_terms=100000):
    """Gauss hypergeometric function.

    Power series for |z| <= 0.9 (stopping once terms fall below 1e-16 of
    the partial sum) and Gauss' formula
    Gamma(c) Gamma(c-a-b) / (Gamma(c-a) Gamma(c-b)) at z = 1, Re(c-a-b) > 0.
    """
    a, b, c, z = (complex(x) for x in (a, b, c, z))
    if _is_nonpositive_int(c):
        raise UnsupportedRegionError("c must not be a nonpositive integer")
    if z == 1:
        if (c - a - b).real <= 0:
            raise UnsupportedRegionError("Gauss' formula needs Re(c - a - b) > 0")
        if _is_nonpositive_int(c - a) or _is_nonpositive_int(c - b):
            return 0j
        return gamma_fn(c) * gamma_fn(c - a - b) / (gamma_fn(c - a) * gamma_fn(c - b))
    if abs(z) > 0.9:
        raise UnsupportedRegionError("series path requires |z| <= 0.9")
    total = 1 + 0j
    term = 1 + 0j
    small = 0
    for n in range(max_terms):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * z
        total += term
        if term == 0:
            return total
        if abs(term) <= 1e-16 * abs(total):
            small += 1
            if small >= 2:
                return total
        else:
            small = 0
    raise UnsupportedRegionError("hypergeometric series did not converge")


def stokes_via_hypergeometric(osc):
    """Stokes factors from the Fourier-Laplace / 2F1 dictionary.

    (S_plus)_12 = 2 pi i v21 2F1(-a, a; 1; 1) and
    (S_minus)_21 = 2 pi i v12 2F1(-a, a; 1; 1) with a = i v21.
    """
    a = 1j * osc.v21
    F = gauss_2f1(-a, a, 1.0, 1.0)
    return (_unipotent(upper=2j * math.pi * osc.v21 * F),
            _unipotent(lower=2j * math.pi * osc.v12 * F))


def formal_series(osc, K):
    """Coefficients Psi_0 = I, ..., Psi_K of the formal solution Psi = sum Psi_k t^k.

    They satisfy [U, Psi_{k+1}] = (k + V) Psi_k; the diagonal of Psi_{k+1}
    comes from the next order.
    """
    u = (osc.z1, osc.z2)
    V = np.array([[0.0, osc.v12], [osc.v21, 0.0]], dtype=complex)
    P = [np.eye(2, dtype=complex)]
    for k in range(K):
        R = (k * np.eye(2) + V) @ P[k]
        Q = np.zeros((2, 2), dtype=complex)
        Q[0, 1] = R[0, 1] / (u[0] - u[1])
        Q[1, 0] = R[1, 0] / (u[1] - u[0])
        Q[0, 0] = -V[0, 1] * Q[1, 0] / (k + 1)
        Q[1, 1] = -V[1, 0] * Q[0, 1] / (k + 1)
        P.append(Q)
    return P


def _series_eval(P, t):
    out = np.zeros((2, 2), dtype=complex)
    for Pk in P[::-1]:
        out = out * t + Pk
    return out


def _wrap(x):
    return (x + math.pi) % (2 * math.pi) - math.pi


def sector_of(osc, t):
    """+1 if t lies counterclockwise of l (within pi), -1 if clockwise, 0 on a ray."""
    d = _wrap(cmath.phase(t) - osc.theta)
    if abs(d) < RAY_SLACK or abs(abs(d) - math.pi) < RAY_SLACK:
        return 0
    return 1 if d > 0 else -1


def _rhs_factory(osc):
    z1, z2 = osc.z1, osc.z2
    w = z1 - z2
    a, b = osc.v12, osc.v21

    def rhs(t, dt, y):
        p11, p12, p21, p22 = y
        it = 1.0 / t
        it2 = it * it
        # [U, Psi] / t^2 - V Psi / t
        d11 = -it * (a * p21)
        d12 = w * p12 * it2 - it * (a * p22)
        d21 = -w * p21 * it2 - it * (b * p11)
        d22 = -it * (b * p12)
        return np.array([d11, d12, d21, d22]) * dt
    return rhs


def _integrate(rhs, path, dpath, s0, s1, y0, rtol, atol):
    def f(s, y):
        return rhs(path(s), dpath(s), y)
    last = None
    for attempt in range(3):
        kw = {} if attempt == 0 else {"max_step": abs(s1 - s0) / (50 * 4 ** attempt)}
        sol = solve_ivp(f, (s0, s1), y0, method="DOP853", rtol=rtol, atol=atol, **kw)
        if sol.success:
            return sol.y[:, -1]
        last = sol.message
    raise StiffnessError(f"integration failed: {last}")


def fundamental_solution(osc, t, sector_hint=None, K=6, series_tol=1e-12, rtol=1e-10, atol=1e-13):
    """Canonical fundamental solution at t.

    The asymptotic series (depth K) is evaluated at the point t0 on the
    bisector of the requested sector, |t0| chosen so the first omitted term
    is below ``series_tol``.  From there the Psi-equation is integrated
    radially to |t| and along the circle |t| = const to arg t.

    Returns ``(Y, Psi)`` with Y = Psi diag(e^{-z_j/t}).  ``sector_hint`` is
    +1 or -1; without it t must lie strictly inside a sector.
    """
    t = complex(t)
    if t == 0:
        raise ValidationError("t must be nonzero")
    sec = sector_of(osc, t)
    if sector_hint is None:
        if sec == 0:
            raise RayCollisionError(f"t = {t} lies on a Stokes ray; pass sector_hint or perturb t")
        sector = sec
    else:
        if sector_hint not in (1, -1):
            raise ValidationError("sector_hint must be +1 or -1")
        sector = sector_hint
    theta = osc.theta
    phi_b = theta + sector * math.pi / 2
    a_t = phi_b + _wrap(cmath.phase(t) - phi_b)
    R = abs(t)
    P = formal_series(osc, K + 1)
    nxt = np.max(np.abs(P[K + 1]))
    if nxt == 0:
        psi = np.eye(2, dtype=complex)
    else:
        r0 = min((series_tol / nxt) ** (1.0 / (K + 1)), 0.25 * abs(osc.w), R)
        y = _series_eval(P[:K + 1], r0 * cmath.exp(1j * phi_b)).ravel()
        rhs = _rhs_factory(osc)
        e_b = cmath.exp(1j * phi_b)
        if R > r0:
            y = _integrate(rhs, lambda r: r * e_b, lambda r: e_b, r0, R, y, rtol, atol)
        if a_t != phi_b:
            y = _integrate(rhs, lambda a: R * cmath.exp(1j * a), lambda a: 1j * R * cmath.exp(1j * a),
                           phi_b, a_t, y, rtol, atol)
        psi = y.reshape(2, 2)
    det = psi[0, 0] * psi[1, 1] - psi[0, 1] * psi[1, 0]
    if abs(det - 1) > 1e-9:
        warnings.warn(f"det Psi deviates from 1 by {abs(det - 1):.2e} at t = {t}", RuntimeWarning, stacklevel=2)
    Y = psi * np.exp(-np.array([osc.z1, osc.z2]) / t)[None, :]
    return Y, psi


def _conj(S_psi, osc, t):
    # e^{Z/t} M e^{-Z/t}
    e = np.exp(np.array([osc.z1, osc.z2]) / t)
    return (e[:, None] * S_psi) / e[None, :]


def stokes_numeric(osc, radius=None, **kw):
    """Stokes factors from canonical solutions on both sides of +-l.

    Evaluates at |t| = ``radius`` (default |w|).  Returns
    ``(S_plus, S_minus, info)`` where ``info`` records det deviations.
    """
    R = abs(osc.w) if radius is None else float(radius)
    th = osc.theta
    t_plus = R * cmath.exp(1j * th)
    t_minus = -t_plus
    _, ccw = fundamental_solution(osc, t_plus, +1, **kw)
    _, cw = fundamental_solution(osc, t_plus, -1, **kw)
    S_plus = _conj(np.linalg.solve(ccw, cw), osc, t_plus)
    _, ccw_m = fundamental_solution(osc, t_minus, -1, **kw)
    _, cw_m = fundamental_solution(osc, t_minus, +1, **kw)
    S_minus = _conj(np.linalg.solve(ccw_m, cw_m), osc, t_minus)
    dets = [abs(np.linalg.det(M) - 1) for M in (ccw, cw, ccw_m, cw_m)]
    return S_plus, S_minus, {"radius": R, "max_det_deviation": max(dets)}


def confluent_residual(osc, z, h=None, **kw):
    """Residual of the confluent equation for u(z) = Y_11(-1/z).

    u'' + (1/z - z1 - z2) u' + (mu^2/z^2 - z1/z + z1 z2) u = 0.
    Derivatives by 5-point central differences of numerically computed u.
    Returns ``(residual, scale)`` with scale = max |term|.
    """
    z = complex(z)
    h = 1e-2 * abs(z) if h is None else h

    def u(zz):
        Y, _ = fundamental_solution(osc, -1.0 / zz, **kw)
        return Y[0, 0]
    f = [u(z + k * h) for k in (-2, -1, 0, 1, 2)]
    d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
    d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
    cp = confluent_params(osc)
    z1, z2, mu = cp.z1, cp.z2, cp.mu
    terms = [d2, (1 / z - z1 - z2) * d1, (mu * mu / z ** 2 - z1 / z + z1 * z2) * f[2]]
    return abs(sum(terms)), max(abs(x) for x in terms)

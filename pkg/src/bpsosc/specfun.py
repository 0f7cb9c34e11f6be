"""Special functions on the right half-plane.

log-gamma and digamma use a Stirling series after shifting the argument to
Re(z) >= 8.  Binet's integral gives an independent quadrature route to
log-gamma.  log G(w + 1) is obtained by integrating its logarithmic
derivative from w = 1.  The normalized functions

    Lambda(w)  = e^w Gamma(w) / (sqrt(2 pi) w^(w - 1/2))
    Upsilon(w) = -zeta'(-1) e^(3 w^2 / 4) G(w + 1) / ((2 pi)^(w/2) w^(w^2 / 2))

are evaluated in log space on the principal sheet.
"""

from fractions import Fraction
from functools import lru_cache
from math import comb
import cmath
import math

import numpy as np

from .errors import OutOfRangeError, PoleError, SingularArgumentError, UnsupportedRegionError, ValidationError
from .quadrature import uniform_panels, _legendre

__all__ = [
    "ZETA_PRIME_MINUS_ONE",
    "HALF_LOG_2PI",
    "bernoulli",
    "log_gamma",
    "gamma_fn",
    "digamma",
    "binet_integral",
    "binet_term",
    "log_barnes_g",
    "log_lambda",
    "lambda_fn",
    "dlog_lambda",
    "log_upsilon",
    "upsilon_fn",
    "dlog_upsilon",
    "upsilon_remainder",
    "UPSILON_ASYMPTOTIC_CONSTANT",
    "upsilon_asymptotic_fit",
    "polylog_neg",
    "polylog_neg_numerator",
]

ZETA_PRIME_MINUS_ONE = -0.16542114370045092921
HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
STIRLING_TERMS = 10
SHIFT_TARGET = 8.0

# log Upsilon(w) = C - log(w)/12 + O(w^-2) with C = log(-zeta'(-1)) + zeta'(-1)
UPSILON_ASYMPTOTIC_CONSTANT = math.log(-ZETA_PRIME_MINUS_ONE) + ZETA_PRIME_MINUS_ONE


@lru_cache(maxsize=None)
def _bernoulli_table():
    B = [Fraction(1)]
    for n in range(1, 65):
        s = sum(comb(n + 1, k) * B[k] for k in range(n))
        B.append(-s / (n + 1))
    return tuple(B)


def bernoulli(n):
    """Exact Bernoulli number B_n (B_1 = -1/2), 0 <= n <= 64."""
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise ValidationError(f"n must be a nonnegative integer, got {n!r}")
    if n > 64:
        raise OutOfRangeError(f"bernoulli supports n <= 64, got {n}")
    return _bernoulli_table()[int(n)]


def _stirling_coeffs():
    return np.array([float(bernoulli(2 * k)) / (2 * k * (2 * k - 1)) for k in range(1, STIRLING_TERMS + 1)])


def _digamma_coeffs():
    return np.array([float(bernoulli(2 * k)) / (2 * k) for k in range(1, STIRLING_TERMS + 1)])


_LG = _stirling_coeffs()
_DG = _digamma_coeffs()


def _checked(z):
    arr = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise ValidationError("argument must be finite")
    re = arr.real
    pole = (arr.imag == 0) & (re <= 0) & (re == np.round(re))
    if np.any(pole):
        raise PoleError(f"pole of the gamma function at {arr[pole].ravel()[0]}")
    if np.any(re <= 0):
        raise UnsupportedRegionError("only Re(z) > 0 is supported")
    return arr


def _shift(arr):
    n = np.maximum(0, np.ceil(SHIFT_TARGET - arr.real)).astype(int)
    return n, arr + n


def _poly_inv(w, coeffs):
    """sum_k coeffs[k] * w^(-2k), Horner in 1/w^2."""
    inv2 = 1.0 / (w * w)
    acc = np.zeros_like(w)
    for c in coeffs[::-1]:
        acc = acc * inv2 + c
    return acc


def _log_gamma(arr):
    n, w = _shift(arr)
    acc = np.zeros_like(arr)
    for k in range(int(n.max(initial=0))):
        mask = k < n
        acc = acc + np.where(mask, np.log(np.where(mask, arr + k, 1.0)), 0.0)
    series = _poly_inv(w, _LG) / w
    return (w - 0.5) * np.log(w) - w + HALF_LOG_2PI + series - acc


def _digamma(arr):
    n, w = _shift(arr)
    acc = np.zeros_like(arr)
    for k in range(int(n.max(initial=0))):
        mask = k < n
        acc = acc + np.where(mask, 1.0 / np.where(mask, arr + k, 1.0), 0.0)
    inv2 = 1.0 / (w * w)
    series = _poly_inv(w, _DG) * inv2
    return np.log(w) - 0.5 / w - series - acc


def _out(arr):
    return complex(arr) if arr.ndim == 0 else arr


def log_gamma(z):
    """Principal branch of log Gamma(z) for Re(z) > 0 (scalar or array)."""
    return _out(_log_gamma(_checked(z)))


def digamma(z):
    """psi(z) = Gamma'(z)/Gamma(z) for Re(z) > 0 (scalar or array)."""
    return _out(_digamma(_checked(z)))


def gamma_fn(z):
    """Gamma(z) on the whole plane minus the poles (reflection for Re(z) <= 0)."""
    z = complex(z)
    if not cmath.isfinite(z):
        raise ValidationError("argument must be finite")
    if z.real > 0:
        return cmath.exp(log_gamma(z))
    if z.imag == 0 and z.real == round(z.real):
        raise PoleError(f"pole of the gamma function at {z}")
    return math.pi / (cmath.sin(math.pi * z) * cmath.exp(log_gamma(1 - z)))


@lru_cache(maxsize=None)
def _binet_rule():
    return uniform_panels(cutoff=40.0, width=2.0, nodes=64)


def binet_term(z):
    """(1/pi) int_0^inf arctan(s/(2 pi z)) / (e^s - 1) ds for Re(z) > 0."""
    z = complex(_checked(z))
    rule = _binet_rule()
    s = rule.nodes
    f = np.arctan(s / (2 * math.pi * z)) / np.expm1(s)
    return complex(rule.integrate(f)) / math.pi


def binet_integral(z):
    """log Gamma(z) through Binet's second formula, by quadrature."""
    z = complex(_checked(z))
    return (z - 0.5) * cmath.log(z) - z + HALF_LOG_2PI + binet_term(z)


def _dlog_g(u):
    # d/du log G(u + 1)
    return HALF_LOG_2PI + 0.5 - u + u * _digamma(u)


def log_barnes_g(w, nodes=24, panel_length=0.5):
    """log G(w + 1) for Re(w) > 0.

    Integrates d/du log G(u + 1) = log(2 pi)/2 + 1/2 - u + u psi(u) along the
    segment from u = 1 (where log G(2) = 0) to u = w.  The segment stays in
    Re(u) > 0, so it never meets a pole of psi.
    """
    arr = np.asarray(w, dtype=complex)
    if arr.ndim:
        return np.array([log_barnes_g(x, nodes, panel_length) for x in arr.ravel()]).reshape(arr.shape)
    w = complex(_checked(w))
    d = w - 1.0
    if d == 0:
        return 0j
    npan = max(1, int(math.ceil(abs(d) / panel_length)))
    x, wt = _legendre(nodes)
    edges = np.linspace(0.0, 1.0, npan + 1)
    tau = np.concatenate([0.5 * (b - a) * x + 0.5 * (a + b) for a, b in zip(edges[:-1], edges[1:])])
    wts = np.concatenate([0.5 * (b - a) * wt for a, b in zip(edges[:-1], edges[1:])])
    u = 1.0 + tau * d
    return complex(d * np.sum(wts * _dlog_g(u)))


def _check_nonzero(w):
    w = complex(w)
    if w == 0:
        raise SingularArgumentError("w = 0 is a singular argument")
    return w


def log_lambda(w):
    """log Lambda(w) = w + log Gamma(w) - log(2 pi)/2 - (w - 1/2) Log w."""
    w = _check_nonzero(w)
    return w + log_gamma(w) - HALF_LOG_2PI - (w - 0.5) * cmath.log(w)


def lambda_fn(w):
    """Lambda(w) = e^w Gamma(w) / (sqrt(2 pi) w^(w - 1/2)), principal branch."""
    return cmath.exp(log_lambda(w))


def dlog_lambda(w):
    """d/dw log Lambda(w) = psi(w) - Log w + 1/(2w)."""
    w = _check_nonzero(w)
    return digamma(w) - cmath.log(w) + 0.5 / w


def log_upsilon(w):
    """log Upsilon(w) on the principal sheet, Re(w) > 0."""
    w = _check_nonzero(w)
    return (math.log(-ZETA_PRIME_MINUS_ONE) + 0.75 * w * w + log_barnes_g(w)
            - w * HALF_LOG_2PI - 0.5 * w * w * cmath.log(w))


def upsilon_fn(w):
    """Upsilon(w) = -zeta'(-1) e^(3w^2/4) G(w+1) / ((2 pi)^(w/2) w^(w^2/2))."""
    return cmath.exp(log_upsilon(w))


def dlog_upsilon(w):
    """d/dw log Upsilon(w) = 1/2 + w psi(w) - w Log w  (= w d/dw log Lambda)."""
    w = _check_nonzero(w)
    return 0.5 + w * digamma(w) - w * cmath.log(w)


def _log1p_small(x):
    """log(1 + x) for complex arrays, accurate for small |x|."""
    x = np.asarray(x, dtype=complex)
    out = np.log(1.0 + x)
    small = np.abs(x) < 0.05
    if np.any(small):
        xs = x[small]
        acc = np.zeros_like(xs)
        for k in range(18, 0, -1):
            acc = xs * ((-1) ** (k + 1) / k + acc)
        out[small] = acc
    return out


@lru_cache(maxsize=None)
def _remainder_rule():
    return uniform_panels(cutoff=60.0, width=2.0, nodes=48)


def upsilon_remainder(w):
    """log Upsilon(w) - C + Log(w)/12 through a cancellation-free integral.

    Uses

        -(1/(4 pi^2)) int_0^inf s log(1 + (s/(2 pi w))^2) / (e^s - 1) ds,

    which is a second evaluation route for log Upsilon, independent of the
    Barnes G integration, and keeps full relative precision for large |w|
    where the remainder is tiny.
    """
    w = complex(_checked(w))
    rule = _remainder_rule()
    s = rule.nodes
    x = (s / (2 * math.pi * w)) ** 2
    f = s * _log1p_small(x) / np.expm1(s)
    return -complex(rule.integrate(f)) / (4 * math.pi ** 2)


def upsilon_asymptotic_fit(g_max=5, ws=(20.0, 40.0, 80.0), terms=8):
    """Fitted coefficients of w^(2-2g), g = 2..g_max, in log Upsilon(w).

    The remainder r(w) = log Upsilon(w) - C + Log(w)/12 is sampled at the
    real points ``ws``.  With three points in geometric progression the
    coefficients are peeled off one at a time: for each g the sequence
    w^(2g-2) (r(w) - known lower terms) is Richardson-extrapolated in w^-2.
    Three samples cannot separate more than three unknown coefficients, so
    this only resolves g = 2, 3 reliably.  With more points a scaled
    least-squares fit in u = w^-2 with ``terms`` unknowns is used instead.
    Returns a dict g -> float.
    """
    ws = np.asarray(ws, dtype=float)
    r = np.array([upsilon_remainder(w).real for w in ws])
    if len(ws) > 3:
        u = ws ** -2.0
        A = np.stack([u ** (k + 1) for k in range(max(terms, g_max - 1))], axis=1)
        sc = np.abs(A).max(axis=0)
        c, *_ = np.linalg.lstsq(A / sc, r, rcond=None)
        c = c / sc
        return {g: float(c[g - 2]) for g in range(2, g_max + 1)}
    coeffs = {}
    ratio = (ws[1] / ws[0]) ** 2
    for g in range(2, g_max + 1):
        known = sum(c * ws ** (2 - 2 * h) for h, c in coeffs.items())
        seq = list((r - known) * ws ** (2 * g - 2))
        for j in range(1, len(seq)):
            f = ratio ** j
            seq = [(f * seq[k + 1] - seq[k]) / (f - 1.0) for k in range(len(seq) - 1)]
        coeffs[g] = float(seq[0])
    return coeffs


@lru_cache(maxsize=None)
def polylog_neg_numerator(n):
    """Integer coefficients (ascending) of P_n with Li_{-n}(x) = P_n(x)/(1-x)^(n+1).

    P_0 = x and P_{n+1} = x((1 - x) P_n' + (n + 1) P_n).
    """
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise ValidationError(f"n must be a nonnegative integer, got {n!r}")
    if n > 30:
        raise OutOfRangeError(f"polylog_neg supports n <= 30, got {n}")
    if n == 0:
        return (0, 1)
    p = list(polylog_neg_numerator(n - 1))
    dp = [k * p[k] for k in range(1, len(p))] + [0]
    # (1 - x) P' + n P
    q = [0] * (len(p) + 1)
    for k, c in enumerate(dp):
        q[k] += c
        q[k + 1] -= c
    for k, c in enumerate(p):
        q[k] += n * c
    out = [0] + q
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return tuple(out)


def polylog_neg(n, x):
    """Li_{-n}(x) as an exact-coefficient rational function of x (x != 1)."""
    coeffs = polylog_neg_numerator(n)
    if isinstance(x, Fraction) or isinstance(x, int):
        xv = Fraction(x)
        if xv == 1:
            raise PoleError("Li_{-n} has a pole at x = 1")
        num = sum(c * xv ** k for k, c in enumerate(coeffs))
        return num / (1 - xv) ** (n + 1)
    xv = complex(x)
    if xv == 1:
        raise PoleError("Li_{-n} has a pole at x = 1")
    num = 0j
    for c in coeffs[::-1]:
        num = num * xv + c
    return num / (1 - xv) ** (n + 1)

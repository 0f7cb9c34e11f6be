"""BPS structures: charge lattice, central charge, spectrum and the twisted algebra.

Charges are plain tuples of ints in a fixed basis.  Spectrum values and
algebra coefficients are kept exact (``fractions.Fraction``); complex
floating point only enters through the central charge.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
import cmath
import math

from .errors import (
    BranchRequiredError,
    DegenerateCentralChargeError,
    DimensionError,
    DomainError,
    SupportPropertyError,
    ValidationError,
)

__all__ = [
    "SkewForm",
    "BpsStructure",
    "AlgebraElement",
    "as_charge",
    "add",
    "neg",
    "scale",
    "primitive",
    "divisibility",
    "pairing",
    "dt_spectrum",
    "is_uncoupled",
    "active_rays",
    "twisted_product",
    "poisson_bracket",
    "q_bracket_deviation",
    "Q_MINUS_EXP_MINUS",
    "Q_MINUS_EXP_PLUS",
]


def as_charge(coords):
    """Coerce to a tuple of Python ints."""
    out = []
    for c in coords:
        if isinstance(c, bool) or int(c) != c:
            raise ValidationError(f"charge coordinates must be integers, got {coords!r}")
        out.append(int(c))
    return tuple(out)


def add(a, b):
    if len(a) != len(b):
        raise DimensionError(f"charge lengths differ: {len(a)} vs {len(b)}")
    return tuple(x + y for x, y in zip(a, b))


def neg(a):
    return tuple(-x for x in a)


def scale(k, a):
    return tuple(k * x for x in a)


def divisibility(a):
    """gcd of the coordinates (0 for the zero charge)."""
    g = 0
    for x in a:
        g = gcd(g, x)
    return g


def primitive(a):
    """Primitive direction of a nonzero charge, first nonzero coordinate positive."""
    g = divisibility(a)
    if g == 0:
        raise DomainError("zero charge has no direction")
    p = tuple(x // g for x in a)
    for x in p:
        if x != 0:
            return p if x > 0 else neg(p)
    return p


@dataclass(frozen=True)
class SkewForm:
    """Integral antisymmetric matrix M with <a, b> = a^T M b."""

    matrix: tuple

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in row) for row in self.matrix)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise DimensionError("skew form must be a nonempty square matrix")
        for i in range(n):
            for j in range(n):
                if rows[i][j] != -rows[j][i]:
                    raise ValidationError(f"skew form is not antisymmetric at ({i}, {j})")
        object.__setattr__(self, "matrix", rows)

    @property
    def rank(self):
        return len(self.matrix)

    def __call__(self, a, b):
        return pairing(self, a, b)


def pairing(f, a, b):
    """The skew pairing a^T M b."""
    n = f.rank
    if len(a) != n or len(b) != n:
        raise DimensionError(f"expected charges of length {n}, got {len(a)} and {len(b)}")
    M = f.matrix
    return sum(a[i] * M[i][j] * b[j] for i in range(n) for j in range(n) if M[i][j])


def _as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**12)
    return Fraction(x)


@dataclass(frozen=True)
class BpsStructure:
    """A finite BPS structure (Gamma, Z, Omega).

    Parameters
    ----------
    form : SkewForm
        The skew pairing on the lattice.
    z : sequence of complex
        Central charge values Z(beta_j) on the basis.
    omega : mapping charge -> rational
        Nonzero spectrum values.  The map must be symmetric under negation.
    support_constant : float
        C in |Z(gamma)| > C ||gamma||_max; 0 disables the check.
    """

    form: SkewForm
    z: tuple
    omega: dict = field(default_factory=dict)
    support_constant: float = 0.0

    def __post_init__(self):
        n = self.form.rank
        z = tuple(complex(v) for v in self.z)
        if len(z) != n:
            raise DimensionError(f"central charge needs {n} values, got {len(z)}", "z")
        if not all(cmath.isfinite(v) for v in z):
            raise ValidationError("central charge values must be finite", "z")
        table = {}
        for key, val in dict(self.omega).items():
            c = as_charge(key)
            if len(c) != n:
                raise DimensionError(f"charge {c} has wrong length", "omega")
            if not any(c):
                raise DomainError("the zero class cannot carry a BPS invariant", "omega")
            v = _as_fraction(val)
            if v != 0:
                table[c] = v
        for c, v in table.items():
            if table.get(neg(c)) != v:
                raise ValidationError(f"spectrum not symmetric: Omega{c} != Omega{neg(c)}", "omega")
        table = dict(sorted(table.items()))
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "omega", table)
        C = float(self.support_constant)
        if C < 0:
            raise ValidationError("support constant must be nonnegative", "support_constant")
        for c in table:
            zc = self.central_charge(c)
            if zc == 0:
                raise DegenerateCentralChargeError(f"Z{c} = 0 for an active class", "z")
            if C > 0 and not abs(zc) > C * max(abs(x) for x in c):
                raise SupportPropertyError(
                    f"support property fails for {c}: |Z| = {abs(zc):.6g} <= {C} * {max(abs(x) for x in c)}",
                    "support_constant")

    @property
    def rank(self):
        return self.form.rank

    def central_charge(self, a):
        if len(a) != self.rank:
            raise DimensionError(f"charge {a} has wrong length")
        return sum(x * zj for x, zj in zip(a, self.z))

    def omega_of(self, a):
        return self.omega.get(tuple(a), Fraction(0))

    def active_classes(self):
        return list(self.omega)

    def pairing(self, a, b):
        return pairing(self.form, a, b)


def dt_spectrum(s, alpha):
    """Multicover transform dt(alpha) = sum_{k | alpha} Omega(alpha/k)/k^2."""
    alpha = as_charge(alpha)
    g = divisibility(alpha)
    if g == 0:
        raise DomainError("dt is undefined at the zero class")
    total = Fraction(0)
    for k in range(1, g + 1):
        if g % k == 0:
            total += s.omega_of(tuple(x // k for x in alpha)) / (k * k)
    return total


def is_uncoupled(s):
    act = s.active_classes()
    return all(s.pairing(a, b) == 0 for i, a in enumerate(act) for b in act[i + 1:])


def active_rays(s, tol=1e-12):
    """Group active classes by the ray R_{>0} Z(gamma).

    Returns a list of ``(direction, classes)`` sorted by the angle of the
    direction in [0, 2 pi).  Two classes share a ray when their central
    charges have relative cross product at most ``tol`` and positive dot
    product.
    """
    items = []
    for c in s.active_classes():
        zc = s.central_charge(c)
        if zc == 0:
            raise DegenerateCentralChargeError(f"Z{c} = 0 for an active class")
        items.append((c, zc))
    rays = []
    for c, zc in items:
        for ray in rays:
            zr = ray[0]
            cross = (zr.conjugate() * zc).imag
            dot = (zr.conjugate() * zc).real
            if abs(cross) <= tol * abs(zr) * abs(zc) and dot > 0:
                ray[1].append(c)
                break
        else:
            rays.append((zc, [c]))
    out = []
    for zr, classes in rays:
        angle = math.atan2(zr.imag, zr.real) % (2 * math.pi)
        out.append((angle, cmath.exp(1j * angle), sorted(classes)))
    out.sort(key=lambda r: r[0])
    return [(d, cl) for _, d, cl in out]


class AlgebraElement:
    """Finite linear combination of generators x_alpha.

    Coefficients are stored exactly when given as ints or Fractions; zero
    coefficients are dropped.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms=None):
        clean = {}
        for k, v in dict(terms or {}).items():
            if isinstance(v, int):
                v = Fraction(v)
            if v != 0:
                clean[as_charge(k)] = v
        self._terms = dict(sorted(clean.items()))

    @classmethod
    def generator(cls, alpha, coeff=1):
        return cls({tuple(alpha): coeff})

    @property
    def terms(self):
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def __eq__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(tuple(self._terms.items()))

    def __add__(self, other):
        out = dict(self._terms)
        for k, v in other.items():
            out[k] = out.get(k, 0) + v
        return AlgebraElement(out)

    def __neg__(self):
        return AlgebraElement({k: -v for k, v in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, c):
        return AlgebraElement({k: c * v for k, v in self._terms.items()})

    def __repr__(self):
        body = " + ".join(f"({v})x{k}" for k, v in self._terms.items()) or "0"
        return f"AlgebraElement({body})"


def _sign(n):
    return -1 if n % 2 else 1


def twisted_product(a, b, f):
    """x_alpha x_beta = (-1)^<alpha,beta> x_{alpha+beta}, extended bilinearly."""
    out = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            k = add(ka, kb)
            out[k] = out.get(k, 0) + _sign(pairing(f, ka, kb)) * va * vb
    return AlgebraElement(out)


def poisson_bracket(a, b, f):
    """[x_alpha, x_beta] = (-1)^<alpha,beta> <alpha,beta> x_{alpha+beta}."""
    out = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            p = pairing(f, ka, kb)
            if p == 0:
                continue
            k = add(ka, kb)
            out[k] = out.get(k, 0) + _sign(p) * p * va * vb
    return AlgebraElement(out)


Q_MINUS_EXP_MINUS = "q=-exp(-i*hbar)"
Q_MINUS_EXP_PLUS = "q=-exp(+i*hbar)"


def q_bracket_deviation(alpha, beta, f, hbar, branch=Q_MINUS_EXP_MINUS, sqrt_branch=None):
    """Distance between the q-commutator coefficient and its first-order value.

    Computes |q^{n/2} - q^{-n/2} - i hbar (-1)^n n| with n = <alpha, beta>.
    ``branch`` selects q = -exp(-i hbar) (default) or q = -exp(+i hbar).
    For odd n a square root of q must be chosen: ``sqrt_branch`` is
    "principal" or "negative" (minus the principal root).
    """
    hbar = float(hbar)
    if not 0 < hbar <= 1:
        raise DomainError(f"hbar must lie in (0, 1], got {hbar}")
    if branch == Q_MINUS_EXP_MINUS:
        q = -cmath.exp(-1j * hbar)
    elif branch == Q_MINUS_EXP_PLUS:
        q = -cmath.exp(1j * hbar)
    else:
        raise ValidationError(f"unknown branch convention {branch!r}")
    n = pairing(f, alpha, beta)
    if n == 0:
        return 0.0
    if n % 2 == 0:
        coeff = q ** (n // 2) - q ** (-(n // 2))
    else:
        if sqrt_branch not in ("principal", "negative"):
            raise BranchRequiredError("odd pairing needs an explicit square-root branch of q")
        r = cmath.sqrt(q)
        if sqrt_branch == "negative":
            r = -r
        coeff = r ** n - r ** (-n)
    return abs(coeff - 1j * hbar * _sign(n) * n)

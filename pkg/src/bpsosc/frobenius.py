"""Finite-rank connections projected from an uncoupled BPS structure.

The Joyce coefficients of an uncoupled structure are rational multiples of
1/(2 pi i).  Inside this module that factor is carried as a unit: a
coefficient ``c`` of a 1-form means c / (2 pi i), a coefficient of a 2-form
means c / (2 pi i)^2.  This keeps flatness and commutator checks exact.
Symbols dlog Z(alpha) are keyed by the primitive direction of alpha.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
import math

import numpy as np

from .core import add, dt_spectrum, is_uncoupled, neg, pairing, primitive, scale
from .errors import InvalidOscillatorError, InvalidSubsetError, UnsupportedStructureError, ValidationError

__all__ = [
    "TWO_PI_I",
    "SymbolicOneForm",
    "SymbolicTwoForm",
    "MeromorphicConnection",
    "FrobeniusReport",
    "joyce_uncoupled",
    "joyce_uncoupled_exact",
    "projected_connection",
    "curvature",
    "commutator",
    "check_frobenius_axioms",
    "oscillator_subset",
    "rescale_hbar",
    "find_coupled_witness",
]

TWO_PI_I = 2j * math.pi


def _sign(n):
    return -1 if n % 2 else 1


class SymbolicOneForm:
    """sum_p c_p dlog Z(p), coefficients in units of (2 pi i)^-unit."""

    __slots__ = ("terms", "unit")

    def __init__(self, terms=None, unit=1):
        clean = {}
        for k, v in (terms or {}).items():
            if v != 0:
                clean[primitive(k)] = clean.get(primitive(k), 0) + v
        self.terms = {k: v for k, v in sorted(clean.items()) if v != 0}
        self.unit = unit

    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.unit != other.unit:
            raise ValidationError("cannot add forms with different units")
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return SymbolicOneForm(out, self.unit)

    def __neg__(self):
        return SymbolicOneForm({k: -v for k, v in self.terms.items()}, self.unit)

    def __sub__(self, other):
        return self + (-other)

    def scaled(self, c, unit_shift=0):
        return SymbolicOneForm({k: c * v for k, v in self.terms.items()}, self.unit + unit_shift)

    def wedge(self, other):
        out = {}
        for p, a in self.terms.items():
            for q, b in other.terms.items():
                if p == q:
                    continue
                key, sgn = ((p, q), 1) if p < q else ((q, p), -1)
                out[key] = out.get(key, 0) + sgn * a * b
        return SymbolicTwoForm(out, self.unit + other.unit)

    def __eq__(self, other):
        return isinstance(other, SymbolicOneForm) and self.terms == other.terms and (
            self.is_zero() or self.unit == other.unit)

    def __repr__(self):
        return f"SymbolicOneForm({self.terms}, unit={self.unit})"


class SymbolicTwoForm:
    """sum_{p<q} c_pq dlog Z(p) ^ dlog Z(q), coefficients in units of (2 pi i)^-unit."""

    __slots__ = ("terms", "unit")

    def __init__(self, terms=None, unit=2):
        self.terms = {k: v for k, v in sorted((terms or {}).items()) if v != 0}
        for p, q in self.terms:
            if p == q:
                raise ValidationError("wedge of a direction with itself must be absent")
        self.unit = unit

    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return SymbolicTwoForm(out, self.unit)

    def evaluate(self, z_values):
        """Coefficients on dZ_k ^ dZ_l (k < l) at a point of the base.

        ``z_values`` are the coordinates Z(beta_j); exact when they are
        Fractions.  The (2 pi i)^-unit factor is not applied.
        """
        n = len(z_values)
        out = {}
        for (p, q), c in self.terms.items():
            zp = sum(a * z for a, z in zip(p, z_values))
            zq = sum(a * z for a, z in zip(q, z_values))
            for k in range(n):
                for l in range(k + 1, n):
                    det = p[k] * q[l] - p[l] * q[k]
                    if det:
                        out[(k, l)] = out.get((k, l), 0) + c * det / (zp * zq)
        return {k: v for k, v in out.items() if v != 0}

    def __eq__(self, other):
        return isinstance(other, SymbolicTwoForm) and self.terms == other.terms and (
            self.is_zero() or self.unit == other.unit)

    def __repr__(self):
        return f"SymbolicTwoForm({self.terms}, unit={self.unit})"


@dataclass(frozen=True)
class MeromorphicConnection:
    """d + (U/t^2 - V/t) dt with U = diag(u_diag) and skew V.

    ``v_exact`` holds the exact entries of V in units of (2 pi i)^-1 when the
    connection comes straight from a BPS structure; it is dropped after an
    hbar rescaling.
    """

    u_diag: np.ndarray
    v: np.ndarray
    v_exact: tuple = None
    hbar: float = None

    def __post_init__(self):
        u = np.array(self.u_diag, dtype=complex)
        v = np.array(self.v, dtype=complex)
        n = len(u)
        if v.shape != (n, n):
            raise ValidationError(f"v must be {n}x{n}")
        if np.any(np.diag(v) != 0):
            raise ValidationError("v must have zero diagonal")
        if np.max(np.abs(v + v.T), initial=0.0) > 1e-14 * max(1.0, np.max(np.abs(v), initial=0.0)):
            raise ValidationError("v must be skew-symmetric")
        u.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "u_diag", u)
        object.__setattr__(self, "v", v)

    @property
    def size(self):
        return len(self.u_diag)

    @property
    def U(self):
        return np.diag(self.u_diag)


@dataclass
class FrobeniusReport:
    flat: bool
    av_commute: bool
    v_skew: bool
    u_linear: bool
    witness: tuple = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.flat and self.av_commute and self.v_skew and self.u_linear

    def as_dict(self):
        w = None
        if self.witness is not None:
            j, i, form = self.witness
            w = {"entry": [j, i], "terms": {f"{p}^{q}": str(c) for (p, q), c in form.terms.items()}}
        return {"flat": self.flat, "av_commute": self.av_commute, "v_skew": self.v_skew,
                "u_linear": self.u_linear, "passed": self.passed, "witness": w}


def joyce_uncoupled_exact(s, alpha):
    """f^alpha in units of 1/(2 pi i).

    For an uncoupled structure this is Omega(gamma)/k^2 summed over the ways
    of writing alpha = k gamma with gamma active, i.e. dt(alpha).
    """
    if not is_uncoupled(s):
        raise UnsupportedStructureError("Joyce coefficients are only available for uncoupled structures")
    if not any(alpha):
        return Fraction(0)
    return dt_spectrum(s, alpha)


def joyce_uncoupled(s, alpha):
    """f^alpha = Omega(gamma)/(2 pi i k^2) as a complex number."""
    return complex(joyce_uncoupled_exact(s, alpha)) / TWO_PI_I


def _f_lookup(s, f):
    if f is None:
        if not is_uncoupled(s):
            raise UnsupportedStructureError("coupled structure: supply a synthetic f explicitly")
        cache = {}

        def lookup(a):
            if a not in cache:
                cache[a] = joyce_uncoupled_exact(s, a)
            return cache[a]
        return lookup
    table = {tuple(k): v for k, v in f.items() if v != 0}
    for k, v in table.items():
        if table.get(neg(k)) != v:
            raise ValidationError(f"synthetic f must satisfy f(a) = f(-a); fails at {k}")
    return lambda a: table.get(a, 0)


def projected_connection(s, delta, f=None):
    """Connection data on the span of x_alpha, alpha in delta.

    Returns ``(A, conn)`` where A[j][i] is the SymbolicOneForm
    (-1)^<a_j,a_i> <a_j,a_i> f^{a_j - a_i} dlog Z(a_j - a_i) and ``conn``
    carries u_diag = Z(a_i) and the matching V (complex, with exact copy).
    ``f`` optionally replaces the uncoupled Joyce coefficients by a
    synthetic symmetric map (values in units of 1/(2 pi i)).
    """
    delta = [tuple(a) for a in delta]
    if len(set(delta)) != len(delta):
        raise InvalidSubsetError("delta contains a repeated charge")
    zs = [s.central_charge(a) for a in delta]
    for i in range(len(zs)):
        for j in range(i + 1, len(zs)):
            if zs[i] == zs[j]:
                raise InvalidSubsetError(f"Z values of {delta[i]} and {delta[j]} coincide")
    fl = _f_lookup(s, f)
    n = len(delta)
    A = [[SymbolicOneForm() for _ in range(n)] for _ in range(n)]
    vex = [[Fraction(0)] * n for _ in range(n)]
    for j in range(n):
        for i in range(n):
            if i == j:
                continue
            p = pairing(s.form, delta[j], delta[i])
            if p == 0:
                continue
            d = tuple(a - b for a, b in zip(delta[j], delta[i]))
            c = _sign(p) * p * fl(d)
            if c != 0:
                vex[j][i] = c
                A[j][i] = SymbolicOneForm({d: c}, 1)
    v = np.array([[complex(x) / TWO_PI_I for x in row] for row in vex], dtype=complex).reshape(n, n)
    conn = MeromorphicConnection(np.array(zs, dtype=complex), v, tuple(tuple(r) for r in vex))
    return A, conn


def curvature(A):
    """F(A) = A ^ A (the coefficients are constant, so dA = 0)."""
    n = len(A)
    F = [[SymbolicTwoForm() for _ in range(n)] for _ in range(n)]
    for j in range(n):
        for i in range(n):
            acc = SymbolicTwoForm()
            for k in range(n):
                if A[j][k].is_zero() or A[k][i].is_zero():
                    continue
                acc = acc + A[j][k].wedge(A[k][i])
            F[j][i] = acc
    return F


def commutator(A, v_exact):
    """[A, V] as a matrix of 1-forms (units (2 pi i)^-2), exact."""
    n = len(A)
    out = [[SymbolicOneForm() for _ in range(n)] for _ in range(n)]
    for k in range(n):
        for l in range(n):
            acc = SymbolicOneForm()
            for p in range(n):
                if v_exact[p][l] != 0 and not A[k][p].is_zero():
                    acc = acc + A[k][p].scaled(v_exact[p][l], 1)
                if v_exact[k][p] != 0 and not A[p][l].is_zero():
                    acc = acc - A[p][l].scaled(v_exact[k][p], 1)
            out[k][l] = acc
    return out


def check_frobenius_axioms(s, delta, f=None, probe=None):
    """Check the Z-independent Frobenius conditions on the projected bundle.

    Returns a FrobeniusReport with flatness F(A) = 0, [A, V] = 0, skewness of
    V and linearity of u_diag in Z.  Failures are reported, not raised.
    """
    A, conn = projected_connection(s, delta, f)
    n = len(A)
    F = curvature(A)
    witness = None
    for j in range(n):
        for i in range(n):
            if not F[j][i].is_zero():
                witness = (j, i, F[j][i])
                break
        if witness:
            break
    flat = witness is None
    av = commutator(A, conn.v_exact)
    av_ok = all(av[k][l].is_zero() for k in range(n) for l in range(n))
    vex = conn.v_exact
    skew = all(vex[a][b] == -vex[b][a] for a in range(n) for b in range(n))
    # u(Z) = (Z(alpha_i)) must be additive and homogeneous in Z
    r = s.rank
    probe = probe or ([Fraction(k + 2, 3) for k in range(r)], [Fraction(1 - k, 5) for k in range(r)])
    z1, z2 = probe
    lam = Fraction(7, 4)

    def u_of(z):
        return [sum(a * x for a, x in zip(alpha, z)) for alpha in delta]
    lin = all(a + b == c for a, b, c in zip(u_of(z1), u_of(z2), u_of([x + y for x, y in zip(z1, z2)])))
    lin = lin and all(lam * a == b for a, b in zip(u_of(z1), u_of([lam * x for x in z1])))
    return FrobeniusReport(flat, av_ok, skew, lin, witness, {"size": n})


def oscillator_subset(gamma, beta, N, form):
    """[g+b, b, 2(g+b), 2b, ..., (N/2)(g+b), (N/2)b] for even N and <g, b> != 0."""
    if N <= 0 or N % 2:
        raise InvalidOscillatorError(f"N must be a positive even integer, got {N}")
    if pairing(form, gamma, beta) == 0:
        raise InvalidOscillatorError("<gamma, beta> must be nonzero")
    gb = add(gamma, beta)
    out = []
    for m in range(1, N // 2 + 1):
        out.append(scale(m, gb))
        out.append(scale(m, beta))
    return out


def rescale_hbar(conn, hbar):
    """Replace V by i hbar V (u_diag unchanged)."""
    hbar = float(hbar)
    if hbar < 0:
        raise ValidationError("hbar must be nonnegative")
    return MeromorphicConnection(conn.u_diag, 1j * hbar * conn.v, None, hbar)


def find_coupled_witness(s, f=None, radius=2):
    """Search a triple (a_i, a_j, a_k) exhibiting non-flatness.

    ``f`` is a synthetic symmetric coefficient map (units of 1/(2 pi i));
    it defaults to the spectrum values themselves.  The search requires
    a = a_j - a_k and b = a_k - a_i in the support of f with <a, b> != 0,
    the inequality <a_j, a_i><a, b> != <a_j, a_k><a_k, a_i>, and a nonzero
    curvature entry F_ji.  Returns ``(delta, (j, i), F_ji)`` or None.
    """
    if f is None:
        f = dict(s.omega)
    support = [tuple(k) for k, v in f.items() if v != 0]
    r = s.rank
    for a in support:
        for b in support:
            if pairing(s.form, a, b) == 0:
                continue
            for ak in product(range(-radius, radius + 1), repeat=r):
                aj = add(ak, a)
                ai = add(ak, neg(b))
                if len({ai, aj, ak}) < 3:
                    continue
                lhs = pairing(s.form, aj, ai) * pairing(s.form, a, b)
                rhs = pairing(s.form, aj, ak) * pairing(s.form, ak, ai)
                if lhs == rhs:
                    continue
                delta = [ai, aj, ak]
                try:
                    A, _ = projected_connection(s, delta, f)
                except InvalidSubsetError:
                    continue
                F = curvature(A)
                if not F[1][0].is_zero():
                    return delta, (1, 0), F[1][0]
    return None

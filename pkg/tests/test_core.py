from fractions import Fraction
import cmath
import math

import pytest
from hypothesis import given, strategies as st

from bpsosc.core import (
    Q_MINUS_EXP_MINUS,
    Q_MINUS_EXP_PLUS,
    AlgebraElement,
    BpsStructure,
    SkewForm,
    active_rays,
    dt_spectrum,
    is_uncoupled,
    pairing,
    poisson_bracket,
    primitive,
    q_bracket_deviation,
    twisted_product,
)
from bpsosc.errors import (
    BranchRequiredError,
    DegenerateCentralChargeError,
    DimensionError,
    DomainError,
    SupportPropertyError,
    ValidationError,
)

F2 = SkewForm([[0, -1], [1, 0]])


def test_pairing_examples():
    assert pairing(F2, (1, 0), (0, 1)) == -1
    assert pairing(F2, (2, 1), (1, 1)) == 1 * 1 * 1 + 2 * (-1) * 1
    assert pairing(F2, (3, -2), (3, -2)) == 0


def test_pairing_dimension_error():
    with pytest.raises(DimensionError):
        pairing(F2, (1, 0, 0), (0, 1))


def test_skew_form_rejects_symmetric():
    with pytest.raises(ValidationError):
        SkewForm([[0, 1], [1, 0]])


def test_dt_examples():
    s = BpsStructure(F2, (1, 1j), {(1, 0): 1, (-1, 0): 1})
    assert dt_spectrum(s, (2, 0)) == Fraction(1, 4)
    assert dt_spectrum(s, (1, 0)) == 1
    s2 = BpsStructure(F2, (1, 1j), {(1, 0): 1, (-1, 0): 1, (2, 0): 1, (-2, 0): 1})
    assert dt_spectrum(s2, (2, 0)) == Fraction(5, 4)
    with pytest.raises(DomainError):
        dt_spectrum(s, (0, 0))


def test_uncoupled_examples():
    assert is_uncoupled(BpsStructure(F2, (1, 1j), {(1, 0): 1, (-1, 0): 1, (2, 0): "1/3", (-2, 0): "1/3"}))
    assert is_uncoupled(BpsStructure(F2, (1, 1j), {}))
    coupled = {(1, 0): 1, (-1, 0): 1, (0, 1): 1, (0, -1): 1}
    assert not is_uncoupled(BpsStructure(F2, (1, 1j), coupled))


def test_spectrum_must_be_symmetric():
    with pytest.raises(ValidationError):
        BpsStructure(F2, (1, 1j), {(1, 0): 1})


def test_zero_central_charge_rejected():
    with pytest.raises(DegenerateCentralChargeError):
        BpsStructure(F2, (0, 1j), {(1, 0): 1, (-1, 0): 1})


def test_support_property():
    BpsStructure(F2, (1, 1j), {(1, 0): 1, (-1, 0): 1}, support_constant=0.5)
    with pytest.raises(SupportPropertyError):
        BpsStructure(F2, (1, 1j), {(1, 0): 1, (-1, 0): 1}, support_constant=2.0)


def test_active_rays_examples():
    s = BpsStructure(F2, (1j, 1), {(1, 0): 1, (-1, 0): 1, (2, 0): 1, (-2, 0): 1})
    rays = active_rays(s)
    assert [round(cmath.phase(d) % (2 * math.pi), 12) for d, _ in rays] == [round(math.pi / 2, 12), round(3 * math.pi / 2, 12)]
    assert rays[0][1] == [(1, 0), (2, 0)]
    assert rays[1][1] == [(-2, 0), (-1, 0)]
    F3 = SkewForm([[0, 0], [0, 0]])
    s2 = BpsStructure(F3, (1 + 1j, 2 + 2j), {(1, 0): 1, (-1, 0): 1, (0, 1): 1, (0, -1): 1})
    rays = active_rays(s2)
    pos = [cl for d, cl in rays if abs(cmath.phase(d) - math.pi / 4) < 1e-12]
    assert pos == [[(0, 1), (1, 0)]]
    assert active_rays(BpsStructure(F2, (1, 1j), {})) == []


def test_algebra_examples():
    x = AlgebraElement.generator
    a, b = (1, 0), (0, 1)
    assert twisted_product(x(a), x((0, 0)), F2) == x(a)
    assert twisted_product(x(a), x(b), F2) == AlgebraElement({(1, 1): -1})
    F = SkewForm([[0, 1], [-1, 0]])
    lhs = twisted_product(x(a) + 2 * x(b), x(b), F)
    assert lhs == AlgebraElement({(1, 1): -1, (0, 2): 2})
    assert poisson_bracket(x(a), x(a), F2) == AlgebraElement()
    assert poisson_bracket(x(a), x(b), F2) == x((1, 1))
    F4 = SkewForm([[0, 2], [-2, 0]])
    assert poisson_bracket(x(a), x(b), F4) == 2 * x((1, 1))


def test_q_bracket_examples():
    F4 = SkewForm([[0, 2], [-2, 0]])
    for h in (0.1, 0.5, 1.0):
        d = q_bracket_deviation((1, 0), (0, 1), F4, h)
        assert d == pytest.approx(2 * (h - math.sin(h)), rel=1e-10, abs=1e-15)
        dp = q_bracket_deviation((1, 0), (0, 1), F4, h, branch=Q_MINUS_EXP_PLUS)
        assert dp == pytest.approx(2 * (h + math.sin(h)), rel=1e-12)
    assert q_bracket_deviation((1, 0), (2, 0), F2, 0.3) == 0.0
    with pytest.raises(BranchRequiredError):
        q_bracket_deviation((1, 0), (0, 1), F2, 0.3)
    q_bracket_deviation((1, 0), (0, 1), F2, 0.3, sqrt_branch="principal")
    with pytest.raises(DomainError):
        q_bracket_deviation((1, 0), (0, 1), F4, 1.5)


def test_q_bracket_even_pairing_is_cubic():
    F4 = SkewForm([[0, 2], [-2, 0]])
    hs = [0.2, 0.1, 0.05, 0.025]
    ds = [q_bracket_deviation((1, 0), (0, 1), F4, h, branch=Q_MINUS_EXP_MINUS) for h in hs]
    slopes = [math.log(ds[k] / ds[k + 1]) / math.log(2) for k in range(3)]
    assert min(slopes) > 2.9


def test_primitive():
    assert primitive((-4, 6)) == (2, -3)
    assert primitive((0, -3)) == (0, 1)


# property tests

small = st.integers(-3, 3)


@st.composite
def skew_forms(draw, n=None):
    n = n or draw(st.integers(1, 4))
    M = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            v = draw(small)
            M[i][j], M[j][i] = v, -v
    return SkewForm(M)


@st.composite
def elements(draw, n):
    k = draw(st.integers(0, 5))
    terms = {}
    for _ in range(k):
        c = tuple(draw(small) for _ in range(n))
        terms[c] = Fraction(draw(st.integers(-5, 5)), draw(st.integers(1, 4)))
    return AlgebraElement(terms)


@st.composite
def algebra_setup(draw):
    f = draw(skew_forms())
    n = f.rank
    return f, draw(elements(n)), draw(elements(n)), draw(elements(n))


@given(algebra_setup())
def test_product_commutative_associative(data):
    f, a, b, c = data
    assert twisted_product(a, b, f) == twisted_product(b, a, f)
    assert twisted_product(twisted_product(a, b, f), c, f) == twisted_product(a, twisted_product(b, c, f), f)


@given(algebra_setup())
def test_bracket_antisymmetry_jacobi_leibniz(data):
    f, a, b, c = data
    br = lambda x, y: poisson_bracket(x, y, f)
    mul = lambda x, y: twisted_product(x, y, f)
    assert br(a, b) == -br(b, a)
    assert br(a, br(b, c)) + br(b, br(c, a)) + br(c, br(a, b)) == AlgebraElement()
    assert br(a, mul(b, c)) == mul(br(a, b), c) + mul(b, br(a, c))


@st.composite
def spectra(draw):
    f = draw(skew_forms())
    n = f.rank
    z = [complex(draw(st.floats(-3, 3)), draw(st.floats(-3, 3))) for _ in range(n)]
    omega = {}
    for _ in range(draw(st.integers(0, 5))):
        c = tuple(draw(small) for _ in range(n))
        if any(c) and abs(sum(a * b for a, b in zip(c, z))) > 1e-6:
            v = Fraction(draw(st.integers(1, 5)), draw(st.integers(1, 3)))
            omega[c] = v
            omega[tuple(-x for x in c)] = v
    return BpsStructure(f, z, omega)


@given(spectra())
def test_spectrum_invariants(s):
    for c, v in s.omega.items():
        assert s.omega_of(tuple(-x for x in c)) == v
        if primitive(c) == c or primitive(c) == tuple(-x for x in c):
            assert dt_spectrum(s, c) == v
    seen = [c for _, cl in active_rays(s) for c in cl]
    assert sorted(seen) == sorted(s.active_classes())

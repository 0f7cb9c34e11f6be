from fractions import Fraction
from math import factorial
import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bpsosc.errors import OutOfRangeError, OutOfSectorError, PoleError, ValidationError
from bpsosc.extrapolation import loglog_slope
from bpsosc.gv import (
    CurveClassTable,
    FormalSeries,
    cy_bps_structure,
    gv_coefficient,
    gv_series,
    gv_tau_comparison,
    oscillator_tau_sum_cy,
    resum_check,
)
from bpsosc.specfun import polylog_neg

V = 0.3 + 0.4j


def table(**kw):
    return CurveClassTable({k: v for k, v in kw.items()})


def _bernoulli_at(n):
    # Akiyama-Tanigawa; agrees with the B_1 = -1/2 convention on even n
    a = [Fraction(0)] * (n + 1)
    for m in range(n + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
    return a[0]


def _second_implementation(g):
    b2g, b2g2 = _bernoulli_at(2 * g), _bernoulli_at(2 * g - 2)
    sign = Fraction((-1) ** (g - 1))
    const = sign * b2g * b2g2 / (4 * g * (2 * g - 2) * factorial(2 * g - 2))
    curve = sign * b2g / (2 * g * factorial(2 * g - 2))
    return const, curve


def test_g2_coefficients():
    t = table(C=("3", V))
    c = gv_coefficient(7, t, 2)
    assert c.constant == Fraction(7, 5760)
    assert c.curve_prefactors == {"C": Fraction(3, 240)}
    assert c.polylog_order == -1
    assert c.value(t) == pytest.approx(7 / 5760 + 3 * polylog_neg(1, cmath.exp(2j * math.pi * V)) / 240, rel=1e-15)


def test_prefactors_match_second_implementation():
    t = table(C=("1", V))
    for g in range(2, 9):
        c = gv_coefficient(1, t, g)
        const, curve = _second_implementation(g)
        assert c.constant == const
        assert c.curve_prefactors["C"] == curve
        assert c.polylog_order == 3 - 2 * g


def test_zero_series():
    assert gv_series(0, CurveClassTable(), 6).is_zero()


def test_series_has_only_even_powers():
    s = gv_series(2, table(C=("1", V)), 5)
    assert sorted(s.coefficients) == [2, 4, 6, 8]
    assert s.truncation == 8


def test_series_errors():
    with pytest.raises(OutOfRangeError):
        gv_series(1, CurveClassTable(), 17)
    with pytest.raises(OutOfRangeError):
        gv_coefficient(1, CurveClassTable(), 1)
    with pytest.raises(PoleError):
        table(C=("1", 0.3))


def test_change_of_variables():
    s = gv_series(2, table(C=("1", V)), 4)
    y = s.substitute(2 * math.pi, "t")
    for k, c in s.coefficients.items():
        assert y[k] == c * (2 * math.pi) ** k


@given(st.dictionaries(st.integers(0, 8), st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)),
       st.dictionaries(st.integers(0, 8), st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)),
       st.integers(0, 8), st.integers(0, 8))
def test_series_arithmetic_respects_truncation(a, b, ta, tb):
    A, B = FormalSeries("x", a, ta), FormalSeries("x", b, tb)
    for S in (A + B, A * B):
        assert S.truncation == min(ta, tb)
        assert all(k <= S.truncation for k in S.coefficients)
    prod = A * B
    for k in range(prod.truncation + 1):
        expected = sum(A[i] * B[k - i] for i in range(k + 1))
        assert prod[k] == pytest.approx(expected, abs=1e-9)


def test_series_variable_mismatch():
    with pytest.raises(ValidationError):
        FormalSeries("x", {}, 2) + FormalSeries("y", {}, 2)


def test_series_json():
    s = FormalSeries("lambda", {2: 1 + 2j}, 4)
    assert s.to_json() == {"variable": "lambda", "truncation": 4, "coefficients": {"2": [1.0, 2.0]}}


def test_cy_structure_examples():
    t = table(C=("1", 0.2 + 0.5j))
    ctx = cy_bps_structure(t, 0)
    assert ctx.classes == ((0, "C", Fraction(1), 0.2 + 0.5j),)
    ctx = cy_bps_structure(t, 3, omega_beta={"C": "2"})
    z = {n: zz for n, _, _, zz in ctx.classes}
    assert z[3] == pytest.approx(-2.8 + 0.5j)
    assert {om for _, _, om, _ in ctx.classes} == {Fraction(2)}
    with pytest.raises(OutOfSectorError):
        cy_bps_structure(table(C=("1", 0.2 - 0.5j)), 3)
    with pytest.raises(OutOfSectorError):
        cy_bps_structure(t, 3, t=1.0)


def test_tau_sum_empty_and_additive():
    assert oscillator_tau_sum_cy(cy_bps_structure(CurveClassTable(), 10), 1j, 0.05, 50)["value"] == 0
    a, b = table(A=("1", V)), table(B=("2", 0.1 + 0.7j))
    ab = table(A=("1", V), B=("2", 0.1 + 0.7j))
    va = oscillator_tau_sum_cy(cy_bps_structure(a, 10), 1j, 0.05, 50)["value"]
    vb = oscillator_tau_sum_cy(cy_bps_structure(b, 10), 1j, 0.05, 50)["value"]
    vab = oscillator_tau_sum_cy(cy_bps_structure(ab, 10), 1j, 0.05, 50)["value"]
    assert vab == pytest.approx(va + vb, rel=1e-14)


def test_tau_sum_terms_match_resummed():
    ctx = cy_bps_structure(table(A=("1", V)), 3)
    a = oscillator_tau_sum_cy(ctx, 1j, 0.05, 30)["value"]
    b = oscillator_tau_sum_cy(ctx, 1j, 0.05, 30, method="terms")["value"]
    assert abs(a - b) < 1e-10 * abs(a)


def test_resum_examples():
    lhs, rhs, err = resum_check(V, 2, 2000, extrapolate=True)
    assert abs(rhs - math.pi ** 2 / cmath.sin(math.pi * V) ** 2) < 1e-10
    assert err <= 1e-8
    _, _, err3 = resum_check(V, 3, 100)
    assert err3 <= 1.0 * 100 ** -3
    r1 = resum_check(V, 3, 100)[1]
    r2 = resum_check(V + 1, 3, 100)[1]
    assert abs(r1 - r2) < 1e-12 * abs(r1)


@pytest.mark.parametrize("g,Ns", [(2, [100, 200, 400, 800]), (3, [25, 50, 100, 200]), (4, [10, 20, 40, 80])])
def test_resum_decay_rates(g, Ns):
    errs = [resum_check(V, g, N)[2] for N in Ns]
    predicted = 3 - 2 * g
    assert abs(loglog_slope(Ns, errs) / predicted - 1) <= 0.1


def test_resum_errors():
    with pytest.raises(OutOfSectorError):
        resum_check(0.3 - 0.4j, 2, 10)
    with pytest.raises(OutOfRangeError):
        resum_check(V, 1, 10)


@pytest.mark.parametrize("g", [2, 3])
def test_gv_tau_comparison(g):
    tau_side, gv_side, rel = gv_tau_comparison(table(C=("1", V)), g, 400)
    assert rel <= 1e-3

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bpsosc.core import BpsStructure, SkewForm
from bpsosc.errors import BranchError, OutOfSectorError, SectorError, StepError, UnsupportedStructureError
from bpsosc.extrapolation import loglog_slope, richardson
from bpsosc.largen import (
    DEFAULT_MS,
    binet_bridge,
    half_plane_family,
    limit_report,
    log_lambda_product_target,
    log_partial_sum_psi,
    log_partial_sum_tau,
    partial_sum_psi,
    partial_sum_tau,
    lambda_product_target,
    tau_equation_residual,
    tau_equation_sides,
    tau_log_derivative,
    tau_m,
    upsilon_log_derivative_target,
    _checked_derivative,
)
from bpsosc.specfun import dlog_upsilon, lambda_fn, log_lambda, log_upsilon

RAY = -math.pi / 2


def test_half_plane_family(double_a1):
    assert half_plane_family(double_a1, RAY) == [(1, 0)]
    assert half_plane_family(double_a1, math.pi / 2) == [(-1, 0)]
    with pytest.raises(SectorError):
        half_plane_family(double_a1, 0.0)


def test_empty_sum_is_one(double_a1):
    assert partial_sum_psi(double_a1, 0, 1.0, 0.05, 100, RAY) == 1
    assert lambda_product_target(double_a1, 0, 1.0, RAY) == 1
    empty = BpsStructure(SkewForm([[0, -1], [1, 0]]), (1, 1j), {})
    assert partial_sum_tau(empty, 1.0, 0.05, 100, RAY) == 1
    assert lambda_product_target(empty, 1, 1.0, RAY) == 1


def test_lambda_target_example(double_a1):
    assert lambda_product_target(double_a1, 1, 1.0, RAY) == pytest.approx(1.0844375514, rel=1e-10)


def test_target_doubles_with_omega():
    F = SkewForm([[0, -1], [1, 0]])
    a = BpsStructure(F, (1, 1j), {(1, 0): 1, (-1, 0): 1})
    b = BpsStructure(F, (1, 1j), {(1, 0): 2, (-1, 0): 2})
    t = 0.7 + 0.2j
    assert log_lambda_product_target(b, 1, t, RAY) == 2 * log_lambda_product_target(a, 1, t, RAY)


def test_psi_limit_and_order(double_a1):
    vals = [log_partial_sum_psi(double_a1, 1, 1.0, 0.05, M, RAY) for M in DEFAULT_MS]
    target = log_lambda_product_target(double_a1, 1, 1.0, RAY)
    rep = limit_report(DEFAULT_MS, vals, target, orders=(1, 2, 3))
    assert abs(rep.fitted_order - 1) <= 0.1
    assert abs(rep.extrapolated - target) <= 1e-6
    # two-point extrapolation with orders 1 and 2 from the last three truncations
    assert abs(richardson(DEFAULT_MS[1:], vals[1:], orders=(1, 2)) - target) <= 1e-6


def test_resummed_matches_term_by_term(double_a1):
    # brute-force oracle: per-m oscillator integrals summed explicitly
    for t in (1.0, 0.8 + 0.3j):
        a = log_partial_sum_psi(double_a1, 1, t, 0.05, 60, RAY, method="terms")
        b = log_partial_sum_psi(double_a1, 1, t, 0.05, 60, RAY)
        assert abs(a - b) < 1e-12
        a = log_partial_sum_tau(double_a1, t, 0.05, 60, RAY, method="terms")
        b = log_partial_sum_tau(double_a1, t, 0.05, 60, RAY)
        assert abs(a - b) < 1e-11


def test_sector_and_coupling_errors(double_a1):
    with pytest.raises(OutOfSectorError):
        log_partial_sum_psi(double_a1, 1, -1.0, 0.05, 50, RAY)
    F = SkewForm([[0, -1], [1, 0]])
    coupled = BpsStructure(F, (1, 1j), {(1, 0): 1, (-1, 0): 1, (0, 1): 1, (0, -1): 1})
    with pytest.raises(UnsupportedStructureError):
        log_partial_sum_psi(coupled, 1, 1.0, 0.05, 50, RAY)


def test_tau_m_examples():
    assert tau_m(0, 1.0, 1, 1.0, 1.0) == 0
    s = np.linspace(0.0, 40.0, 1_000_001)
    f = s * np.log1p(s * s) * np.exp(-s)
    trap = float(np.sum(f[1:] + f[:-1]) * (s[1] - s[0]) / 2) / (2 * math.pi)
    assert tau_m(1, 1.0, 1, 1.0, 1.0) == pytest.approx(trap, rel=1e-9)
    with pytest.raises(BranchError):
        tau_m(1, 1j, 1, 1.0, 1.0)


@given(st.floats(0.2, 5), st.floats(-1, 1), st.floats(0.1, 10), st.integers(1, 5))
def test_tau_m_scale_invariance(zr, zi, lam, m):
    z, t = complex(zr, zi), 0.9 + 0.1j
    assert tau_m(1, lam * z, m, lam * t, 0.1) == pytest.approx(tau_m(1, z, m, t, 0.1), rel=1e-13, abs=1e-15)


def test_first_order_tau_property(double_a1):
    # d/dt of the psi exponent against <gamma_vee, gamma> d/dZ(gamma) log tau at the same point
    M, t, h = 400, 1.0, 1e-4
    lhs, rhs = tau_equation_sides(double_a1, t, 0.05, M, RAY, h)
    assert abs(lhs[1] - rhs[1] / (2 * math.pi)) <= 1e-4 * abs(lhs[1])


def test_tau_derivative_limit(double_a1):
    vals = [tau_log_derivative(double_a1, 0, 1.0, 0.05, M, RAY) for M in DEFAULT_MS]
    ext = richardson(DEFAULT_MS, vals, orders=(1, 2, 3))
    target = upsilon_log_derivative_target(double_a1, 0, 1.0, RAY)
    assert target == pytest.approx(dlog_upsilon(1.0), rel=1e-14)
    # the sums are evaluated at t/(2 pi), whose Z-derivative picks up the factor -2 pi
    assert abs(ext - (-2 * math.pi) * target) <= 1e-5


def test_tau_equation_trivial_structure():
    F = SkewForm([[0, 0], [0, 0]])
    s = BpsStructure(F, (1, 1j), {(1, 0): 1, (-1, 0): 1})
    lhs, rhs = tau_equation_sides(s, 1.0, 0.05, 100, RAY)
    assert np.all(lhs == 0) and np.all(rhs == 0)


def test_chain_rule_plumbing():
    F = SkewForm([[0, -1], [1, 0]])
    s = BpsStructure(F, (0.4, 0.3 + 0.2j), {(2, 1): 1, (-2, -1): 1})
    d0 = tau_log_derivative(s, 0, 1.0, 0.05, 100, RAY)
    d1 = tau_log_derivative(s, 1, 1.0, 0.05, 100, RAY)
    assert d0 == pytest.approx(2 * d1, rel=1e-7)
    u0 = upsilon_log_derivative_target(s, 0, 1.0, RAY)
    u1 = upsilon_log_derivative_target(s, 1, 1.0, RAY)
    assert u0 == 2 * u1


def test_multi_class_additivity():
    F = SkewForm([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 2], [0, 0, -2, 0]])
    z = (1.0, 1j, 0.5 + 0.5j, -1j)
    om1 = {(1, 0, 0, 0): 1, (-1, 0, 0, 0): 1}
    om2 = {(0, 0, 1, 0): 2, (0, 0, -1, 0): 2}
    both = BpsStructure(F, z, {**om1, **om2})
    s1, s2 = BpsStructure(F, z, om1), BpsStructure(F, z, om2)
    t = 0.9 + 0.2j
    for j in range(4):
        a = log_partial_sum_psi(both, j, t, 0.05, 100, RAY)
        b = log_partial_sum_psi(s1, j, t, 0.05, 100, RAY) + log_partial_sum_psi(s2, j, t, 0.05, 100, RAY)
        assert a == b
    a = log_partial_sum_tau(both, t, 0.05, 100, RAY)
    b = log_partial_sum_tau(s1, t, 0.05, 100, RAY) + log_partial_sum_tau(s2, t, 0.05, 100, RAY)
    assert a == pytest.approx(b, rel=1e-15)


def test_checked_derivative_detects_bad_step():
    # a perturbation only the h/4 stencil sees, as roundoff would at too small a step
    h = 1e-4
    noisy = lambda x: math.sin(x) + (1e-6 if 0 < x - 1.0 < 0.3 * h else 0.0)
    with pytest.raises(StepError):
        _checked_derivative(noisy, 1.0, h, 1.0)
    assert _checked_derivative(math.sin, 1.0, 1e-4, 1.0) == pytest.approx(math.cos(1.0), rel=1e-8)


@pytest.mark.parametrize("w", [1.0, 2.0, 1 + 0.5j])
def test_binet_bridge(w):
    ext, ref, vals = binet_bridge(w)
    assert abs(ext - ref) <= 1e-6
    assert loglog_slope(DEFAULT_MS, [abs(v - ref) for v in vals]) == pytest.approx(-1, abs=0.1)


def test_limit_report_empty_errors():
    rep = limit_report(DEFAULT_MS, [0, 0, 0, 0], 0)
    assert math.isnan(rep.fitted_order)

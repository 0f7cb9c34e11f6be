import cmath
import math
import warnings

import numpy as np
import pytest
from scipy.linalg import logm

from bpsosc.errors import DivergenceError, OutOfSectorError, RayCollisionError
from bpsosc.extrapolation import loglog_slope
from bpsosc.oscillator import SimpleOscillator, fundamental_solution, stokes_analytic
from bpsosc.quadrature import default_rule
from bpsosc.rh import first_order_psi, picard_solve, psi_12_symmetrized

T0 = 0.3 * cmath.exp(1j * math.pi / 4)
HBARS = [0.2, 0.1, 0.05, 0.025]


def osc(m=1, p=-1, omega=1, hbar=0.05, zg=1.0, zb=1j):
    return SimpleOscillator.from_classes(m, p, omega, zg, zb, hbar)


def test_decoupled_is_identity():
    assert np.array_equal(picard_solve(osc(omega=0), T0), np.eye(2))
    assert np.array_equal(first_order_psi(osc(omega=0), T0), np.eye(2))


def test_picard_matches_ode():
    o = osc(hbar=0.05)
    _, psi = fundamental_solution(o, T0)
    assert np.max(np.abs(picard_solve(o, T0) - psi)) < 1e-6


@pytest.mark.parametrize("t", [0.5 - 0.4j, -0.7 + 0.2j, 1.3 * cmath.exp(-2.6j)])
def test_picard_matches_ode_other_points(t):
    o = osc(hbar=0.7, zg=1 + 0.5j)
    _, psi = fundamental_solution(o, t)
    assert np.max(np.abs(picard_solve(o, t) - psi)) < 1e-6


def test_diagonal_is_second_order():
    errs = [abs(picard_solve(osc(hbar=h), T0)[0, 0] - 1) for h in (0.2, 0.1, 0.05)]
    assert loglog_slope([0.2, 0.1, 0.05], errs) >= 1.9


def test_order_in_hbar():
    d1, d2, diag = [], [], []
    for h in HBARS:
        o = osc(hbar=h)
        P = picard_solve(o, T0)
        d1.append(np.max(np.abs(P - np.eye(2))))
        d2.append(np.max(np.abs(P - first_order_psi(o, T0))))
        diag.append(np.max(np.abs(np.diag(logm(P)))))
    assert loglog_slope(HBARS, d1) >= 0.95
    assert loglog_slope(HBARS, d2) >= 1.9
    assert loglog_slope(HBARS, diag) >= 1.9


def test_first_order_antisymmetry():
    o = osc(hbar=0.1)
    for t in (T0, 0.4 - 0.9j):
        a = first_order_psi(o, t)
        b = first_order_psi(o, -t)
        assert abs(a[0, 1] + b[1, 0]) < 1e-14


def test_jump_relation_from_integral_equations():
    # Picard solutions on either side of l, glued by the conjugated Stokes factor
    o = osc(hbar=0.3)
    S_plus, _ = stokes_analytic(o)
    t_up, t_down = 0.6 * cmath.exp(0.3j), 0.6 * cmath.exp(-0.3j)
    up = picard_solve(o, t_up)
    down = picard_solve(o, t_down)
    _, ccw_up = fundamental_solution(o, t_up, +1)
    _, ccw_down = fundamental_solution(o, t_down, +1)  # continuation across l
    assert np.max(np.abs(up - ccw_up)) < 1e-6
    e = np.exp(np.array([o.z1, o.z2]) / t_down)
    conj = (S_plus / e[:, None]) * e[None, :]
    assert np.max(np.abs(down - ccw_down @ conj)) < 1e-6


def test_ray_errors():
    o = osc()
    with pytest.raises(RayCollisionError):
        picard_solve(o, 0.4)
    with pytest.raises(RayCollisionError):
        first_order_psi(o, -0.4)
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        picard_solve(o, 0.4 * cmath.exp(5e-4j))
    assert any("Stokes ray" in str(x.message) for x in w)


def test_no_contraction_raises():
    with pytest.raises(DivergenceError) as err:
        picard_solve(osc(hbar=200.0, m=1), T0)
    assert "kernel_norm" in err.value.diagnostic


def test_quadrature_refinement_stable():
    o = osc(hbar=0.2)
    a = picard_solve(o, T0, rule=default_rule("accurate"))
    b = picard_solve(o, T0, rule=default_rule("accurate", nodes=48))
    assert np.max(np.abs(a - b)) < 1e-9


def test_symmetrized_examples():
    assert psi_12_symmetrized(osc(omega=0), 1.0) == 0
    big = psi_12_symmetrized(osc(hbar=0.1), 1e-6)
    assert abs(big) < 1e-6
    with pytest.raises(OutOfSectorError):
        psi_12_symmetrized(osc(), -1.0)


def test_symmetrized_brute_force():
    s = np.linspace(0.0, 40.0, 1_000_001)
    f = np.arctan(s) * np.exp(-s)
    trap = float(np.sum(f[1:] + f[:-1]) * (s[1] - s[0]) / 2)
    expected = -(-1) ** 1 * 1 * (-1) * 0.1 * 1 / math.pi * trap
    assert psi_12_symmetrized(osc(hbar=0.1), 1.0) == pytest.approx(expected, rel=1e-9)


def test_symmetrized_matches_first_order():
    o = osc(hbar=0.1, zg=1 + 0.3j)
    for t in (0.5 + 0.1j, 2 - 0.5j):
        fo = first_order_psi(o, 1j * t)
        assert abs(psi_12_symmetrized(o, t) - 1j * (fo[0, 1] + fo[1, 0])) < 1e-12

import math

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as hnp

from spheronlab import gap, oracles

# frozen oracle values (bisection / closed-form / symbolic references)
DELTA_01_W15 = 1.3531677920507725
DELTA_INTEGRAL_111 = 0.2757205647717832


def test_two_level_gap_frozen():
    sol = gap.solve_gap_discrete([0.0, 1.0], 1.5)
    assert sol.delta == pytest.approx(DELTA_01_W15, rel=1e-14)
    assert sol.delta == pytest.approx(oracles.bisect_gap([0.0, 1.0], 1.5), rel=1e-14)


def test_integral_gap_frozen():
    res = gap.solve_gap_integral(1.0, 1.0, 1.0)
    assert res.delta == pytest.approx(DELTA_INTEGRAL_111, rel=1e-15)
    assert res.relative_difference < 1e-10
    assert abs(res.delta - 0.275721) < 1e-6


def test_symbolic_energy_matches_functional():
    # by hand: 2*0.2 - 1.5*(0.5 + 0.4)^2 = -163/200
    exact = oracles.symbolic_pairing_energy([0.5, 0.2], [0.0, 1.0], 1.5)
    assert exact == sympy.Rational(-163, 200)
    assert gap.energy_functional(np.sqrt([0.5, 0.2]), [0.0, 1.0], 1.5) == pytest.approx(-0.815, rel=1e-15)
    # t = (1/2, 1/3), W = 1: 2/3 - (1/2 + sqrt(2)/3)^2 = 7/36 - sqrt(2)/3
    exact = oracles.symbolic_pairing_energy([sympy.Rational(1, 2), sympy.Rational(1, 3)], [0, 1], 1)
    assert sympy.simplify(exact - (sympy.Rational(7, 36) - sympy.sqrt(2) / 3)) == 0
    assert gap.energy_functional(np.sqrt([0.5, 1 / 3]), [0.0, 1.0], 1.0) == pytest.approx(float(exact), rel=1e-14)


@pytest.mark.parametrize("eps,W", [([0.0, 1.0], 1.5), ([0.1, 0.5, 1.0], 1.0), ([0.2, 0.4, 0.6, 0.8], 0.7)])
def test_matches_brute_force(eps, W):
    sol = gap.solve_gap_discrete(eps, W)
    t, e = oracles.brute_force_pairing(eps, W)
    assert np.abs(t - sol.occupations).max() < 1e-3
    assert abs(sol.energy() - e) <= 1e-6 * abs(e)
    assert np.abs(sol.stationarity_residual()).max() < 1e-12


def test_gapless_when_coupling_weak():
    sol = gap.solve_gap_discrete([1.0, 2.0], 0.5)
    assert sol.gapless and sol.delta == 0.0
    assert list(sol.occupations) == [0.0, 0.0]


def test_discrete_converges_to_integral():
    nu = 1e4
    lev = gap.ladder_levels(nu, 1.0)
    assert lev.size == 10000
    d = gap.solve_gap_discrete(lev, 1.0 / nu).delta
    assert abs(d / gap.closed_form_gap(1.0 / nu, nu, 1.0) - 1) < 0.02


def test_excitation_floors():
    sol = gap.solve_gap_discrete([-0.3, 0.1, 0.4], 0.9)
    assert np.all(gap.unpaired_penalty(sol.delta, sol.levels) >= sol.delta)
    assert np.all(gap.pair_breaking_cost(sol.delta, sol.levels) >= 2 * sol.delta)
    xi = gap.pair_addition_energy(sol.delta, sol.levels)
    assert np.all(xi <= 0)


def test_pair_addition_stable_for_large_eps():
    d, e = 1e-6, 1e3
    assert gap.pair_addition_energy(d, e) == pytest.approx(-d * d / (2 * e), rel=1e-12)


def test_langmuir_against_si_oracle():
    w = gap.langmuir_frequency(1e20)
    assert w == pytest.approx(oracles.langmuir_frequency_si(1e20), rel=1e-9)
    assert w == pytest.approx(5.6414602258e14, rel=1e-10)
    assert gap.penetration_depth(w) == pytest.approx(2.99792458e10 / w, rel=1e-15)


def test_neutrality_delta():
    for q in (1e-12, 1e-3, 1.0, 7.0):
        d = gap.neutrality_delta(q, 1.0, 1.0)
        assert (1 + d) ** 3 - 1 == pytest.approx(q, rel=1e-12)


def test_speed_energy_identity_symbolic():
    e, rho, mu, R, r, k, m = sympy.symbols("e rho mu R r kappa m", positive=True)
    F = 4 * sympy.pi * e**2 * (k * rho * R**3 - mu * ((R + r) ** 3 - R**3)) / (3 * (R + r) ** 2)
    v = sympy.sqrt(F * (R + r) / m)
    ke = 2 * sympy.pi * e**2 * (k * rho * R**3 - mu * ((R + r) ** 3 - R**3)) / (3 * (R + r))
    assert sympy.simplify(m * v**2 / 2 - ke) == 0


def test_speed_energy_identity_numeric():
    geom = gap.CoverGeometry(R=2.0, r0=0.3, rho_ion=1.0, mu_e=0.9, e=1.0, m_e=1.0)
    for r in np.linspace(0.0, 0.3, 7):
        v = gap.electron_speed(geom, r)
        assert 0.5 * v * v == pytest.approx(gap.kinetic_energy(geom, r), rel=1e-13)


def test_geometry_validation():
    with pytest.raises(ValueError):
        gap.CoverGeometry(R=1.0, r0=0.1, rho_ion=1.0, mu_e=1.0, e=1.0, Q=5.0)
    geom = gap.CoverGeometry(R=1.0, r0=1.0, rho_ion=1.0, mu_e=10.0, e=1.0, m_e=1.0)
    with pytest.raises(ValueError):
        gap.kinetic_energy(geom, 0.9)


@given(hnp.arrays(np.float64, st.integers(1, 8), elements=st.floats(-5, 5)),
       st.floats(0.01, 10.0), st.floats(0.01, 10.0))
def test_gap_monotone_in_W(eps, W1, W2):
    lo, hi = sorted((W1, W2))
    assert gap.solve_gap_discrete(eps, lo).delta <= gap.solve_gap_discrete(eps, hi).delta * (1 + 1e-12)


@given(hnp.arrays(np.float64, st.integers(1, 8), elements=st.floats(-5, 5)), st.floats(0.01, 10.0))
def test_solution_satisfies_gap_equation(eps, W):
    sol = gap.solve_gap_discrete(eps, W)
    E = np.hypot(sol.delta, eps)
    assert E.min() >= sol.delta
    if not sol.gapless:
        assert abs(np.sum(W / (2 * E)) - 1.0) < 1e-10
    else:
        assert np.all(eps != 0) and np.sum(W / (2 * np.abs(eps))) <= 1 + 1e-12


@given(st.floats(0.05, 5.0), st.floats(0.5, 5.0), st.floats(0.1, 10.0))
def test_closed_form_solves_integral_equation(W, nu, eps_max):
    d = gap.closed_form_gap(W, nu, eps_max)
    if d > 1e-250:
        assert math.asinh(eps_max / d) == pytest.approx(2 / (W * nu), rel=1e-12)

import math

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from spheronlab import oracles
from spheronlab import thomas_fermi as tf

# frozen reference: initial slope of the neutral-atom solution
ATOM_SLOPE = -1.588071022611375


@pytest.fixture(scope="module")
def atom():
    return tf.separatrix_atom()


@pytest.fixture(scope="module")
def manifold():
    return oracles.StableManifoldAtom()


def test_fixed_points_exact_rational():
    y, z = sympy.Integer(144), sympy.Integer(-432)
    assert 3 * y + z == 0 and 4 * z + y ** sympy.Rational(3, 2) == 0
    assert tf.reduced_rhs(0.0, 0.0) == (0.0, 0.0)
    assert tf.reduced_rhs(*tf.SOMMERFELD) == (0.0, 0.0)


def test_fixed_point_classification():
    o = tf.classify_fixed_point(0.0, 0.0)
    a = tf.classify_fixed_point(144.0, -432.0)
    assert o.classification == "unstable node" and o.eigenvalues == (4.0, 3.0)
    assert a.classification == "saddle" and a.determinant == pytest.approx(-6.0, abs=1e-12)
    lam = sorted(float(v) for v in a.eigenvalues)
    assert lam == pytest.approx([(7 - math.sqrt(73)) / 2, (7 + math.sqrt(73)) / 2], rel=1e-14)
    with pytest.raises(ValueError):
        tf.classify_fixed_point(1.0, 1.0)


def test_sommerfeld_solves_equation():
    x = np.geomspace(0.1, 100.0, 20)
    f, g = tf.sommerfeld(x)
    assert np.allclose(g, -3 * f / x, rtol=1e-15)
    fpp = 1728.0 / x**5
    assert np.all(np.abs(fpp - f**1.5 / np.sqrt(x)) <= 1e-12 * fpp)


def test_reduce_round_trip():
    s = tf.reduce(2.0, 0.3, -0.4)
    assert s.y == 8 * 0.3 and s.z == 16 * -0.4
    x, f, g = tf.unreduce(s)
    assert (x, f, g) == pytest.approx((2.0, 0.3, -0.4), rel=1e-15)


def test_dual_chart_agreement():
    (fp, gp), (fr, gr) = tf.dual_chart_endpoints(1.0, 2.0, 1.0, -1.0)
    assert abs(fp - fr) < 1e-8 and abs(gp - gr) < 1e-8


@pytest.mark.parametrize("nu", [0.5, 2.0])
def test_scale_symmetry(nu):
    x0, x1, f0, g0 = 1.0, 3.0, 1.0, -0.5
    a = tf.integrate_physical(x0, x1, f0, g0, dense=True)
    b = tf.integrate_physical(nu * x0, nu * x1, f0 / nu**3, g0 / nu**4, dense=True)
    xs = np.linspace(x0, x1, 25)
    fa, ga = a.sol(xs)
    fb, gb = b.sol(nu * xs)
    assert np.abs(fb * nu**3 - fa).max() < 1e-8
    assert np.abs(gb * nu**4 - ga).max() < 1e-8


def test_cone_exit_raises():
    with pytest.raises(tf.ConeExitError):
        tf.integrate_physical(1.0, 10.0, 0.1, -2.0)
    with pytest.raises(tf.ConeExitError):
        tf.reduced_rhs(-1.0, 0.0)


def test_atom_slope_frozen(atom):
    assert atom.slope == pytest.approx(ATOM_SLOPE, abs=1e-10)


def test_atom_against_stable_manifold(atom, manifold):
    assert atom.slope == pytest.approx(manifold.slope, abs=1e-8)
    rho, y, z = atom.reduced()
    lo, hi = manifold.rho_range
    keep = (rho > lo + 0.1) & (rho < hi - 0.1)
    yo, zo = manifold.reduced(rho[keep])
    assert np.abs(y[keep] - yo).max() < 1e-6 * 144


def test_atom_shape(atom):
    assert np.all(atom.f > 0) and np.all(np.diff(atom.f) < 0)
    assert abs(atom.asymptotic_ratio() - 1.0) < 0.05
    _, y, _ = atom.reduced()
    assert np.all(np.diff(y) > 0) and y[-1] < 144.0


def test_thermal_helpers_audit():
    V = np.linspace(-5.0, 1.0, 61)
    n = tf.tf_electron_density(V, m=1.0, hbar=1.0)
    assert np.all(n >= 0) and np.all(n[V >= 0] == 0)
    assert np.all(np.diff(n[V <= 0]) < 0)  # increasing in -V
    assert tf.fermi_momentum(-2.0, m=1.0) == 2.0


@pytest.fixture(scope="module")
def manufactured():
    return tf.manufacture_problem()


def test_manufactured_recovered(manufactured):
    res = tf.shielding_iteration(manufactured.params)
    assert abs(res.kappa - manufactured.kappa) < 1e-8
    assert abs(res.r0 - manufactured.r0) < 1e-8 * manufactured.r0
    assert res.residual_norms[-1] <= 1e-12


def test_manufactured_exact_residual(manufactured):
    r = tf.fireball_bvp(manufactured.params, manufactured.r0, manufactured.kappa)
    assert r.norm < 1e-10


@pytest.mark.parametrize("kappa,r0", [(0.5, 0.08), (1.0, 0.08), (0.5, 0.2), (1.0, 0.2)])
def test_manufactured_from_corner_seeds(manufactured, kappa, r0):
    res = tf.shielding_iteration(manufactured.params, kappa=kappa, r0=r0)
    assert abs(res.kappa - manufactured.kappa) < 1e-8


def test_variational_jacobian_matches_fd(manufactured):
    p = manufactured.params
    r = tf.fireball_bvp(p, 0.12, 0.85, jacobian=True)
    J_fd = tf.finite_difference_jacobian(p, 0.12, 0.85)
    assert np.abs(r.jacobian - J_fd).max() <= 1e-5 * np.abs(J_fd).max()


def test_params_validation():
    with pytest.raises(ValueError):
        tf.TFParams(Q=-1.0, R=1.0)
    p = tf.TFParams(Q=1.0, R=5.0, zeta=1.0, mu_e=2.0, rho_ion=3.0)
    assert p.neutral_kappa(0.0) == 0.0
    h = 1e-6
    assert p.neutral_kappa_slope(0.5) == pytest.approx((p.neutral_kappa(0.5 + h) - p.neutral_kappa(0.5 - h)) / (2 * h),
                                                       rel=1e-7)


def test_portrait_samples_shape():
    rows = tf.portrait_samples(n=5)
    assert len(rows) == 25 and all(len(r) == 4 for r in rows)


@given(st.floats(1.0, 300.0), st.floats(-900.0, 100.0))
def test_reduced_field_consistent_with_physical(y, z):
    # d(y, z)/d rho from the chain rule applied to the physical field
    x = 2.0
    f, g = y / x**3, z / x**4
    df, dg = tf.tf_rhs(x, f, g)
    dy = x * (3 * x**2 * f + x**3 * df)
    dz = x * (4 * x**3 * g + x**4 * dg)
    ry, rz = tf.reduced_rhs(y, z)
    assert dy == pytest.approx(ry, rel=1e-12, abs=1e-9)
    assert dz == pytest.approx(rz, rel=1e-12, abs=1e-9)

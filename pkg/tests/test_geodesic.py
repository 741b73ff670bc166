import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spheronlab import geodesic as geo

ANGLES = np.linspace(0.1, 0.5 * np.pi, 40)


def test_force_quadrature_matches_closed_form():
    err = max(abs(geo.point_circle_force_quadrature(a) - geo.point_circle_force(a)) for a in ANGLES)
    assert err < 1e-8


def test_force_quadrature_independent_of_phase():
    assert geo.point_circle_force_quadrature(0.4, phi=1.234) == pytest.approx(
        geo.point_circle_force_quadrature(0.4), rel=1e-13)


def test_torque_quadrature_matches_closed_form():
    err = max(abs(geo.circle_circle_torque_quadrature(a) - geo.circle_circle_torque(a)) for a in ANGLES)
    assert err < 1e-8


def test_moment_density_constant():
    tau = np.linspace(0.1, 6.0, 50)
    tau = tau[np.abs(np.sin(tau)) > 1e-3]
    m = geo.moment_density(0.6, tau)
    assert np.ptp(m) < 1e-10 * abs(m).max()


def test_torque_is_derivative_of_potential():
    h = 1e-5
    for th in (0.3, 0.8, 1.3):
        fd = (geo.circle_circle_potential(th + h) - geo.circle_circle_potential(th - h)) / (2 * h)
        assert -fd * geo.TORQUE_CONSTANT == pytest.approx(geo.circle_circle_torque(th), rel=1e-8)


def test_angles_out_of_range_rejected():
    for bad in (0.0, -0.1, 2.0):
        with pytest.raises(ValueError):
            geo.circle_circle_torque(bad)
        with pytest.raises(ValueError):
            geo.point_circle_force_quadrature(bad)


def test_pairwise_potential_projective():
    qi, qj = np.array([1.0, 0.0, 0.0]), np.array([1.0, 1.0, 0.0])
    assert geo.pairwise_potential(qi, qj) == pytest.approx(math.sqrt(2.0), rel=1e-15)
    assert geo.pairwise_potential(-3 * qi, 2 * qj) == geo.pairwise_potential(qi, qj)
    with pytest.raises(geo.CollisionError):
        geo.pairwise_potential(qi, -2 * qi)
    assert geo.angle_between(qi, -qj) == pytest.approx(math.pi / 4)


def test_laplace_beltrami_degree_two():
    rng = np.random.default_rng(2)
    for _ in range(4):
        F = geo.harmonic_quadratic(rng.normal(size=9))
        q = rng.normal(size=3)
        for form in ("reduced", "full"):
            assert geo.laplace_beltrami_rp2(F, q, form=form) / F(q) == pytest.approx(-6.0, abs=1e-6)


def test_laplace_beltrami_of_potential_term():
    # 1/sin of the polar angle, a function of one variable on the sphere
    def F(q):
        q = np.asarray(q, dtype=float)
        return float(np.linalg.norm(q) / np.hypot(q[0], q[1]))

    th = 0.9
    q = np.array([math.sin(th), 0.0, math.cos(th)])
    # D f = f'' + cot(th) f' with f = 1/sin
    s, c = math.sin(th), math.cos(th)
    exact = (1 + c * c) / s**3 - c * c / s**3
    assert geo.laplace_beltrami_rp2(F, q) == pytest.approx(exact, rel=1e-6)


def test_non_homogeneous_rejected():
    with pytest.raises(ValueError):
        geo.laplace_beltrami_rp2(lambda q: float(q @ q), np.array([1.0, 0.2, 0.3]))


def test_free_spectrum_and_quantisation():
    levels = geo.free_spectrum(1.0, 6)
    assert [(l, m) for l, _, m in levels] == [(2, 5), (4, 9), (6, 13)]
    assert len(geo.quasi_modes(1.0, 6)) == 27
    freqs, ladders = geo.quantize_free([3.0, 10.0], 2)
    assert freqs[0] == math.sqrt(3.0)
    assert np.allclose(ladders[1], np.array([0.5, 1.5, 2.5]) * math.sqrt(10.0))


def test_configuration_validation_and_records():
    with pytest.raises(ValueError):
        geo.RP2Configuration(np.eye(3), np.eye(3))  # velocity not tangent
    cfg = geo.RP2Configuration.random(4, seed=5)
    back = geo.RP2Configuration.from_record(cfg.to_record())
    assert np.array_equal(back.points, cfg.points) and np.array_equal(back.velocities, cfg.velocities)


def test_equilibria_have_zero_force():
    for pts in (np.eye(3)[:2], np.eye(3)):
        cfg = geo.RP2Configuration(pts, np.zeros_like(pts))
        assert np.abs(geo.nbody_forces(cfg)).max() < 1e-12


@pytest.fixture(scope="module")
def random_runs():
    out = []
    for seed in range(3):
        cfg = geo.RP2Configuration.random(3, seed=seed, speed=0.3)
        out.append(geo.simulate(cfg, geo.guarded_dt(cfg), 10_000))
    return out


def test_energy_drift_small(random_runs):
    for res in random_runs:
        assert res.relative_drift < 1e-8
        assert np.abs(np.einsum("ij,ij->i", res.config.points, res.config.points) - 1).max() < 1e-12


def test_antipodal_invariance_exact():
    cfg = geo.RP2Configuration.random(5, seed=9, speed=0.2)
    flip = cfg.flipped([1, 3, 4])
    assert cfg.potential_energy() == flip.potential_energy()
    assert cfg.kinetic_energy() == flip.kinetic_energy()
    sign = np.array([1, -1, 1, -1, -1])[:, None]
    assert np.array_equal(geo.nbody_forces(flip), sign * geo.nbody_forces(cfg))
    dt = geo.guarded_dt(cfg)
    a, b = geo.simulate(cfg, dt, 300), geo.simulate(flip, dt, 300)
    assert np.array_equal(a.energies, b.energies)
    assert np.array_equal(b.config.points, sign * a.config.points)


def test_dt_guard():
    cfg = geo.RP2Configuration.random(3, seed=1)
    with pytest.raises(ValueError):
        geo.simulate(cfg, 0.2 / geo.max_frequency(cfg), 10)


def test_collision_aborts():
    q = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    # head-on approach fast enough to overcome the repulsion
    v = np.array([[0.0, 50.0, 0.0], [50.0, 0.0, 0.0]])
    cfg = geo.RP2Configuration(q, v, g=1e-6)
    with pytest.raises(geo.CollisionError):
        geo.simulate(cfg, 1e-4, 100_000, reject_sin=1e-3, abort_sin=1e-4)


def test_gradient_flow_descends():
    cfg = geo.RP2Configuration.random(4, seed=3)
    res = geo.simulate(cfg, 1e-3, 500, mode="gradient", record_every=50)
    assert np.all(np.diff(res.energies) <= 1e-14)


def test_fourth_order_beats_second_order():
    cfg = geo.RP2Configuration.random(3, seed=4, speed=0.3)
    dt = geo.guarded_dt(cfg, 0.05)
    d2 = geo.simulate(cfg, dt, 2000, order=2).relative_drift
    d4 = geo.simulate(cfg, dt, 2000, order=4).relative_drift
    assert d4 < d2


@given(st.integers(2, 6), st.integers(0, 10_000))
def test_forces_are_negative_gradient(n, seed):
    cfg = geo.RP2Configuration.random(n, seed=seed)
    F = geo.nbody_forces(cfg)
    rng = np.random.default_rng(seed + 1)
    q = cfg.points
    h = 1e-5
    for i in range(n):
        t = rng.normal(size=3)
        t -= (t @ q[i]) * q[i]
        t /= np.linalg.norm(t)

        def U(s):
            p = q.copy()
            p[i] = (q[i] + s * t) / np.linalg.norm(q[i] + s * t)
            return geo.RP2Configuration(p, np.zeros_like(p)).potential_energy()

        dU = (U(h) - U(-h)) / (2 * h)
        assert abs(F[i] @ t + dU) <= 1e-6 * max(1.0, abs(dU))


@given(st.integers(2, 6), st.integers(0, 10_000))
def test_forces_tangent_and_balanced(n, seed):
    cfg = geo.RP2Configuration.random(n, seed=seed)
    F = geo.nbody_forces(cfg)
    assert np.abs(np.einsum("ij,ij->i", F, cfg.points)).max() < 1e-9 * max(1.0, np.abs(F).max())
    # rotation invariance of the potential: total torque vanishes
    torque = np.cross(cfg.points, F).sum(axis=0)
    assert np.abs(torque).max() < 1e-9 * max(1.0, np.abs(F).max())

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spheronlab import membrane as mb


def _real_y(l, m, grid):
    return mb.ylm_samples(l, m, grid).real


@pytest.mark.parametrize("l,m", [(1, 0), (2, 1), (3, 2), (4, 0), (5, 3)])
def test_laplacian_of_harmonics(l, m):
    grid = mb.SphereGrid(32, 33)
    y = _real_y(l, m, grid)
    assert np.abs(mb.laplace_beltrami(y, grid) + l * (l + 1) * y).max() < 1e-10


@pytest.mark.parametrize("beta,R", [(2.0, 1.0), (1.0, 3.0)])
def test_wave_rhs_identifies_operator(beta, R):
    grid = mb.SphereGrid(32, 33)
    y = _real_y(3, 1, grid)
    expected = -3 * 4 * beta / (2 * R) * y
    assert np.abs(mb.wave_rhs(y, grid, beta, R) - expected).max() < 1e-10


def test_inflation_is_linear_exactly():
    grid = mb.SphereGrid(16, 17)
    one = np.ones((17, 16))
    f = mb.DisplacementField(2.0, 1e-3 * one, 0 * one, 0 * one, grid)
    assert np.abs(mb.linearized_mean_curvature(f) - (-1 + 1e-3) / 2.0).max() < 1e-14


def test_undisplaced_sphere():
    grid = mb.SphereGrid(16, 17)
    f = mb.DisplacementField.zeros(1.5, grid)
    assert np.allclose(mb.linearized_mean_curvature(f), -1 / 1.5, atol=1e-15)
    ex = mb.exact_mean_curvature(f)
    assert np.isnan(ex[0]).all() and np.isnan(ex[-1]).all()
    assert np.allclose(ex[1:-1], -1 / 1.5, atol=1e-12)


def test_linearization_defect_is_second_order():
    grid = mb.SphereGrid(32, 33)
    shape = _real_y(2, 1, grid) + 0.5 * _real_y(3, 0, grid)
    zero = np.zeros_like(shape)
    defects = []
    for eps in (1e-2, 5e-3, 2.5e-3):
        f = mb.DisplacementField(1.0, eps * shape, zero, zero, grid)
        d = mb.linearized_mean_curvature(f) - mb.exact_mean_curvature(f)
        defects.append(np.nanmax(np.abs(d[1:-1])))
    ratios = np.array(defects[:-1]) / np.array(defects[1:])
    assert np.all(np.abs(ratios - 4.0) < 0.1)


@pytest.mark.parametrize("kind", ["rotation", "projection"])
def test_linearized_curvature_ignores_tangential_fields(kind):
    # smooth tangential displacements only reparametrise the sphere to first order
    grid = mb.SphereGrid(32, 33)
    r, k, l = mb.frame(grid)
    a = np.array([0.3, -0.7, 0.4])[:, None, None]
    if kind == "rotation":
        pi_ = np.cross(a, r, axis=0)
    else:
        pi_ = a - np.einsum("i...,i...->...", a, r) * r
    v = 1e-3 * np.einsum("i...,i...->...", pi_, k)
    w = 1e-3 * np.einsum("i...,i...->...", pi_, l)
    f = mb.DisplacementField(1.0, np.zeros_like(v), v, w, grid)
    assert np.abs(mb.linearized_mean_curvature(f) + 1.0).max() < 1e-12


def test_pole_must_be_single_valued():
    grid = mb.SphereGrid(16, 17)
    u = np.zeros((17, 16))
    u[0] = np.arange(16)
    with pytest.raises(ValueError):
        mb.DisplacementField(1.0, u, 0 * u, 0 * u, grid)


def test_odd_phi_count_rejected():
    with pytest.raises(ValueError):
        mb.SphereGrid(15, 17)


def test_modal_round_trip():
    rng = np.random.default_rng(0)
    l_max = 6
    n = (l_max + 1) ** 2
    state = mb.ModalState(l_max, rng.normal(size=n) + 1j * rng.normal(size=n),
                          rng.normal(size=n) + 1j * rng.normal(size=n))
    grid = mb.SphereGrid.for_degree(l_max)
    u, ud = mb.modal_to_grid(state, grid)
    back = mb.grid_to_modal(u, ud, grid, l_max)
    assert np.abs(back.displacement - state.displacement).max() < 1e-12
    assert np.abs(back.velocity - state.velocity).max() < 1e-12


def test_aliasing_warning():
    grid = mb.SphereGrid.for_degree(8)
    u = mb.ylm_samples(6, 2, grid)
    with pytest.warns(mb.AliasingWarning):
        state = mb.grid_to_modal(u, 0 * u, grid, 4)
    assert np.abs(state.displacement).max() < 1e-12
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        mb.grid_to_modal(u, 0 * u, grid, 6)


def test_indexing():
    assert [mb.lm_index(l, m) for l in range(3) for m in range(-l, l + 1)] == list(range(9))
    assert list(mb.degrees(2)) == [0, 1, 1, 1, 2, 2, 2, 2, 2]
    assert list(mb.orders(1)) == [0, -1, 0, 1]


def test_state_is_immutable_and_round_trips_records():
    s = mb.ModalState.from_dict(2, {(1, 0): (1.0, 0.5j), (2, -1): (0.25, 0.0)})
    with pytest.raises(ValueError):
        s.displacement[0] = 1.0
    back = mb.ModalState.from_records(s.to_records())
    assert np.array_equal(back.displacement, s.displacement)
    assert np.array_equal(back.velocity, s.velocity)
    assert s.coefficient(1, 0) == (1.0, 0.5j)


def test_first_order_eigenvalues_exactly_imaginary():
    ev = mb.first_order_eigenvalues(mb.first_order_system(10))
    assert np.all(ev.real == 0.0)
    assert np.allclose(np.sort(ev.imag), np.sort(mb.stability_spectrum(10).imag), atol=1e-14)


def test_first_order_rejects_foreign_matrix():
    M = mb.first_order_system(2)
    M[0, 0] = 1.0
    with pytest.raises(ValueError):
        mb.first_order_eigenvalues(M)


def test_l0_mode_drifts_linearly():
    s = mb.ModalState.from_dict(1, {(0, 0): (1.0, 2.0)})
    out = mb.evolve_membrane(s, 3.0)
    assert out.coefficient(0, 0) == (7.0, 2.0)


@given(st.integers(1, 6), st.floats(0.0, 200.0), st.integers(0, 2**32 - 1))
def test_energy_conserved_and_norm_bounded(l_max, t, seed):
    rng = np.random.default_rng(seed)
    n = (l_max + 1) ** 2
    u = rng.normal(size=n)
    v = rng.normal(size=n)
    u[0] = v[0] = 0.0  # the bound is for l >= 1
    s = mb.ModalState(l_max, u, v)
    out = mb.evolve_membrane(s, t)
    assert abs(out.energy() - s.energy()) <= 1e-12 * s.energy()
    assert out.norm() <= mb.norm_bound_constant(l_max) * s.norm() * (1 + 1e-12)


@given(st.floats(0.1, 10.0), st.floats(0.1, 10.0), st.floats(0.0, 50.0))
def test_physical_normalisation_scales_frequency(beta, R, t):
    s = mb.ModalState.from_dict(2, {(2, 1): (1.0, 0.0)})
    a = mb.evolve_membrane(s, t, beta, R)
    b = mb.evolve_membrane(s, t * math.sqrt(beta / (2 * R)))
    assert np.allclose(a.displacement, b.displacement, atol=1e-9)

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spheronlab import spectra


@pytest.mark.parametrize("m", [1, 2, 3])
def test_richardson_matches_legendre_degrees(m):
    alpha = spectra.refined_eigenvalues(m * m, 5)
    l = np.arange(m, m + 5)
    assert np.max(np.abs(alpha - l * (l + 1)) / (l * (l + 1))) <= 1e-6


def test_stiffness_exactly_symmetric():
    K, M = spectra.assemble_operator(spectra.SpectralProblem(2.5, spectra.PsiGrid(64)))
    assert (K - K.T).nnz == 0
    assert (M - M.T).nnz == 0


def test_gram_identity():
    grid = spectra.PsiGrid(600)
    modes = spectra.solve_spectrum(spectra.SpectralProblem(1.0, grid), 8)
    G = spectra.gram_matrix(modes, grid)
    assert np.allclose(G, np.eye(8), atol=1e-8)


def test_dirichlet_ends_exactly_zero():
    for mode in spectra.solve_spectrum(spectra.SpectralProblem(3.0, spectra.PsiGrid(200)), 6):
        assert mode.samples[0] == 0.0 and mode.samples[-1] == 0.0


@pytest.mark.parametrize("m", [1, 2])
def test_parity_alternates_and_tracks_degree(m):
    modes = spectra.solve_spectrum(spectra.SpectralProblem(m * m, spectra.PsiGrid(400)), 6)
    for mode in modes:
        # the zonal factor of Y_lm is even in psi iff l - m is even
        assert mode.parity == ("even" if (mode.l - m) % 2 == 0 else "odd")
        interior = mode.samples[1:-1]
        sign_changes = np.count_nonzero(np.diff(np.sign(interior[np.abs(interior) > 1e-9])))
        assert sign_changes == mode.l - m


def test_zero_u_rejected():
    with pytest.raises(ValueError):
        spectra.SpectralProblem(0.0, spectra.PsiGrid(64))


def test_small_grid_and_count_rejected():
    with pytest.raises(ValueError):
        spectra.PsiGrid(8)
    with pytest.raises(ValueError):
        spectra.solve_spectrum(spectra.SpectralProblem(1.0, spectra.PsiGrid(32)), 9)


def test_dispersion_closed_form():
    # U = n^2 beta = 1 puts the lowest eigenvalue at 2
    kappa = spectra.dispersion(1, 1.0, 2.0)
    assert kappa == pytest.approx(np.sqrt(2.0 / 4.0), rel=1e-8)


@given(st.floats(0.1, 30.0))
def test_eigenvalues_real_ascending_positive(U):
    modes = spectra.solve_spectrum(spectra.SpectralProblem(U, spectra.PsiGrid(120)), 5)
    alpha = np.array([m.eigenvalue for m in modes])
    assert np.all(np.isfinite(alpha)) and np.all(alpha > 0) and np.all(np.diff(alpha) > 0)


@given(st.floats(0.5, 10.0), st.floats(0.5, 10.0))
def test_eigenvalues_increase_with_U(U1, U2):
    lo, hi = sorted((U1, U2))
    g = spectra.PsiGrid(120)
    a = spectra.solve_spectrum(spectra.SpectralProblem(lo, g), 3)
    b = spectra.solve_spectrum(spectra.SpectralProblem(hi, g), 3)
    assert all(x.eigenvalue <= y.eigenvalue + 1e-9 for x, y in zip(a, b))

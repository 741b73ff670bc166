import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as hnp

from spheronlab import fock


@pytest.mark.parametrize("n_max", [1, 2, 5, 8])
def test_exact_ccr_defect(n_max):
    alg = fock.ladder_matrices(n_max)
    expected = sympy.eye(n_max + 1)
    expected[n_max, n_max] = -n_max
    assert alg.exact_commutator() == expected
    assert np.allclose(alg.commutator(), fock.truncated_ccr(n_max), atol=1e-13)


def test_ladder_action_on_basis():
    alg = fock.ladder_matrices(4)
    assert np.allclose(alg.raising @ alg.basis(2), np.sqrt(3) * alg.basis(3))
    assert np.allclose(alg.lowering @ alg.basis(2), np.sqrt(2) * alg.basis(1))
    assert not np.any(alg.raising @ alg.basis(4))
    assert np.allclose(alg.raising @ alg.lowering, fock.number_operator(alg), atol=1e-14)


def test_oscillator_energies_exact():
    w = 1.7
    E = fock.oscillator_spectrum(w, 6)
    assert all(E[n] == (n + 0.5) * w for n in range(7))


def test_mode_validation():
    with pytest.raises(ValueError):
        fock.ModeIndex(fock.SPHERON, 0, 3)
    with pytest.raises(ValueError):
        fock.ModeIndex(fock.QUASI, 0, 2)
    with pytest.raises(ValueError):
        fock.ModeIndex(fock.SPHERON, 3, 2)
    assert fock.ModeIndex(fock.QUASI, 1, 2, sigma=9.0).frequency == 3.0


def test_field_hamiltonian_additive_and_monotone():
    a = fock.spheron_modes([2])
    b = fock.spheron_modes([4])
    assert fock.field_hamiltonian(a + b) == pytest.approx(fock.field_hamiltonian(a) + fock.field_hamiltonian(b),
                                                          rel=1e-15)
    occ = {a[0]: 1}
    assert fock.field_hamiltonian(a, occ) > fock.field_hamiltonian(a)
    assert fock.field_hamiltonian(a, {a[0]: 2}) > fock.field_hamiltonian(a, occ)
    with pytest.raises(ValueError):
        fock.field_hamiltonian(a, {b[0]: 1})


def test_interaction_symmetric_and_energy_conserving():
    modes = [fock.ModeIndex(fock.SPHERON, 0, 2), fock.ModeIndex(fock.SPHERON, 1, 2)]
    H = fock.interaction_matrix(modes, 3, 0.7)
    assert np.array_equal(H, H.T)
    assert np.abs(H).max() == pytest.approx(0.7 * 3.0)  # sqrt(n+1) sqrt(n) at most, n_max = 3
    for P in fock.energy_projectors(modes, 3):
        assert np.abs(P @ H - H @ P).max() == 0.0


def test_interaction_vanishes_between_unequal_frequencies():
    modes = [fock.ModeIndex(fock.SPHERON, 0, 2), fock.ModeIndex(fock.SPHERON, 0, 4)]
    H = fock.interaction_matrix(modes, 3, 1.0)
    # one quantum moved between different frequencies changes the energy
    assert not np.any(H)


def test_interaction_single_exchange_magnitude():
    modes = [fock.ModeIndex(fock.SPHERON, 0, 2), fock.ModeIndex(fock.SPHERON, 2, 2)]
    H = fock.interaction_matrix(modes, 1, 0.3)
    # |0,1> <-> |1,0>: indices 1 and 2 in the product basis
    assert H[2, 1] == H[1, 2] == -0.3


def test_interaction_rejects_mismatched_truncation():
    modes = [fock.ModeIndex(fock.SPHERON, 0, 2), fock.ModeIndex(fock.SPHERON, 1, 2)]
    with pytest.raises(ValueError):
        fock.interaction_matrix(modes, 3, 1.0, n_max_b=4)


def test_blockspec_example():
    op = fock.BlockOperator([1.0, 2.0], 0.5)
    assert list(fock.block_spectrum(op)) == [0.5, 1.5, 1.5, 2.5]


def test_polarization_exact_for_diagonal_blocks():
    op = fock.BlockOperator([0.2, -1.0, 3.5], 1.25)
    assert fock.polarization_defect(op) < 1e-14


def test_commuting_blocks_in_rotated_basis():
    rng = np.random.default_rng(3)
    U, _ = np.linalg.qr(rng.normal(size=(5, 5)))
    b1, b2 = rng.normal(size=5), rng.normal(size=5)
    ev, H = fock.commuting_block_spectrum(b1, b2, U)
    assert np.abs(ev - np.linalg.eigvalsh(H)).max() < 1e-12


def test_triplets_round_trip():
    rng = np.random.default_rng(1)
    M = rng.normal(size=(4, 4)) * (rng.uniform(size=(4, 4)) > 0.5)
    assert np.array_equal(fock.from_triplets(fock.to_triplets(M), M.shape), M)


@given(hnp.arrays(np.float64, st.integers(1, 64), elements=st.floats(-100, 100)),
       st.floats(0.0, 10.0))
def test_block_spectrum_matches_dense(diag, W):
    op = fock.BlockOperator(diag, W)
    assert np.abs(fock.block_spectrum(op) - np.linalg.eigvalsh(op.assemble())).max() <= 1e-12 * max(
        1.0, np.abs(diag).max() / 10)

import numpy as np
import pytest

from spheronlab import oracles


def test_brute_force_on_known_minimum():
    # one level at eps = 0: energy -W t (1 - t), minimum -W/4 at t = 1/2
    t, e = oracles.brute_force_pairing([0.0], 2.0)
    assert t[0] == pytest.approx(0.5, abs=1e-6)
    assert e == pytest.approx(-0.5, rel=1e-12)


def test_bisection_gap_hand_case():
    # single level eps = 0: 1 = W / (2 delta)
    assert oracles.bisect_gap([0.0], 3.0) == pytest.approx(1.5, rel=1e-14)


def test_stable_manifold_slope():
    m = oracles.StableManifoldAtom()
    assert m.slope == pytest.approx(-1.588071022611375, abs=1e-9)
    lo, hi = m.rho_range
    y, z = m.reduced(np.array([lo + 1.0, hi - 0.5]))
    assert np.all(y > 0) and np.all(z < 0)
    with pytest.raises(ValueError):
        m.reduced(hi + 1.0)

"""Gaussian-cgs constants derived from ``scipy.constants`` (SI, CODATA)."""
from scipy import constants as _c

#: speed of light, cm/s
C_LIGHT = _c.c * 1e2
#: elementary charge, statcoulomb
E_CHARGE = _c.e * _c.c * 10.0
#: electron mass, g
M_ELECTRON = _c.m_e * 1e3
#: reduced Planck constant, erg s
HBAR = _c.hbar * 1e7
#: Boltzmann constant, erg/K
K_BOLTZMANN = _c.k * 1e7

#: default temperature used for the thermal potential, K
ROOM_TEMPERATURE = 300.0


def thermal_energy(T: float = ROOM_TEMPERATURE) -> float:
    """k_B T in erg."""
    return K_BOLTZMANN * T

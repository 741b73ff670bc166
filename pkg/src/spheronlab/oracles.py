"""Independent reference computations used to validate the solvers.

Each oracle reaches its answer by a route that shares no numerical
machinery with the solver it checks.
"""
from __future__ import annotations

import math

import numpy as np
import sympy
from scipy import constants as si
from scipy.integrate import solve_ivp
from scipy.optimize import minimize

from .kernels import pairing_energy_batch
from .thomas_fermi import SOMMERFELD


# --------------------------------------------------------------------------
# gap equation
# --------------------------------------------------------------------------

def brute_force_pairing(eps, W: float, points: int = 11, target: float = 1e-4, polish: bool = True):
    """Minimise the pairing energy over t = x^2 in [0, 1]^N by box refinement.

    A tensor grid with ``points`` nodes per axis is laid over the current
    box, which is then shrunk around the best node until its half-width
    falls below ``target``; a bounded quasi-Newton polish follows.
    Returns ``(t, energy)``.
    """
    eps = np.asarray(eps, dtype=float)
    n = eps.size
    lo, hi = np.zeros(n), np.ones(n)
    best = None
    while True:
        axes = [np.linspace(lo[i], hi[i], points) for i in range(n)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
        e = pairing_energy_batch(grid, eps, W)
        k = int(np.argmin(e))
        best = grid[k]
        half = (hi - lo) / (points - 1)
        if half.max() <= target:
            break
        lo = np.clip(best - 2 * half, 0.0, 1.0)
        hi = np.clip(best + 2 * half, 0.0, 1.0)
    e_best = float(pairing_energy_batch(best, eps, W)[0])
    if polish:
        res = minimize(lambda t: pairing_energy_batch(t, eps, W)[0], best, method="L-BFGS-B",
                       bounds=[(0.0, 1.0)] * n, options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 2000})
        if res.fun <= e_best:
            best, e_best = res.x, float(res.fun)
    return best, e_best


def bisect_gap(eps, W: float, iterations: int = 200) -> float:
    """Plain bisection on 1 = sum W / (2 sqrt(delta^2 + eps^2))."""
    eps = np.asarray(eps, dtype=float)

    def phi(d):
        return sum(W / (2.0 * math.sqrt(d * d + e * e)) for e in eps) - 1.0

    lo, hi = 0.0, 0.5 * W * eps.size
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if mid == 0.0 or phi(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def symbolic_pairing_energy(t, eps, W):
    """Exact pairing energy for rational inputs (t = x^2)."""
    t = [sympy.nsimplify(v) for v in t]
    eps = [sympy.nsimplify(v) for v in eps]
    W = sympy.nsimplify(W)
    s = sum(sympy.sqrt(v * (1 - v)) for v in t)
    return sympy.simplify(sum(2 * e * v for e, v in zip(eps, t)) - W * s**2)


# --------------------------------------------------------------------------
# plasma frequency in SI
# --------------------------------------------------------------------------

def langmuir_frequency_si(n_cgs: float) -> float:
    """sqrt(n e^2 / (epsilon_0 m)) evaluated in SI from a density in cm^-3."""
    n = n_cgs * 1e6
    return math.sqrt(n * si.e**2 / (si.epsilon_0 * si.m_e))


# --------------------------------------------------------------------------
# Thomas-Fermi separatrix from the saddle's stable manifold
# --------------------------------------------------------------------------

class StableManifoldAtom:
    """Atom solution built backwards from the Sommerfeld saddle.

    The reduced system is integrated in reverse time from a point displaced
    along the saddle's stable eigenvector, switched to the x = t^2 chart
    near the origin and continued to t = 0.  The scale symmetry then fixes
    f(0) = 1.  No shooting is involved.
    """

    def __init__(self, offset: float = 1e-6, y_switch: float = 1e-3):
        lam = 0.5 * (7.0 - math.sqrt(73.0))
        v = np.array([1.0, lam - 3.0])
        start = np.array(SOMMERFELD) - offset * v

        def red(_, s):
            return [3.0 * s[0] + s[1], 4.0 * s[1] + max(s[0], 0.0) ** 1.5]

        def hit(_, s):
            return s[0] - y_switch
        hit.terminal = True

        back = solve_ivp(red, (0.0, -60.0), start, method="Radau", rtol=1e-13, atol=1e-16,
                         events=hit, dense_output=True)
        rho_s = float(back.t_events[0][0])
        y_s, z_s = back.y_events[0][0]
        x_s = math.exp(rho_s)
        f_s, g_s = y_s / x_s**3, z_s / x_s**4

        def root(t, s):
            return [2.0 * t * s[1], 2.0 * max(s[0], 0.0) ** 1.5]

        t_s = math.sqrt(x_s)
        down = solve_ivp(root, (t_s, 0.0), [f_s, g_s], method="Radau", rtol=1e-13, atol=1e-16)
        F0, G0 = down.y[:, -1]
        self.scale = F0 ** (1.0 / 3.0)
        self.slope = float(G0 / F0 ** (4.0 / 3.0))
        self._back = back
        self._rho_range = (rho_s, 0.0)

    def reduced(self, rho):
        """(y, z) of the f(0) = 1 solution at log-radius rho (within the computed range)."""
        r = np.asarray(rho, dtype=float) - math.log(self.scale)
        if np.any(r < self._rho_range[0]) or np.any(r > self._rho_range[1]):
            raise ValueError("rho outside the oracle's computed range")
        return self._back.sol(r)

    @property
    def rho_range(self):
        return tuple(r + math.log(self.scale) for r in self._rho_range)

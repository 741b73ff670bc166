"""Electron cover geometry and the pairing gap.

Geometry and plasma helpers work in Gaussian cgs units; the gap solvers
are unit-agnostic (any consistent energy unit).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .kernels import pairing_energy_batch
from .units import C_LIGHT, E_CHARGE, M_ELECTRON


# --------------------------------------------------------------------------
# plasma helpers
# --------------------------------------------------------------------------

def langmuir_frequency(n: float, e: float = E_CHARGE, m: float = M_ELECTRON) -> float:
    """Electron plasma frequency sqrt(4 pi e^2 n / m), in 1/s for cgs input."""
    if n <= 0 or e <= 0 or m <= 0:
        raise ValueError("density, charge and mass must be positive")
    return math.sqrt(4.0 * math.pi * e * e * n / m)


def penetration_depth(omega: float, c: float = C_LIGHT) -> float:
    """Field penetration depth c / omega."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    return c / omega


# --------------------------------------------------------------------------
# cover geometry
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CoverGeometry:
    """Kernel of radius R with ion density ``rho_ion`` and a cover of width ``r0``.

    ``Q`` defaults to the kernel charge (4/3) pi R^3 rho_ion e; an explicit
    value must agree with it to 1e-12 relative.
    """

    R: float
    r0: float
    rho_ion: float
    mu_e: float
    e: float = E_CHARGE
    m_e: float = M_ELECTRON
    Q: float | None = field(default=None)

    def __post_init__(self):
        if self.R <= 0:
            raise ValueError("R must be positive")
        if self.r0 < 0:
            raise ValueError("r0 must be nonnegative")
        if self.rho_ion <= 0 or self.mu_e <= 0:
            raise ValueError("densities must be positive")
        if self.e <= 0 or self.m_e <= 0:
            raise ValueError("charge and mass must be positive")
        q = 4.0 / 3.0 * math.pi * self.R**3 * self.rho_ion * self.e
        if self.Q is None:
            object.__setattr__(self, "Q", q)
        elif abs(self.Q - q) > 1e-12 * abs(q):
            raise ValueError(f"Q={self.Q} inconsistent with kernel charge {q}")

    def _bracket(self, r: float, kappa: float) -> float:
        R = self.R
        return kappa * self.rho_ion * R**3 - self.mu_e * ((R + r) ** 3 - R**3)


def neutrality_delta(kappa: float, rho_ion: float, mu_e: float) -> float:
    """Relative cover width delta = r0 / R from (1 + delta)^3 - 1 = kappa rho / mu."""
    q = kappa * rho_ion / mu_e
    if not q >= 0:
        raise ValueError(f"kappa*rho/mu must be nonnegative, got {q}")
    c = (1.0 + q) ** (1.0 / 3.0)
    # q / (c^2 + c + 1) avoids cancellation in c - 1 for small q
    return q / (c * c + c + 1.0)


def _kappa_at(kappa, r):
    return kappa(r) if callable(kappa) else kappa


def shielded_force(geom: CoverGeometry, r: float, kappa: float | Callable = 1.0) -> float:
    """Net attraction on an electron at depth r into the cover."""
    k = _kappa_at(kappa, r)
    return 4.0 * math.pi * geom.e**2 * geom._bracket(r, k) / (3.0 * (geom.R + r) ** 2)


def electron_speed(geom: CoverGeometry, r: float, kappa: float | Callable = 1.0) -> float:
    """Orbital speed sqrt(F (R + r) / m) balancing the shielded attraction."""
    F = shielded_force(geom, r, kappa)
    if F < 0:
        raise ValueError(f"net force is repulsive at r={r}")
    return math.sqrt(F * (geom.R + r) / geom.m_e)


def kinetic_energy(geom: CoverGeometry, r: float, kappa: float | Callable = 1.0) -> float:
    """Kinetic energy of an orbiting electron at R + r.

    ``kappa`` is a constant or a callable profile kappa(r).  A negative
    bracket inside the cover means the profile is inconsistent and raises.
    """
    if not 0.0 <= r <= geom.r0:
        raise ValueError(f"r must lie in [0, {geom.r0}], got {r}")
    k = _kappa_at(kappa, r)
    bracket = geom._bracket(r, k)
    scale = k * geom.rho_ion * geom.R**3
    if bracket < 0:
        if bracket < -1e-12 * abs(scale):
            raise ValueError(f"kinetic energy negative at r={r}: inconsistent kappa profile")
        bracket = 0.0
    return 2.0 * math.pi * geom.e**2 * bracket / (3.0 * (geom.R + r))


# --------------------------------------------------------------------------
# pairing functional and gap equation
# --------------------------------------------------------------------------

def energy_functional(x, eps, W: float) -> float:
    """Cover energy sum 2 eps x^2 - W (sum x y)^2 with y = sqrt(1 - x^2)."""
    x = np.asarray(x, dtype=float)
    eps = np.asarray(eps, dtype=float)
    if x.shape != eps.shape:
        raise ValueError("x and eps must have the same shape")
    if np.any(x < 0) or np.any(x > 1):
        raise ValueError("occupation amplitudes must lie in [0, 1]")
    return float(pairing_energy_batch(x * x, eps, W)[0])


@dataclass(frozen=True)
class GapSolution:
    delta: float
    occupations: np.ndarray
    quasiparticle_energies: np.ndarray
    levels: np.ndarray
    W: float
    gapless: bool = False

    def energy(self) -> float:
        return energy_functional(np.sqrt(self.occupations), self.levels, self.W)

    def stationarity_residual(self) -> np.ndarray:
        t = self.occupations
        return 2.0 * self.levels * np.sqrt(t - t * t) - self.delta * (1.0 - 2.0 * t)

    def to_record(self) -> dict:
        return {"delta": float(self.delta),
                "occupations": [float(v) for v in self.occupations],
                "energies": [float(v) for v in self.quasiparticle_energies],
                "gapless": bool(self.gapless)}


def gap_residual(delta: float, eps, W: float) -> float:
    """sum W / (2 sqrt(delta^2 + eps^2)) - 1, strictly decreasing in delta."""
    return float(np.sum(W / (2.0 * np.hypot(delta, eps))) - 1.0)


def _occupations(delta, eps):
    E = np.hypot(delta, eps)
    if delta > 0:
        return 0.5 * (1.0 - eps / E), E
    # normal state: levels below zero filled, above empty
    return np.where(eps < 0, 1.0, np.where(eps > 0, 0.0, 0.5)), E


def solve_gap_discrete(eps, W: float) -> GapSolution:
    """Gap Delta from 1 = sum W / (2 E_l), E_l = sqrt(Delta^2 + eps_l^2).

    Returns a gapless solution (Delta = 0) when sum W / (2|eps_l|) <= 1.
    """
    eps = np.atleast_1d(np.asarray(eps, dtype=float))
    if eps.size == 0:
        raise ValueError("at least one level is required")
    if not W > 0:
        raise ValueError("W must be positive")
    with np.errstate(over="ignore"):
        weak = np.all(eps != 0) and np.sum(W / (2.0 * np.abs(eps))) <= 1.0
    if weak:
        t, E = _occupations(0.0, eps)
        return GapSolution(0.0, t, E, eps, W, gapless=True)
    hi = 0.5 * W * eps.size
    lo = hi
    while gap_residual(lo, eps, W) <= 0.0:
        lo *= 1e-3
        if lo < 1e-300:
            t, E = _occupations(0.0, eps)
            return GapSolution(0.0, t, E, eps, W, gapless=True)
    if lo == hi:
        delta = hi
    else:
        delta = brentq(gap_residual, lo, hi, args=(eps, W), xtol=1e-300, rtol=1e-15, maxiter=500)
    t, E = _occupations(delta, eps)
    return GapSolution(float(delta), t, E, eps, W)


def closed_form_gap(W: float, nu: float, eps_max: float) -> float:
    """eps_max / sinh(2 / (W nu))."""
    if W <= 0 or nu <= 0 or eps_max <= 0:
        raise ValueError("W, nu and eps_max must be positive")
    return eps_max / math.sinh(2.0 / (W * nu))


def integral_residual(delta: float, W: float, nu: float, eps_max: float) -> float:
    """Quadrature of int_0^eps_max de / sqrt(delta^2 + e^2) minus 2 / (W nu)."""
    pts = [delta] if 0 < delta < eps_max else None
    val, _ = quad(lambda e: 1.0 / math.hypot(delta, e), 0.0, eps_max,
                  points=pts, epsabs=0.0, epsrel=1e-13, limit=200)
    return val - 2.0 / (W * nu)


def bisect_integral_gap(W: float, nu: float, eps_max: float, rtol: float = 1e-14) -> float:
    """Root of :func:`integral_residual` by bisection with a geometric bracket search."""
    lo = hi = eps_max
    while integral_residual(hi, W, nu, eps_max) > 0:
        hi *= 2.0
    while integral_residual(lo, W, nu, eps_max) < 0:
        lo *= 0.5
        if lo < 1e-300:
            raise ArithmeticError("bracket search underflowed")
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if integral_residual(mid, W, nu, eps_max) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rtol * hi:
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class IntegralGap:
    delta: float
    delta_quadrature: float

    @property
    def relative_difference(self) -> float:
        return abs(self.delta - self.delta_quadrature) / self.delta


def solve_gap_integral(W: float, nu: float, eps_max: float, verify: bool = True) -> IntegralGap:
    """Closed-form gap of the continuum equation, optionally re-derived by quadrature."""
    delta = closed_form_gap(W, nu, eps_max)
    check = bisect_integral_gap(W, nu, eps_max) if verify else float("nan")
    return IntegralGap(delta, check)


def ladder_levels(nu: float, eps_max: float) -> np.ndarray:
    """Equally spaced levels of density nu on [0, eps_max] (cell midpoints)."""
    n = int(math.floor(nu * eps_max + 1e-9))
    if n < 1:
        raise ValueError("nu * eps_max must be at least 1")
    return (np.arange(n) + 0.5) / nu


def pair_addition_energy(delta: float, eps):
    """xi = eps - sqrt(delta^2 + eps^2) (never positive)."""
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    eps = np.asarray(eps, dtype=float)
    E = np.hypot(delta, eps)
    with np.errstate(divide="ignore", invalid="ignore"):
        stable = -delta * delta / (eps + E)
    out = np.where(eps > 0, stable, eps - E)
    return float(out) if out.ndim == 0 else out


def unpaired_penalty(delta: float, eps):
    """Energy of a lone electron on level eps: sqrt(delta^2 + eps^2)."""
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    out = np.hypot(delta, np.asarray(eps, dtype=float))
    return float(out) if out.ndim == 0 else out


def pair_breaking_cost(delta: float, eps):
    return 2.0 * unpaired_penalty(delta, eps)

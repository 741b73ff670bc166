"""Interacting great circles on the sphere, i.e. points of RP^2.

A great circle is represented by its unit normal q, defined up to sign.
Two circles at angle theta interact through the potential 1/sin(theta).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import kernels
from .fock import QUASI, ModeIndex, oscillator_spectrum

#: the torque law carries this constant relative to the unit-normalised force
TORQUE_CONSTANT = math.pi**2


class CollisionError(ArithmeticError):
    """Two points approached closer than the abort threshold."""


def _check_angle(a: float, name: str):
    if not 0.0 < a <= 0.5 * math.pi + 1e-15:
        raise ValueError(f"{name} must lie in (0, pi/2], got {a}")


# --------------------------------------------------------------------------
# closed forms and their quadratures
# --------------------------------------------------------------------------

def point_circle_force(psi):
    """Repulsion pi cos(psi) / (2 sin^2 psi) of a unit-charged great circle on a point at latitude psi."""
    psi = np.asarray(psi, dtype=float)
    if np.any(psi <= 0) or np.any(psi > 0.5 * np.pi + 1e-15):
        raise ValueError("psi must lie in (0, pi/2]")
    out = np.pi * np.cos(psi) / (2.0 * np.sin(psi) ** 2)
    return float(out) if out.ndim == 0 else out


def point_circle_force_quadrature(psi: float, nodes: int = 2048, phi: float = 0.0) -> float:
    """Periodic trapezoid rule for the meridional force component over the circle."""
    _check_angle(psi, "psi")
    t = 2.0 * np.pi * np.arange(nodes) / nodes
    c = np.cos(t - phi)
    integrand = np.sin(psi) * c / (2.0 - 2.0 * np.cos(psi) * c) ** 2
    return float(2.0 * np.pi * integrand.mean())


def circle_circle_torque(theta):
    """Total moment pi^2 cos(theta) / sin^2(theta) between circles at angle theta."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0) or np.any(theta > 0.5 * np.pi + 1e-15):
        raise ValueError("theta must lie in (0, pi/2]")
    out = TORQUE_CONSTANT * np.cos(theta) / np.sin(theta) ** 2
    return float(out) if out.ndim == 0 else out


def circle_circle_potential(theta):
    """Unit-normalised interaction potential 1/sin(theta)."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0) or np.any(theta > 0.5 * np.pi + 1e-15):
        raise ValueError("theta must lie in (0, pi/2]")
    out = 1.0 / np.sin(theta)
    return float(out) if out.ndim == 0 else out


def moment_density(theta: float, tau):
    """Moment per unit parameter of the second circle, built from the geometry.

    The second circle is the equator rotated by theta about the x axis.  At
    each of its points the point-circle force (along the meridian, away from
    the equator) is projected on the rotated circle's normal and multiplied
    by the lever arm.  The signed arm about the x axis is sin(tau); its
    magnitude is taken as sin^2(tau), which makes the density constant.
    """
    tau = np.asarray(tau, dtype=float)
    P = np.stack([np.cos(tau), np.sin(tau) * np.cos(theta), np.sin(tau) * np.sin(theta)])
    psi = np.arcsin(np.clip(P[2], -1.0, 1.0))
    phi = np.arctan2(P[1], P[0])
    xi = np.stack([-np.cos(phi) * np.sin(psi), -np.sin(phi) * np.sin(psi), np.cos(psi)])
    eta = np.array([0.0, -np.sin(theta), np.cos(theta)])
    a = np.abs(psi)
    force = np.pi * np.cos(a) / (2.0 * np.sin(a) ** 2)
    proj = np.sign(P[2]) * np.einsum("i...,i->...", xi, eta)
    arm = np.sin(tau) * np.abs(np.sin(tau))
    return force * proj * arm


def circle_circle_torque_quadrature(theta: float, nodes: int = 2048) -> float:
    """Midpoint rule over the rotated circle (midpoints avoid the intersection points)."""
    _check_angle(theta, "theta")
    tau = 2.0 * np.pi * (np.arange(nodes) + 0.5) / nodes
    return float(2.0 * np.pi * moment_density(theta, tau).mean())


# --------------------------------------------------------------------------
# RP^2 potential and Laplace-Beltrami operator
# --------------------------------------------------------------------------

def pairwise_potential(qi, qj, g: float = 1.0) -> float:
    """g |q_i| |q_j| / |q_i x q_j| = g / sin(theta_ij)."""
    qi = np.asarray(qi, dtype=float)
    qj = np.asarray(qj, dtype=float)
    ni, nj = np.linalg.norm(qi), np.linalg.norm(qj)
    if ni == 0 or nj == 0:
        raise ValueError("homogeneous coordinates must not all vanish")
    cross = np.linalg.norm(np.cross(qi, qj))
    if cross <= 1e-15 * ni * nj:
        raise CollisionError("points coincide on RP^2 (proportional coordinates)")
    return float(g * ni * nj / cross)


def angle_between(qi, qj) -> float:
    """Angle in [0, pi/2] between the lines spanned by q_i and q_j."""
    qi = np.asarray(qi, dtype=float) / np.linalg.norm(qi)
    qj = np.asarray(qj, dtype=float) / np.linalg.norm(qj)
    return float(math.atan2(np.linalg.norm(np.cross(qi, qj)), abs(float(qi @ qj))))


def _derivatives(F: Callable, q: np.ndarray, h: float):
    """Central-difference gradient and Hessian at q."""
    q = np.asarray(q, dtype=float)
    f0 = F(q)
    grad = np.empty(3)
    hess = np.empty((3, 3))
    E = np.eye(3) * h
    for i in range(3):
        fp, fm = F(q + E[i]), F(q - E[i])
        grad[i] = (fp - fm) / (2 * h)
        hess[i, i] = (fp - 2 * f0 + fm) / h**2
        for j in range(i + 1, 3):
            v = (F(q + E[i] + E[j]) - F(q + E[i] - E[j])
                 - F(q - E[i] + E[j]) + F(q - E[i] - E[j])) / (4 * h * h)
            hess[i, j] = hess[j, i] = v
    return grad, hess


def richardson_derivatives(F: Callable, q, h: float = 1e-3):
    """Gradient and Hessian with one Richardson step (fourth order)."""
    g1, H1 = _derivatives(F, q, h)
    g2, H2 = _derivatives(F, q, 0.5 * h)
    return (4 * g2 - g1) / 3, (4 * H2 - H1) / 3


def _full_form(q, grad, hess):
    x, y, z = q
    return ((y * y + z * z) * hess[0, 0] + (z * z + x * x) * hess[1, 1] + (x * x + y * y) * hess[2, 2]
            - 2 * x * y * hess[0, 1] - 2 * y * z * hess[1, 2] - 2 * z * x * hess[2, 0]
            - 2 * (x * grad[0] + y * grad[1] + z * grad[2]))


def laplace_beltrami_rp2(F: Callable, q, h: float = 1e-3, form: str = "reduced",
                         homogeneity_tol: float = 1e-8) -> float:
    """Laplace-Beltrami operator of a degree-zero homogeneous F at q.

    ``form="reduced"`` returns |q|^2 times the flat Laplacian; ``"full"``
    evaluates the homogeneous-coordinate operator with its mixed and first
    order terms.  Both agree for degree-zero F.
    """
    q = np.asarray(q, dtype=float)
    grad, hess = richardson_derivatives(F, q, h)
    radial = float(q @ grad)
    scale = max(1.0, abs(F(q)))
    if abs(radial) > homogeneity_tol * scale:
        raise ValueError(f"F is not homogeneous of degree zero (radial derivative {radial:.3e})")
    if form == "reduced":
        return float((q @ q) * np.trace(hess))
    if form == "full":
        return float(_full_form(q, grad, hess))
    raise ValueError(f"unknown form {form!r}")


def harmonic_quadratic(coeffs) -> Callable:
    """F(q) = q^T A q / |q|^2 for the traceless symmetric part A of ``coeffs``."""
    A = np.asarray(coeffs, dtype=float).reshape(3, 3)
    A = 0.5 * (A + A.T)
    A = A - np.trace(A) / 3.0 * np.eye(3)

    def F(q):
        q = np.asarray(q, dtype=float)
        return float(q @ A @ q / (q @ q))

    return F


# --------------------------------------------------------------------------
# free spectrum
# --------------------------------------------------------------------------

def free_spectrum(gamma: float, l_max: int):
    """Levels (l, sigma, multiplicity) of the free quasi-particle, even l in 2..l_max."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    return [(l, 0.5 * gamma * l * (l + 1), 2 * l + 1) for l in range(2, l_max + 1, 2)]


def quasi_modes(gamma: float, l_max: int) -> list[ModeIndex]:
    return [ModeIndex(QUASI, m, l, sigma) for l, sigma, _ in free_spectrum(gamma, l_max)
            for m in range(-l, l + 1)]


def quantize_free(sigmas, n_max: int):
    """Oscillator frequencies sqrt(sigma) and their ladders (n + 1/2) sqrt(sigma)."""
    freqs = np.sqrt(np.asarray(sigmas, dtype=float))
    return freqs, [oscillator_spectrum(w, n_max) for w in freqs]


# --------------------------------------------------------------------------
# N-body dynamics
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RP2Configuration:
    """N points of RP^2 (unit representatives) with tangent velocities."""

    points: np.ndarray
    velocities: np.ndarray
    g: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        q = np.array(self.points, dtype=float)
        v = np.array(self.velocities, dtype=float)
        if q.ndim != 2 or q.shape[1] != 3 or v.shape != q.shape:
            raise ValueError("points and velocities must both have shape (N, 3)")
        norms = np.linalg.norm(q, axis=1)
        if np.any(norms == 0):
            raise ValueError("homogeneous coordinates must not all vanish")
        # rows already unit to rounding are kept bit-for-bit, so that
        # reconstructing a configuration (e.g. after a flip) is exact
        off = np.abs(norms - 1.0) > 4 * np.finfo(float).eps
        q[off] /= norms[off, None]
        if np.any(np.abs(np.einsum("ij,ij->i", q, v)) > 1e-12):
            raise ValueError("velocities must be tangent: <q_i, v_i> = 0 within 1e-12")
        if not self.g > 0 or not self.gamma > 0:
            raise ValueError("g and gamma must be positive")
        for arr in (q, v):
            arr.setflags(write=False)
        object.__setattr__(self, "points", q)
        object.__setattr__(self, "velocities", v)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @classmethod
    def random(cls, n: int, seed: int = 0, speed: float = 0.1, g: float = 1.0,
               gamma: float = 1.0, min_angle: float = 0.3) -> "RP2Configuration":
        rng = np.random.default_rng(seed)
        while True:
            q = rng.normal(size=(n, 3))
            q /= np.linalg.norm(q, axis=1)[:, None]
            if all(angle_between(q[i], q[j]) > min_angle for i in range(n) for j in range(i + 1, n)):
                break
        v = rng.normal(size=(n, 3))
        v -= np.einsum("ij,ij->i", v, q)[:, None] * q
        v *= speed
        v -= np.einsum("ij,ij->i", v, q)[:, None] * q
        return cls(q, v, g, gamma)

    def flipped(self, indices) -> "RP2Configuration":
        """Same RP^2 state with the representatives q_i -> -q_i (and v_i -> -v_i)."""
        q = self.points.copy()
        v = self.velocities.copy()
        q[list(indices)] *= -1.0
        v[list(indices)] *= -1.0
        return RP2Configuration(q, v, self.g, self.gamma)

    def potential_energy(self) -> float:
        return float(kernels.rp2_forces(self.points, self.g)[0])

    def kinetic_energy(self) -> float:
        return float(np.sum(self.velocities**2) / (2.0 * self.gamma))

    def energy(self) -> float:
        return self.kinetic_energy() + self.potential_energy()

    def to_record(self) -> dict:
        return {"points": self.points.tolist(), "velocities": self.velocities.tolist(),
                "g": float(self.g), "gamma": float(self.gamma)}

    @classmethod
    def from_record(cls, data: dict) -> "RP2Configuration":
        return cls(np.array(data["points"], dtype=float), np.array(data["velocities"], dtype=float),
                   float(data.get("g", 1.0)), float(data.get("gamma", 1.0)))


def nbody_forces(config: RP2Configuration) -> np.ndarray:
    """Tangential forces -grad sum V_ij projected on each tangent plane."""
    return kernels.rp2_forces(config.points, config.g)[1]


def max_frequency(config: RP2Configuration) -> float:
    """Fastest local time scale: angular speeds and pair stiffness."""
    q = config.points
    speed = float(np.max(np.linalg.norm(config.velocities, axis=1))) if config.n else 0.0
    stiff = np.zeros(config.n)
    for i in range(config.n):
        for j in range(config.n):
            if i != j:
                c = abs(float(q[i] @ q[j]))
                s = float(np.linalg.norm(np.cross(q[i], q[j])))
                stiff[i] += config.g * (1.0 + c * c) / s**3
    omega_pot = math.sqrt(config.gamma * stiff.max()) if config.n > 1 else 0.0
    return max(speed, omega_pot)


def guarded_dt(config: RP2Configuration, fraction: float = 0.01) -> float:
    """Step with dt * max_frequency equal to ``fraction`` (the guard requires < 0.1)."""
    w = max_frequency(config)
    return fraction / w if w > 0 else fraction


@dataclass
class SimulationResult:
    config: RP2Configuration
    energies: np.ndarray = field(repr=False)
    times: np.ndarray = field(repr=False)
    trajectory: np.ndarray = field(repr=False)
    traj_times: np.ndarray = field(repr=False)
    dt_final: float = 0.0
    rejections: int = 0

    @property
    def relative_drift(self) -> float:
        e0 = self.energies[0]
        return float(np.max(np.abs(self.energies - e0)) / max(abs(e0), 1e-300))


def simulate(config: RP2Configuration, dt: float, steps: int, order: int = 4,
             record_every: int = 1, reject_sin: float = 1e-3, abort_sin: float = 1e-6,
             mode: str = "hamiltonian") -> SimulationResult:
    """Advance the configuration by ``steps`` steps of size ``dt``.

    Hamiltonian mode uses a constrained (RATTLE) leapfrog, fourth order by
    default via a Yoshida composition.  A step bringing two points within
    ``reject_sin`` is rejected and retried with half the step (and half the
    threshold); below ``abort_sin`` a :class:`CollisionError` is raised.
    ``mode="gradient"`` runs the overdamped flow q' = gamma * F instead.
    """
    if steps < 0 or dt <= 0:
        raise ValueError("dt must be positive and steps nonnegative")
    w = max_frequency(config)
    if dt * w >= 0.1:
        raise ValueError(f"dt * max frequency = {dt * w:.3g} violates the 0.1 guard")
    if mode == "gradient":
        return _gradient_flow(config, dt, steps, record_every)
    if mode != "hamiltonian":
        raise ValueError(f"unknown mode {mode!r}")

    q, v = config.points.copy(), config.velocities.copy()
    energies, times, trajs, traj_times = [], [], [], []
    t, remaining, rejections = 0.0, steps, 0
    while True:
        qn, vn, en, tr, done, status, _ = kernels.rattle_run(
            q, v, config.g, config.gamma, dt, remaining, order, reject_sin, abort_sin, record_every)
        start = 0 if not energies else 1
        energies.append(en[start:])
        times.append(t + dt * np.arange(start, en.size))
        trajs.append(tr[start:])
        traj_times.append(t + dt * record_every * np.arange(start, tr.shape[0]))
        q, v, t = qn, vn, t + dt * done
        if status == kernels.STEP_OK:
            break
        if status == kernels.STEP_ABORT or reject_sin * 0.5 < abort_sin:
            raise CollisionError(f"pair sine fell below {abort_sin:g} at t={t:.6g}")
        rejections += 1
        remaining = 2 * (remaining - done)
        dt *= 0.5
        reject_sin *= 0.5
    final = RP2Configuration(q, v - np.einsum("ij,ij->i", v, q)[:, None] * q, config.g, config.gamma)
    return SimulationResult(final, np.concatenate(energies), np.concatenate(times),
                            np.concatenate(trajs), np.concatenate(traj_times), dt, rejections)


def _gradient_flow(config, dt, steps, record_every):
    q = config.points.copy()
    energies = np.empty(steps + 1)
    trajs = [q.copy()]
    pot, force, _ = kernels.rp2_forces(q, config.g)
    energies[0] = pot
    for k in range(steps):
        q = q + dt * config.gamma * force
        q /= np.linalg.norm(q, axis=1)[:, None]
        pot, force, min_sin = kernels.rp2_forces(q, config.g)
        if min_sin < 1e-6:
            raise CollisionError("pair sine fell below 1e-06 in gradient flow")
        energies[k + 1] = pot
        if (k + 1) % record_every == 0:
            trajs.append(q.copy())
    final = RP2Configuration(q, np.zeros_like(q), config.g, config.gamma)
    times = dt * np.arange(steps + 1)
    traj = np.array(trajs)
    return SimulationResult(final, energies, times, traj, dt * record_every * np.arange(traj.shape[0]), dt, 0)

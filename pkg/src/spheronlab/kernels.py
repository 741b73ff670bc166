"""Hot inner loops, each with a numba and a pure-numpy implementation.

The public entry points pick a backend per call through
:func:`spheronlab._accel.numba_enabled`.  Both backends implement the same
arithmetic in the same order where it matters for exactness tests (pair
loops run i < j, accumulations in index order).
"""
from __future__ import annotations

import numpy as np

from ._accel import njit, numba_enabled

# status codes returned by the stepping kernels
STEP_OK = 0
STEP_REJECT = 1
STEP_ABORT = 2

# Yoshida triple-jump weights for the fourth-order composition
_Y1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_Y0 = -(2.0 ** (1.0 / 3.0)) / (2.0 - 2.0 ** (1.0 / 3.0))


# --------------------------------------------------------------------------
# RP^2 pair potential g / sin(theta) and its tangential forces
# --------------------------------------------------------------------------

@njit
def _rp2_forces_nb(q, g):
    n = q.shape[0]
    grad = np.zeros((n, 3))
    pot = 0.0
    min_sin = np.inf
    for i in range(n):
        for j in range(i + 1, n):
            c = q[i, 0] * q[j, 0] + q[i, 1] * q[j, 1] + q[i, 2] * q[j, 2]
            cx = q[i, 1] * q[j, 2] - q[i, 2] * q[j, 1]
            cy = q[i, 2] * q[j, 0] - q[i, 0] * q[j, 2]
            cz = q[i, 0] * q[j, 1] - q[i, 1] * q[j, 0]
            s2 = cx * cx + cy * cy + cz * cz
            s = np.sqrt(s2)
            if s < min_sin:
                min_sin = s
            pot += g / s
            coef = g * c / (s2 * s)
            for k in range(3):
                grad[i, k] += coef * q[j, k]
                grad[j, k] += coef * q[i, k]
    force = np.empty((n, 3))
    for i in range(n):
        r = q[i, 0] * grad[i, 0] + q[i, 1] * grad[i, 1] + q[i, 2] * grad[i, 2]
        for k in range(3):
            force[i, k] = -(grad[i, k] - q[i, k] * r)
    return pot, force, min_sin


def _rp2_forces_np(q, g):
    n = q.shape[0]
    grad = np.zeros((n, 3))
    pot = 0.0
    min_sin = np.inf
    for i in range(n):
        qj = q[i + 1:]
        if qj.shape[0] == 0:
            continue
        c = qj @ q[i]
        cr = np.cross(q[i], qj)
        s2 = np.einsum("ij,ij->i", cr, cr)
        s = np.sqrt(s2)
        min_sin = min(min_sin, float(s.min()))
        for v in g / s:
            pot += v
        coef = g * c / (s2 * s)
        for jj in range(qj.shape[0]):
            grad[i] += coef[jj] * qj[jj]
            grad[i + 1 + jj] += coef[jj] * q[i]
    radial = np.einsum("ij,ij->i", q, grad)
    force = -(grad - q * radial[:, None])
    return pot, force, min_sin


def rp2_forces(q: np.ndarray, g: float):
    """Potential energy, tangential forces and smallest pair sine.

    ``q`` must hold unit representatives, shape (N, 3).
    """
    q = np.ascontiguousarray(q, dtype=np.float64)
    if numba_enabled():
        return _rp2_forces_nb(q, float(g))
    return _rp2_forces_np(q, float(g))


# --------------------------------------------------------------------------
# RATTLE (constrained leapfrog) on a product of unit spheres
# --------------------------------------------------------------------------

@njit
def _rattle_substep_nb(q, v, h, g, gamma, force):
    n = q.shape[0]
    for i in range(n):
        for k in range(3):
            v[i, k] += 0.5 * h * gamma * force[i, k]
        pq = 0.0
        pp = 0.0
        p = np.empty(3)
        for k in range(3):
            p[k] = q[i, k] + h * v[i, k]
            pq += p[k] * q[i, k]
            pp += p[k] * p[k]
        lam = pq - np.sqrt(pq * pq - pp + 1.0)
        for k in range(3):
            v[i, k] -= lam / h * q[i, k]
            q[i, k] = p[k] - lam * q[i, k]
    pot, force_new, min_sin = _rp2_forces_nb(q, g)
    for i in range(n):
        r = 0.0
        for k in range(3):
            v[i, k] += 0.5 * h * gamma * force_new[i, k]
            r += v[i, k] * q[i, k]
        for k in range(3):
            v[i, k] -= r * q[i, k]
    return pot, force_new, min_sin


@njit
def _rattle_run_nb(q, v, g, gamma, dt, steps, order, reject_sin, abort_sin,
                   record_every):
    n = q.shape[0]
    q = q.copy()
    v = v.copy()
    energies = np.empty(steps + 1)
    n_rec = steps // record_every + 1
    traj = np.empty((n_rec, n, 3))
    pot, force, min_sin = _rp2_forces_nb(q, g)
    kin = 0.0
    for i in range(n):
        for k in range(3):
            kin += v[i, k] * v[i, k]
    energies[0] = 0.5 * kin / gamma + pot
    traj[0] = q
    if order == 4:
        weights = np.array([_Y1, _Y0, _Y1])
    else:
        weights = np.array([1.0])
    for step in range(steps):
        q_old = q.copy()
        v_old = v.copy()
        f_old = force.copy()
        for w in weights:
            pot, force, min_sin = _rattle_substep_nb(q, v, w * dt, g, gamma, force)
        if min_sin < reject_sin:
            status = STEP_ABORT if min_sin < abort_sin else STEP_REJECT
            return q_old, v_old, energies[:step + 1], traj[:step // record_every + 1], step, status, f_old
        kin = 0.0
        for i in range(n):
            for k in range(3):
                kin += v[i, k] * v[i, k]
        energies[step + 1] = 0.5 * kin / gamma + pot
        if (step + 1) % record_every == 0:
            traj[(step + 1) // record_every] = q
    return q, v, energies, traj, steps, STEP_OK, force


def _rattle_substep_np(q, v, h, g, gamma, force):
    v += 0.5 * h * gamma * force
    p = q + h * v
    pq = np.einsum("ij,ij->i", p, q)
    pp = np.einsum("ij,ij->i", p, p)
    lam = pq - np.sqrt(pq * pq - pp + 1.0)
    v -= (lam / h)[:, None] * q
    q[:] = p - lam[:, None] * q
    pot, force_new, min_sin = _rp2_forces_np(q, g)
    v += 0.5 * h * gamma * force_new
    r = np.einsum("ij,ij->i", v, q)
    v -= r[:, None] * q
    return pot, force_new, min_sin


def _rattle_run_np(q, v, g, gamma, dt, steps, order, reject_sin, abort_sin,
                   record_every):
    q = q.copy()
    v = v.copy()
    energies = np.empty(steps + 1)
    traj = np.empty((steps // record_every + 1,) + q.shape)
    pot, force, _ = _rp2_forces_np(q, g)
    energies[0] = 0.5 * np.sum(v * v) / gamma + pot
    traj[0] = q
    weights = (_Y1, _Y0, _Y1) if order == 4 else (1.0,)
    for step in range(steps):
        q_old, v_old, f_old = q.copy(), v.copy(), force.copy()
        for w in weights:
            pot, force, min_sin = _rattle_substep_np(q, v, w * dt, g, gamma, force)
        if min_sin < reject_sin:
            status = STEP_ABORT if min_sin < abort_sin else STEP_REJECT
            return q_old, v_old, energies[:step + 1], traj[:step // record_every + 1], step, status, f_old
        energies[step + 1] = 0.5 * np.sum(v * v) / gamma + pot
        if (step + 1) % record_every == 0:
            traj[(step + 1) // record_every] = q
    return q, v, energies, traj, steps, STEP_OK, force


def rattle_run(q, v, g, gamma, dt, steps, order=2, reject_sin=1e-3,
               abort_sin=1e-6, record_every=1):
    """Run ``steps`` constrained leapfrog steps.

    Returns ``(q, v, energies, trajectory, steps_done, status, force)``.  On a
    non-OK status the returned state is the one *before* the offending step.
    """
    if order not in (2, 4):
        raise ValueError("order must be 2 or 4")
    args = (np.ascontiguousarray(q, dtype=np.float64),
            np.ascontiguousarray(v, dtype=np.float64),
            float(g), float(gamma), float(dt), int(steps), int(order),
            float(reject_sin), float(abort_sin), int(record_every))
    if numba_enabled():
        return _rattle_run_nb(*args)
    return _rattle_run_np(*args)


# --------------------------------------------------------------------------
# Pairing energy functional on a batch of occupation vectors
# --------------------------------------------------------------------------

@njit
def _pairing_energy_batch_nb(t, eps, W):
    m, n = t.shape
    out = np.empty(m)
    for a in range(m):
        kin = 0.0
        s = 0.0
        for l in range(n):
            x2 = t[a, l]
            kin += 2.0 * eps[l] * x2
            p = x2 * (1.0 - x2)
            if p > 0.0:
                s += np.sqrt(p)
        out[a] = kin - W * s * s
    return out


def _pairing_energy_batch_np(t, eps, W):
    s = np.sqrt(np.clip(t * (1.0 - t), 0.0, None)).sum(axis=1)
    return 2.0 * (t @ eps) - W * s * s


def pairing_energy_batch(t: np.ndarray, eps: np.ndarray, W: float) -> np.ndarray:
    """Pairing energy for each row of occupation probabilities ``t`` (= x^2)."""
    t = np.ascontiguousarray(np.atleast_2d(t), dtype=np.float64)
    eps = np.ascontiguousarray(eps, dtype=np.float64)
    if numba_enabled():
        return _pairing_energy_batch_nb(t, eps, float(W))
    return _pairing_energy_batch_np(t, eps, float(W))

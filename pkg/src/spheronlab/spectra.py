"""Density-oscillation eigenproblem on the sphere.

The latitude profile f(psi) of a zonal density wave satisfies

    d/dpsi (cos psi f') - U f / cos psi = -alpha cos psi f,   f(+-pi/2) = 0,

a regular-weight Sturm-Liouville problem whose eigenfunctions are
P_l^m(sin psi) with alpha = l(l+1) whenever U = m^2.  The same problem
describes azimuthal travelling waves of a tensioned spherical membrane
(U = n^2 beta, alpha = 2 n^2 R kappa^2), which is what :func:`dispersion`
solves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.linalg import LinAlgError, eigh_tridiagonal

MIN_NODES = 16


class SpectrumError(RuntimeError):
    """Eigensolver failure; carries the residual norm that triggered it."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual norm {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class PsiGrid:
    """Uniform latitude grid on [-pi/2, pi/2], endpoints included."""

    node_count: int

    def __post_init__(self):
        if int(self.node_count) != self.node_count or self.node_count < MIN_NODES:
            raise ValueError(f"node_count must be an integer >= {MIN_NODES}, got {self.node_count}")

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(-0.5 * np.pi, 0.5 * np.pi, self.node_count)

    @property
    def spacing(self) -> float:
        return np.pi / (self.node_count - 1)


@dataclass(frozen=True)
class SpectralProblem:
    U: float
    grid: PsiGrid

    def __post_init__(self):
        # U = 0 has no pole-regular solutions vanishing at the poles
        if not self.U > 0:
            raise ValueError(f"U must be positive, got {self.U}")


@dataclass(frozen=True)
class Mode:
    """One eigenpair; ``samples`` are normalised to unit cos-weighted norm."""

    l: int
    eigenvalue: float
    samples: np.ndarray = field(repr=False)
    parity: str
    index: int = 0

    def to_record(self) -> dict:
        return {
            "l_index": int(self.l),
            "eigenvalue": float(self.eigenvalue),
            "parity": self.parity,
            "samples": [float(s) for s in self.samples],
        }


def _azimuthal_order(U: float) -> int | None:
    m = round(math.sqrt(U))
    return m if m >= 1 and abs(m * m - U) <= 1e-12 * max(1.0, U) else None


def _tridiagonal(problem: SpectralProblem):
    """Interior-node diagonals of the stiffness matrix and the weight."""
    psi = problem.grid.nodes
    h = problem.grid.spacing
    p_mid = np.cos(0.5 * (psi[1:] + psi[:-1]))
    cos_in = np.cos(psi[1:-1])
    diag = (p_mid[:-1] + p_mid[1:]) / h**2 + problem.U / cos_in
    off = -p_mid[1:-1] / h**2
    return diag, off, cos_in


def assemble_operator(problem: SpectralProblem):
    """Return ``(stiffness, weight)`` as sparse symmetric matrices.

    The stiffness is the centred divergence-form discretisation of
    ``-(cos psi f')' + U f / cos psi`` on interior nodes (Dirichlet rows
    eliminated); the weight is ``diag(cos psi_i)``.  The generalised problem
    ``stiffness f = alpha weight f`` carries the spectrum.
    """
    diag, off, w = _tridiagonal(problem)
    stiffness = sp.diags([off, diag, off], [-1, 0, 1], format="csr")
    weight = sp.diags(w, 0, format="csr")
    return stiffness, weight


def _parity(samples: np.ndarray) -> str:
    mirror = samples[::-1]
    scale = np.max(np.abs(samples))
    if np.max(np.abs(samples - mirror)) <= 1e-6 * scale:
        return "even"
    if np.max(np.abs(samples + mirror)) <= 1e-6 * scale:
        return "odd"
    return "none"


def _fix_sign(samples: np.ndarray) -> np.ndarray:
    # first sample above 1e-6 of the peak is made positive
    k = int(np.argmax(np.abs(samples) > 1e-6 * np.max(np.abs(samples))))
    return samples if samples[k] > 0 else -samples


def solve_spectrum(problem: SpectralProblem, count: int) -> list[Mode]:
    """Lowest ``count`` eigenpairs on the problem grid, ascending."""
    n = problem.grid.node_count
    if count < 1 or count > n // 4:
        raise ValueError(f"count must lie in [1, {n // 4}] for {n} nodes, got {count}")
    diag, off, w = _tridiagonal(problem)
    s = 1.0 / np.sqrt(w)
    try:
        alpha, phi = eigh_tridiagonal(diag * s * s, off * s[:-1] * s[1:],
                                      select="i", select_range=(0, count - 1))
    except LinAlgError as exc:
        raise SpectrumError(f"tridiagonal eigensolver failed: {exc}", float("inf")) from exc

    f_in = phi * s[:, None]
    # K f - alpha W f, relative to the stiffness scale
    kf = diag[:, None] * f_in
    kf[:-1] += off[:, None] * f_in[1:]
    kf[1:] += off[:, None] * f_in[:-1]
    resid = np.linalg.norm(kf - alpha[None, :] * w[:, None] * f_in, axis=0)
    scale = np.abs(diag).max() * np.linalg.norm(f_in, axis=0)
    worst = float(np.max(resid / scale))
    if not np.all(np.isfinite(alpha)) or worst > 1e-10:
        raise SpectrumError("eigenpairs failed the residual check", worst)

    h = problem.grid.spacing
    m = _azimuthal_order(problem.U)
    modes = []
    for k in range(count):
        samples = np.zeros(n)
        samples[1:-1] = f_in[:, k] / math.sqrt(h)
        samples = _fix_sign(samples)
        degree = (m + k) if m is not None else k + 1
        modes.append(Mode(l=degree, eigenvalue=float(alpha[k]), samples=samples,
                          parity=_parity(samples), index=k))
    return modes


def weighted_inner_product(f, g, grid: PsiGrid) -> float:
    """Trapezoidal approximation of the cos-weighted inner product."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != (grid.node_count,) or g.shape != (grid.node_count,):
        raise ValueError(f"samples must have length {grid.node_count}, got {f.shape} and {g.shape}")
    return float(np.trapezoid(f * g * np.cos(grid.nodes), dx=grid.spacing))


def gram_matrix(modes: Sequence[Mode], grid: PsiGrid) -> np.ndarray:
    k = len(modes)
    out = np.empty((k, k))
    for i in range(k):
        for j in range(k):
            out[i, j] = weighted_inner_product(modes[i].samples, modes[j].samples, grid)
    return out


def refined_eigenvalues(U: float, count: int, node_count: int = 1000) -> np.ndarray:
    """Two-grid Richardson extrapolation with ``node_count`` and ``2*node_count`` nodes.

    The scheme is second order, so the extrapolant uses the actual spacing
    ratio of the two grids.
    """
    coarse, fine = PsiGrid(node_count), PsiGrid(2 * node_count)
    a_c = np.array([m.eigenvalue for m in solve_spectrum(SpectralProblem(U, coarse), count)])
    a_f = np.array([m.eigenvalue for m in solve_spectrum(SpectralProblem(U, fine), count)])
    ratio = (coarse.spacing / fine.spacing) ** 2
    return a_f + (a_f - a_c) / (ratio - 1.0)


def refined_spectrum(U: float, count: int, node_count: int = 1000) -> list[Mode]:
    """Modes on the ``node_count`` grid carrying Richardson-refined eigenvalues."""
    modes = solve_spectrum(SpectralProblem(U, PsiGrid(node_count)), count)
    alpha = refined_eigenvalues(U, count, node_count)
    return [Mode(l=m.l, eigenvalue=float(a), samples=m.samples, parity=m.parity, index=m.index)
            for m, a in zip(modes, alpha)]


def dispersion(n: int, beta: float, R: float, mode_index: int = 0,
               node_count: int = 1000) -> float:
    """Angular speed of the travelling wave exp(i n (phi - kappa t)).

    Solves the latitude problem with U = n^2 beta and returns
    kappa = sqrt(alpha / (2 n^2 R)) for the selected eigenvalue.
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    if beta <= 0 or R <= 0:
        raise ValueError("beta and R must be positive")
    alpha = refined_eigenvalues(n * n * beta, mode_index + 1, node_count)[mode_index]
    return math.sqrt(alpha / (2.0 * n * n * R))


def modes_to_rows(modes: Sequence[Mode], grid: PsiGrid) -> tuple[list[str], list[list[float]]]:
    """CSV layout: one row per grid node, one column per mode."""
    header = ["psi"] + [f"f{m.index}" for m in modes]
    rows = [[float(p)] + [float(m.samples[i]) for m in modes] for i, p in enumerate(grid.nodes)]
    return header, rows

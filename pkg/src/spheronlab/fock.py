"""Truncated Fock-space operators for the spheron and quasi-particle fields."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
import sympy

SPHERON = "spheron"
QUASI = "quasiparticle"
ENERGY_TOL = 1e-9


@dataclass(frozen=True)
class LadderAlgebra:
    """Raising and lowering matrices on occupations 0..n_max.

    Column n is the basis vector e_n, so ``raising @ e_n = sqrt(n+1) e_{n+1}``
    (zero for n = n_max) and ``lowering @ e_n = sqrt(n) e_{n-1}``.
    """

    n_max: int
    raising: np.ndarray = field(repr=False)
    lowering: np.ndarray = field(repr=False)

    def commutator(self) -> np.ndarray:
        """[lowering, raising] in floating point."""
        return self.lowering @ self.raising - self.raising @ self.lowering

    def exact(self):
        """Sympy matrices ``(raising, lowering)`` with exact square-root entries."""
        n = self.n_max + 1
        up = sympy.zeros(n, n)
        down = sympy.zeros(n, n)
        for k in range(self.n_max):
            up[k + 1, k] = sympy.sqrt(k + 1)
            down[k, k + 1] = sympy.sqrt(k + 1)
        return up, down

    def exact_commutator(self):
        up, down = self.exact()
        return (down * up - up * down).applyfunc(sympy.nsimplify)

    def basis(self, n: int) -> np.ndarray:
        e = np.zeros(self.n_max + 1)
        e[n] = 1.0
        return e


def ladder_matrices(n_max: int) -> LadderAlgebra:
    if int(n_max) != n_max or n_max < 1:
        raise ValueError(f"n_max must be an integer >= 1, got {n_max}")
    n_max = int(n_max)
    amp = np.sqrt(np.arange(1, n_max + 1, dtype=float))
    up = np.diag(amp, -1)
    down = np.diag(amp, 1)
    up.setflags(write=False)
    down.setflags(write=False)
    return LadderAlgebra(n_max, up, down)


def truncated_ccr(n_max: int) -> np.ndarray:
    """Closed form of [a-, a+] on the truncated space: I - (n_max+1) E_{n_max,n_max}."""
    out = np.eye(n_max + 1)
    out[n_max, n_max] -= n_max + 1
    return out


def number_operator(alg: LadderAlgebra) -> np.ndarray:
    """diag(0, 1, ..., n_max), the exact value of raising @ lowering."""
    return np.diag(np.arange(alg.n_max + 1, dtype=float))


def oscillator_spectrum(frequency: float, n_max: int) -> np.ndarray:
    """Energies (n + 1/2) * frequency for n = 0..n_max."""
    if frequency < 0:
        raise ValueError("frequency must be nonnegative")
    return (np.arange(n_max + 1) + 0.5) * frequency


@dataclass(frozen=True)
class ModeIndex:
    """A single oscillator of the spheron or quasi-particle field.

    Spherons carry an even degree ``l`` and frequency sqrt(l(l+1)); a
    quasi-particle mode carries the supplied eigenvalue ``sigma`` and
    frequency sqrt(sigma).
    """

    kind: str
    m: int
    l: int
    sigma: float | None = None

    def __post_init__(self):
        if self.kind == SPHERON:
            if self.l < 0 or self.l % 2:
                raise ValueError(f"spheron degree must be even and >= 0, got {self.l}")
            if self.sigma is not None:
                raise ValueError("spheron modes take their frequency from the degree")
        elif self.kind == QUASI:
            if self.sigma is None or self.sigma < 0:
                raise ValueError("quasi-particle modes need sigma >= 0")
        else:
            raise ValueError(f"unknown mode kind {self.kind!r}")
        if abs(self.m) > self.l:
            raise ValueError(f"|m| must not exceed l, got m={self.m}, l={self.l}")

    @property
    def frequency(self) -> float:
        if self.kind == SPHERON:
            return math.sqrt(self.l * (self.l + 1))
        return math.sqrt(self.sigma)


def spheron_modes(degrees: Iterable[int]) -> list[ModeIndex]:
    """All (m, l) spheron modes of the listed even degrees."""
    return [ModeIndex(SPHERON, m, l) for l in degrees for m in range(-l, l + 1)]


def field_hamiltonian(modes: Sequence[ModeIndex],
                      occupations: Mapping[ModeIndex, int] | None = None) -> float:
    """Sum of frequency * (n + 1/2) over ``modes``; absent occupations are 0."""
    occupations = dict(occupations or {})
    listed = set(modes)
    for mode, n in occupations.items():
        if mode not in listed:
            raise ValueError(f"occupation given for unlisted mode {mode}")
        if int(n) != n or n < 0:
            raise ValueError(f"occupation of {mode} must be a nonnegative integer")
    return float(sum(mode.frequency * (occupations.get(mode, 0) + 0.5) for mode in modes))


def product_energies(freq_a: float, freq_b: float, n_max: int) -> np.ndarray:
    """Unperturbed energies on the |n_a, n_b> product basis (index n_a*(n_max+1) + n_b)."""
    e = np.arange(n_max + 1) + 0.5
    return (freq_a * e[:, None] + freq_b * e[None, :]).ravel()


def interaction_matrix(modes: Sequence[ModeIndex], n_max: int, W: float,
                       n_max_b: int | None = None) -> np.ndarray:
    """Switch-back exchange between two modes on the (n_max+1)^2 product space.

    The transfer term T = -W a+ (x) A- moves one quantum from the second
    mode to the first; only transitions between states of equal unperturbed
    energy survive.  The Hermitian operator returned is T + T^T.
    """
    if len(modes) != 2:
        raise ValueError("exactly two modes are required")
    a, b = modes
    if a == b:
        raise ValueError("the two modes must be distinct")
    if n_max_b is not None and n_max_b != n_max:
        raise ValueError(f"truncations differ: {n_max} vs {n_max_b}")
    if W < 0:
        raise ValueError("W must be nonnegative")
    alg = ladder_matrices(n_max)
    transfer = np.kron(alg.raising, alg.lowering)
    energy = product_energies(a.frequency, b.frequency, n_max)
    same = np.abs(energy[:, None] - energy[None, :]) <= ENERGY_TOL
    T = -W * np.where(same, transfer, 0.0)
    return T + T.T


def energy_projectors(modes: Sequence[ModeIndex], n_max: int):
    """Spectral projectors of the unperturbed Hamiltonian on the product space."""
    energy = product_energies(modes[0].frequency, modes[1].frequency, n_max)
    levels = []
    for e in np.sort(energy):
        if not levels or e - levels[-1] > ENERGY_TOL:
            levels.append(e)
    return [np.diag((np.abs(energy - e) <= ENERGY_TOL).astype(float)) for e in levels]


# --------------------------------------------------------------------------
# block operators
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BlockOperator:
    """[[diag(b), -W I], [-W I, diag(b)]]."""

    diagonal: np.ndarray
    W: float

    def __post_init__(self):
        b = np.array(self.diagonal, dtype=float).ravel()
        if b.size == 0 or not np.all(np.isfinite(b)):
            raise ValueError("diagonal must be a nonempty finite sequence")
        if self.W < 0:
            raise ValueError("W must be nonnegative")
        b.setflags(write=False)
        object.__setattr__(self, "diagonal", b)

    @property
    def size(self) -> int:
        return self.diagonal.size

    def assemble(self) -> np.ndarray:
        n = self.size
        H = np.zeros((2 * n, 2 * n))
        H[:n, :n] = np.diag(self.diagonal)
        H[n:, n:] = np.diag(self.diagonal)
        H[:n, n:] = -self.W * np.eye(n)
        H[n:, :n] = -self.W * np.eye(n)
        return H


def block_spectrum(op: BlockOperator) -> np.ndarray:
    """Sorted multiset {b_k - W} U {b_k + W}."""
    return np.sort(np.concatenate([op.diagonal - op.W, op.diagonal + op.W]))


def polarization_basis(n: int) -> np.ndarray:
    """Orthogonal basis of K1 = {(x, x)} followed by K2 = {(x, -x)}."""
    I = np.eye(n)
    return np.block([[I, I], [I, -I]]) / math.sqrt(2.0)


def polarize(op: BlockOperator):
    """Diagonals of B1 + B2 and B1 - B2, with B1 = diag(b), B2 = -W I."""
    return op.diagonal - op.W, op.diagonal + op.W


def polarization_defect(op: BlockOperator) -> float:
    """Max deviation of P^T H P from block-diag(B1 + B2, B1 - B2)."""
    P = polarization_basis(op.size)
    plus, minus = polarize(op)
    target = np.diag(np.concatenate([plus, minus]))
    return float(np.abs(P.T @ op.assemble() @ P - target).max())


def commuting_block_spectrum(b1, b2, basis: np.ndarray | None = None):
    """Spectrum of [[B1, B2], [B2, B1]] for B1, B2 diagonal in a common basis.

    ``b1`` and ``b2`` are the eigenvalues of B1 and B2 in that basis, given
    by the orthogonal columns of ``basis`` (identity if omitted).  Returns
    ``(eigenvalues, matrix)``, eigenvalues sorted.
    """
    b1 = np.asarray(b1, dtype=float)
    b2 = np.asarray(b2, dtype=float)
    if b1.shape != b2.shape:
        raise ValueError("b1 and b2 must have the same length")
    U = np.eye(b1.size) if basis is None else np.asarray(basis, dtype=float)
    if np.abs(U.T @ U - np.eye(b1.size)).max() > 1e-12:
        raise ValueError("basis must be orthogonal")
    B1 = U @ np.diag(b1) @ U.T
    B2 = U @ np.diag(b2) @ U.T
    H = np.block([[B1, B2], [B2, B1]])
    return np.sort(np.concatenate([b1 + b2, b1 - b2])), H


def to_triplets(matrix: np.ndarray, tol: float = 0.0) -> list[dict]:
    """Nonzero entries as {row, col, value} records in row-major order."""
    rows, cols = np.nonzero(np.abs(matrix) > tol)
    return [{"row": int(r), "col": int(c), "value": float(matrix[r, c])} for r, c in zip(rows, cols)]


def from_triplets(records: Sequence[Mapping], shape) -> np.ndarray:
    out = np.zeros(shape)
    for rec in records:
        out[int(rec["row"]), int(rec["col"])] = float(rec["value"])
    return out

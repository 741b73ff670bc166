"""Radial vibrations of a tensioned spherical film.

Fields live on a (psi, phi) grid stored as arrays of shape (n_psi, n_phi),
psi the latitude and phi the longitude.  Derivatives use the double-Fourier
sphere: a field is continued across the poles by F(phi + pi, pi - psi) and
differentiated spectrally in both angles, so band-limited fields are
differentiated to rounding error.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import sph_harm_y

MIN_GRID = 8


class AliasingWarning(UserWarning):
    """Input carries power above the requested truncation degree."""


# --------------------------------------------------------------------------
# grids and spectral derivatives
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SphereGrid:
    """Tensor grid in latitude and longitude.

    ``kind="uniform"`` includes both poles and supports the spectral
    derivatives; ``kind="gauss"`` uses Gauss-Legendre nodes in sin(psi) and
    supports exact modal quadrature.
    """

    n_phi: int
    n_psi: int
    kind: str = "uniform"

    def __post_init__(self):
        if self.n_phi < MIN_GRID or self.n_psi < MIN_GRID:
            raise ValueError(f"grid must be at least {MIN_GRID}x{MIN_GRID}, got {self.n_psi}x{self.n_phi}")
        if self.kind not in ("uniform", "gauss"):
            raise ValueError(f"unknown grid kind {self.kind!r}")
        if self.kind == "uniform" and self.n_phi % 2:
            raise ValueError("uniform grids need an even n_phi (pole continuation shifts by pi)")

    @classmethod
    def for_degree(cls, l_max: int, oversample: int = 2) -> "SphereGrid":
        """Gauss grid able to resolve (and alias-check) degree ``l_max``."""
        n_psi = max(MIN_GRID, oversample * (l_max + 1))
        return cls(n_phi=max(MIN_GRID, 2 * n_psi), n_psi=n_psi, kind="gauss")

    @property
    def phi(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_phi) / self.n_phi

    @property
    def psi(self) -> np.ndarray:
        if self.kind == "uniform":
            return np.linspace(-0.5 * np.pi, 0.5 * np.pi, self.n_psi)
        x, _ = np.polynomial.legendre.leggauss(self.n_psi)
        return np.arcsin(x)

    @property
    def gauss_weights(self) -> np.ndarray:
        if self.kind != "gauss":
            raise ValueError("quadrature weights exist only on gauss grids")
        return np.polynomial.legendre.leggauss(self.n_psi)[1]

    def mesh(self):
        """``(PSI, PHI)`` arrays of shape (n_psi, n_phi)."""
        return np.meshgrid(self.psi, self.phi, indexing="ij")

    @property
    def max_degree(self) -> int:
        return min(self.n_psi - 1, (self.n_phi - 1) // 2)


def _spectral(f: np.ndarray, order: int, axis: int) -> np.ndarray:
    n = f.shape[axis]
    k = np.fft.fftfreq(n, d=1.0 / n)
    if order % 2 == 1 and n % 2 == 0:
        k[n // 2] = 0.0
    shape = [1] * f.ndim
    shape[axis] = n
    mult = ((1j * k) ** order).reshape(shape)
    out = np.fft.ifft(np.fft.fft(f, axis=axis) * mult, axis=axis)
    return out.real if np.isrealobj(f) else out


def _continue(f: np.ndarray, sign: float) -> np.ndarray:
    """Periodic continuation in psi over the poles (length 2 (n_psi - 1))."""
    n_phi = f.shape[-1]
    back = np.roll(f[..., -2:0:-1, :], n_phi // 2, axis=-1)
    return np.concatenate([f, sign * back], axis=-2)


def d_phi(f: np.ndarray, order: int = 1) -> np.ndarray:
    return _spectral(f, order, axis=-1)


def d_psi(f: np.ndarray, order: int = 1, sign: float = 1.0) -> np.ndarray:
    """Latitude derivative; ``sign`` is the field's parity under the pole continuation."""
    n_psi = f.shape[-2]
    return _spectral(_continue(f, sign), order, axis=-2)[..., :n_psi, :]


def laplace_beltrami(u: np.ndarray, grid: SphereGrid) -> np.ndarray:
    """Unit-sphere Laplace-Beltrami operator on a uniform grid."""
    psi = grid.psi[:, None]
    u_pp = d_psi(u, 2)
    out = np.empty_like(u_pp)
    inner = slice(1, -1)
    c = np.cos(psi[inner])
    out[inner] = (-np.tan(psi[inner]) * d_psi(u)[inner] + u_pp[inner]
                  + d_phi(u, 2)[inner] / c**2)
    # at a pole the Laplacian is the sum of two orthogonal geodesic second
    # derivatives, i.e. twice the meridional mean
    for row in (0, -1):
        out[row] = 2.0 * u_pp[row].mean()
    return out


# --------------------------------------------------------------------------
# mean curvature of the displaced sphere
# --------------------------------------------------------------------------

def frame(grid: SphereGrid):
    """Moving frame (r, k, l) as arrays of shape (3, n_psi, n_phi)."""
    PSI, PHI = grid.mesh()
    cp, sp_, cf, sf = np.cos(PSI), np.sin(PSI), np.cos(PHI), np.sin(PHI)
    r = np.array([cp * cf, cp * sf, sp_])
    k = np.array([-sf, cf, np.zeros_like(cf)])
    l = np.array([-sp_ * cf, -sp_ * sf, cp])
    return r, k, l


@dataclass(frozen=True)
class DisplacementField:
    """Displacement R*Pi with Pi = u r + v k + w l on a uniform grid."""

    R: float
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    grid: SphereGrid

    def __post_init__(self):
        if self.grid.kind != "uniform":
            raise ValueError("displacement fields need a uniform grid (poles included)")
        shape = (self.grid.n_psi, self.grid.n_phi)
        for name in ("u", "v", "w"):
            if np.shape(getattr(self, name)) != shape:
                raise ValueError(f"{name} must have shape {shape}")
        if self.R <= 0:
            raise ValueError("R must be positive")
        u = np.asarray(self.u)
        for row in (0, -1):
            if np.ptp(u[row]) > 1e-10:
                raise ValueError("u must be single-valued at the poles")

    @classmethod
    def zeros(cls, R: float, grid: SphereGrid) -> "DisplacementField":
        z = np.zeros((grid.n_psi, grid.n_phi))
        return cls(R, z, z.copy(), z.copy(), grid)

    def cartesian(self) -> np.ndarray:
        r, k, l = frame(self.grid)
        return self.u * r + self.v * k + self.w * l


def _dot(a, b):
    return np.einsum("i...,i...->...", a, b)


def linearized_mean_curvature(field: DisplacementField) -> np.ndarray:
    """Mean curvature to first order in the displacement.

    Interior rows evaluate the frame-projected expression directly; pole
    rows use its limit -1 + u + (1/2) Laplacian(u), where the tangential
    parts cancel identically.
    """
    grid = field.grid
    pi_ = field.cartesian()
    r, k, l = frame(grid)
    psi = grid.psi[:, None]

    p_psi = d_psi(pi_)
    p_psipsi = d_psi(pi_, 2)
    p_phi = d_phi(pi_)
    p_phiphi = d_phi(pi_, 2)

    K = np.empty((grid.n_psi, grid.n_phi))
    s = slice(1, -1)
    c = np.cos(psi[s])
    K[s] = (-1.0
            - 0.5 * np.tan(psi[s]) * _dot(r, p_psi)[s]
            + _dot(r, p_phiphi)[s] / (2.0 * c**2)
            + 0.5 * _dot(r, p_psipsi)[s]
            + _dot(l, p_psi)[s]
            + _dot(k, p_phi)[s] / c)
    u = np.asarray(field.u, dtype=float)
    u_pp = d_psi(u, 2)
    for row in (0, -1):
        K[row] = -1.0 + u[row].mean() + u_pp[row].mean()
    return K / field.R


def exact_mean_curvature(field: DisplacementField) -> np.ndarray:
    """Mean curvature of the embedded surface R (r + Pi), no linearisation.

    Uses the same sign convention (-1/R on the undisplaced sphere).  The
    (phi, psi) chart degenerates at the poles, where NaN is returned.
    """
    grid = field.grid
    r, _, _ = frame(grid)
    X = field.R * (r + field.cartesian())
    X_f, X_p = d_phi(X), d_psi(X)
    X_ff, X_pp, X_fp = d_phi(X, 2), d_psi(X, 2), d_psi(d_phi(X))
    E, F, G = _dot(X_f, X_f), _dot(X_f, X_p), _dot(X_p, X_p)
    n = np.cross(X_f, X_p, axis=0)
    n = n / np.sqrt(_dot(n, n))
    L, M, N = _dot(X_ff, n), _dot(X_fp, n), _dot(X_pp, n)
    with np.errstate(divide="ignore", invalid="ignore"):
        K = (E * N - 2.0 * F * M + G * L) / (2.0 * (E * G - F * F))
    K[0] = np.nan
    K[-1] = np.nan
    return K


def wave_rhs(u: np.ndarray, grid: SphereGrid, beta: float, R: float) -> np.ndarray:
    """Right-hand side of the radial wave equation: (beta / 2R) Laplacian(u)."""
    return beta / (2.0 * R) * laplace_beltrami(u, grid)


# --------------------------------------------------------------------------
# modal representation
# --------------------------------------------------------------------------

def lm_index(l: int, m: int) -> int:
    return l * l + l + m


def degrees(l_max: int) -> np.ndarray:
    """Degree of each packed (l, m) slot."""
    return np.concatenate([np.full(2 * l + 1, l) for l in range(l_max + 1)])


def orders(l_max: int) -> np.ndarray:
    return np.concatenate([np.arange(-l, l + 1) for l in range(l_max + 1)])


def frequencies(l_max: int, beta: float | None = None, R: float | None = None) -> np.ndarray:
    """omega_l per packed slot; canonical normalisation beta = 2R unless both given."""
    ll = degrees(l_max).astype(float)
    scale = 1.0 if beta is None or R is None else beta / (2.0 * R)
    return np.sqrt(ll * (ll + 1.0) * scale)


@dataclass(frozen=True)
class ModalState:
    """Displacement and velocity amplitudes per (l, m), packed by l*l + l + m."""

    l_max: int
    displacement: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        n = (self.l_max + 1) ** 2
        for name in ("displacement", "velocity"):
            arr = np.array(getattr(self, name), dtype=complex)
            if arr.shape != (n,):
                raise ValueError(f"{name} must have {n} entries for l_max={self.l_max}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be finite")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def zeros(cls, l_max: int) -> "ModalState":
        n = (l_max + 1) ** 2
        return cls(l_max, np.zeros(n, complex), np.zeros(n, complex))

    @classmethod
    def from_dict(cls, l_max: int, coefficients: dict) -> "ModalState":
        """Build from ``{(l, m): (u, u_dot)}``."""
        n = (l_max + 1) ** 2
        disp, vel = np.zeros(n, complex), np.zeros(n, complex)
        for (l, m), (a, b) in coefficients.items():
            if not (0 <= l <= l_max and abs(m) <= l):
                raise ValueError(f"mode ({l}, {m}) outside l_max={l_max}")
            disp[lm_index(l, m)] = a
            vel[lm_index(l, m)] = b
        return cls(l_max, disp, vel)

    def as_dict(self) -> dict:
        return {(int(l), int(m)): (self.displacement[i], self.velocity[i])
                for i, (l, m) in enumerate(zip(degrees(self.l_max), orders(self.l_max)))}

    def coefficient(self, l: int, m: int):
        i = lm_index(l, m)
        return self.displacement[i], self.velocity[i]

    def energy(self, beta: float | None = None, R: float | None = None) -> float:
        om2 = frequencies(self.l_max, beta, R) ** 2
        return float(np.sum(np.abs(self.velocity) ** 2 + om2 * np.abs(self.displacement) ** 2))

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.displacement) ** 2 + np.abs(self.velocity) ** 2)))

    def to_records(self) -> dict:
        def rows(arr):
            return [{"l": int(l), "m": int(m), "re": float(a.real), "im": float(a.imag)}
                    for l, m, a in zip(degrees(self.l_max), orders(self.l_max), arr)]

        return {"l_max": int(self.l_max), "displacement": rows(self.displacement),
                "velocity": rows(self.velocity)}

    @classmethod
    def from_records(cls, data: dict) -> "ModalState":
        l_max = int(data["l_max"])
        coeffs = {}
        for key, slot in (("displacement", 0), ("velocity", 1)):
            for row in data.get(key, []):
                lm = (int(row["l"]), int(row["m"]))
                pair = list(coeffs.get(lm, (0j, 0j)))
                pair[slot] = complex(row["re"], row["im"])
                coeffs[lm] = tuple(pair)
        return cls.from_dict(l_max, coeffs)


def evolve_membrane(state: ModalState, t: float, beta: float | None = None,
                    R: float | None = None) -> ModalState:
    """Advance every mode exactly in closed form.

    l >= 1 modes rotate in phase space at omega_l; the l = 0 mode has no
    restoring force and drifts linearly.
    """
    om = frequencies(state.l_max, beta, R)
    u0, v0 = state.displacement, state.velocity
    u, v = u0 + v0 * t, v0.copy()
    osc = om > 0
    c, s = np.cos(om[osc] * t), np.sin(om[osc] * t)
    u[osc] = u0[osc] * c + v0[osc] / om[osc] * s
    v[osc] = -u0[osc] * om[osc] * s + v0[osc] * c
    return ModalState(state.l_max, u, v)


def stability_spectrum(l_max: int) -> np.ndarray:
    """+-i sqrt(l(l+1)) for 1 <= l <= l_max, each repeated 2l+1 times."""
    if l_max < 1:
        raise ValueError("l_max must be >= 1")
    out = []
    for l in range(1, l_max + 1):
        om = math.sqrt(l * (l + 1))
        out.extend([complex(0.0, om), complex(0.0, -om)] * (2 * l + 1))
    return np.array(out)


def first_order_system(l_max: int) -> np.ndarray:
    """Dense matrix [[0, I], [A, 0]] of the truncated normal-form system, l >= 1."""
    a = -(degrees(l_max) * (degrees(l_max) + 1.0))[1:]
    n = a.size
    M = np.zeros((2 * n, 2 * n))
    M[:n, n:] = np.eye(n)
    M[n:, :n] = np.diag(a)
    return M


def first_order_eigenvalues(M: np.ndarray) -> np.ndarray:
    """Eigenvalues of a [[0, I], [diag(a), 0]] matrix via its 2x2 blocks.

    Each block has characteristic polynomial lambda^2 = a, so a <= 0 gives
    purely imaginary roots with an exactly zero real part.
    """
    n = M.shape[0] // 2
    a = np.diag(M[n:, :n])
    if (np.any(M[:n, :n]) or np.any(M[n:, n:])
            or not np.array_equal(M[:n, n:], np.eye(n))
            or not np.array_equal(M[n:, :n], np.diag(a))):
        raise ValueError("matrix is not of the form [[0, I], [diag(a), 0]]")
    root = np.sqrt(a.astype(complex))
    return np.concatenate([root, -root])


def norm_bound_constant(l_max: int) -> float:
    """Sharp C with |x(t)| <= C |x(0)| for the Euclidean (u, u') norm, l >= 1."""
    om = np.sqrt(np.arange(1, l_max + 1) * np.arange(2, l_max + 2.0))
    return float(max(om.max(), 1.0 / om.min()))


# --------------------------------------------------------------------------
# grid <-> modal transforms (Gauss grids)
# --------------------------------------------------------------------------

def _theta_factors(grid: SphereGrid, l_max: int) -> np.ndarray:
    """Latitude factor of Y_lm per packed slot, shape (n_lm, n_psi)."""
    theta = 0.5 * np.pi - grid.psi
    ls, ms = degrees(l_max), orders(l_max)
    return np.array([sph_harm_y(l, m, theta, 0.0).real for l, m in zip(ls, ms)])


def ylm_samples(l: int, m: int, grid: SphereGrid) -> np.ndarray:
    """Orthonormal complex spherical harmonic Y_lm sampled on ``grid``."""
    PSI, PHI = grid.mesh()
    return sph_harm_y(l, m, 0.5 * np.pi - PSI, PHI)


def _analyse(field: np.ndarray, grid: SphereGrid, l_max: int) -> np.ndarray:
    fm = np.fft.fft(np.asarray(field, dtype=complex), axis=1) * (2.0 * np.pi / grid.n_phi)
    theta = _theta_factors(grid, l_max)
    cols = orders(l_max) % grid.n_phi
    return np.einsum("i,ki,ik->k", grid.gauss_weights, theta, fm[:, cols])


def grid_to_modal(u: np.ndarray, udot: np.ndarray, grid: SphereGrid, l_max: int) -> ModalState:
    """Project displacement and velocity samples onto Y_lm, l <= l_max.

    Power found above ``l_max`` (up to what the grid resolves) raises an
    :class:`AliasingWarning`; the returned state is the truncation.
    """
    if grid.kind != "gauss":
        raise ValueError("modal projection needs a gauss grid")
    if l_max > grid.max_degree:
        raise ValueError(f"grid resolves degree <= {grid.max_degree}, asked for {l_max}")
    L = grid.max_degree
    full_u, full_v = _analyse(u, grid, L), _analyse(udot, grid, L)
    n = (l_max + 1) ** 2
    total = np.sum(np.abs(full_u) ** 2 + np.abs(full_v) ** 2)
    above = np.sum(np.abs(full_u[n:]) ** 2 + np.abs(full_v[n:]) ** 2)
    if above > 1e-20 * max(total, 1e-300) and above > 0:
        warnings.warn(f"input has relative power {above / total:.2e} above degree {l_max}",
                      AliasingWarning, stacklevel=2)
    return ModalState(l_max, full_u[:n], full_v[:n])


def _synthesise(coeffs: np.ndarray, grid: SphereGrid, l_max: int) -> np.ndarray:
    theta = _theta_factors(grid, l_max)
    ms = orders(l_max)
    out = np.zeros((grid.n_psi, grid.n_phi), complex)
    phase = np.exp(1j * np.outer(ms, grid.phi))
    out += np.einsum("k,ki,kj->ij", coeffs, theta, phase)
    return out


def modal_to_grid(state: ModalState, grid: SphereGrid):
    """Synthesize ``(u, u_dot)`` on ``grid``; real arrays when the imaginary part vanishes."""
    fields = []
    for coeffs in (state.displacement, state.velocity):
        f = _synthesise(coeffs, grid, state.l_max)
        scale = max(1.0, float(np.abs(f).max()))
        fields.append(f.real if np.abs(f.imag).max() <= 1e-12 * scale else f)
    return tuple(fields)

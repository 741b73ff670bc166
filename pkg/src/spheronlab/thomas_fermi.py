"""Thomas-Fermi screening: the ODE, its scale-reduced planar system and two BVPs.

Charts
------
physical  (x, f, g):  f' = g, g' = f^{3/2} / sqrt(x)
reduced   (rho, y, z): y = x^3 f, z = x^4 g, x = e^rho;  y' = 3y + z, z' = 4z + y^{3/2}
root      (t, f, g):   x = t^2;  df/dt = 2 t g, dg/dt = 2 f^{3/2}  (regular at t = 0)
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .units import E_CHARGE, HBAR, M_ELECTRON, thermal_energy

SOMMERFELD = (144.0, -432.0)
#: length scale of the dimensionless substitution x = r / b
B_DEFAULT = (3.0 * math.pi) ** (2.0 / 3.0) / 2.0 ** (7.0 / 3.0)
RTOL = 1e-12
ATOL = 1e-14


class ConeExitError(ArithmeticError):
    """A trajectory left the physical cone f >= 0 (equivalently y >= 0)."""

    def __init__(self, message: str, point):
        super().__init__(f"{message} at {tuple(float(p) for p in point)}")
        self.point = tuple(float(p) for p in point)


class ShootingError(RuntimeError):
    """Shooting or Newton iteration failed; ``history`` holds diagnostics."""

    def __init__(self, message: str, history=None):
        super().__init__(message)
        self.history = list(history or [])


# --------------------------------------------------------------------------
# right-hand sides and chart maps
# --------------------------------------------------------------------------

def tf_rhs(x: float, f: float, g: float):
    """(f', g') of the Thomas-Fermi equation."""
    if x <= 0:
        raise ValueError("x must be positive")
    if f < 0:
        raise ConeExitError("f < 0", (x, f, g))
    return g, f**1.5 / math.sqrt(x)


def reduced_rhs(y: float, z: float):
    if y < 0:
        raise ConeExitError("y < 0", (y, z))
    return 3.0 * y + z, 4.0 * z + y**1.5


def reduced_jacobian(y: float) -> np.ndarray:
    return np.array([[3.0, 1.0], [1.5 * math.sqrt(max(y, 0.0)), 4.0]])


@dataclass(frozen=True)
class ReducedState:
    rho: float
    y: float
    z: float


def reduce(x: float, f: float, g: float) -> ReducedState:
    if x <= 0:
        raise ValueError("x must be positive")
    return ReducedState(math.log(x), x**3 * f, x**4 * g)


def unreduce(state: ReducedState):
    x = math.exp(state.rho)
    return x, state.y / x**3, state.z / x**4


# --------------------------------------------------------------------------
# fixed points
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FixedPointReport:
    location: tuple
    jacobian: np.ndarray
    eigenvalues: tuple
    classification: str

    @property
    def determinant(self) -> float:
        return float(np.linalg.det(self.jacobian))

    def to_record(self) -> dict:
        return {"location": [float(v) for v in self.location],
                "jacobian": [[float(v) for v in row] for row in self.jacobian],
                "eigenvalues": [[float(complex(v).real), float(complex(v).imag)] for v in self.eigenvalues],
                "classification": self.classification}


def _classify(J: np.ndarray):
    tr = float(J[0, 0] + J[1, 1])
    det = float(J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0])
    disc = tr * tr - 4.0 * det
    if disc >= 0:
        r = math.sqrt(disc)
        # the larger root directly, the smaller from the product to keep trace exact
        big = 0.5 * (tr + r) if tr >= 0 else 0.5 * (tr - r)
        small = det / big if big != 0 else tr - big
        ev = tuple(sorted((big, small), reverse=True))
    else:
        r = math.sqrt(-disc)
        ev = (complex(0.5 * tr, 0.5 * r), complex(0.5 * tr, -0.5 * r))
    if det < 0:
        kind = "saddle"
    elif det == 0:
        kind = "degenerate"
    elif disc >= 0:
        kind = "unstable node" if tr > 0 else "stable node"
    elif tr == 0:
        kind = "center"
    else:
        kind = "unstable focus" if tr > 0 else "stable focus"
    return ev, kind


def classify_fixed_point(y: float, z: float, tol: float = 1e-9) -> FixedPointReport:
    dy, dz = reduced_rhs(y, z)
    res = math.hypot(dy, dz)
    if res > tol * max(1.0, abs(y), abs(z)):
        raise ValueError(f"({y}, {z}) is not a fixed point (residual {res:.3e})")
    J = reduced_jacobian(y)
    ev, kind = _classify(J)
    return FixedPointReport((y, z), J, ev, kind)


def sommerfeld(x):
    """Sommerfeld solution f = 144 x^-3 and its derivative."""
    x = np.asarray(x, dtype=float)
    return 144.0 / x**3, -432.0 / x**4


# --------------------------------------------------------------------------
# integrators
# --------------------------------------------------------------------------

def _phys(x, s):
    f = max(s[0], 0.0)
    return [s[1], f**1.5 / math.sqrt(x)]


def _red(rho, s):
    y = max(s[0], 0.0)
    return [3.0 * s[0] + s[1], 4.0 * s[1] + y**1.5]


def _root(t, s):
    f = max(s[0], 0.0)
    return [2.0 * t * s[1], 2.0 * f**1.5]


def _event(index, direction=0):
    def ev(_, s):
        return s[index]
    ev.terminal = True
    ev.direction = direction
    return ev


def integrate_physical(x0, x1, f0, g0, rtol=RTOL, dense=False):
    """Integrate in (x, f, g); raises :class:`ConeExitError` if f reaches 0."""
    sol = solve_ivp(_phys, (x0, x1), [f0, g0], method="DOP853", rtol=rtol, atol=ATOL,
                    events=_event(0, -1), dense_output=dense)
    if sol.status == 1:
        raise ConeExitError("f reached 0", (sol.t_events[0][0], *sol.y_events[0][0]))
    return sol


def integrate_reduced(rho0, rho1, y0, z0, rtol=RTOL, dense=False, atol=None):
    """Integrate the reduced system; raises :class:`ConeExitError` if y reaches 0."""
    if atol is None:
        atol = ATOL * max(1.0, abs(y0), abs(z0))
    sol = solve_ivp(_red, (rho0, rho1), [y0, z0], method="DOP853", rtol=rtol, atol=atol,
                    events=_event(0, -1 if rho1 >= rho0 else 1), dense_output=dense)
    if sol.status == 1:
        raise ConeExitError("y reached 0", (sol.t_events[0][0], *sol.y_events[0][0]))
    return sol


def dual_chart_endpoints(x0, x1, f0, g0, rtol=RTOL):
    """Endpoint (f, g) at x1 computed in both charts: ``(physical, reduced)``."""
    p = integrate_physical(x0, x1, f0, g0, rtol).y[:, -1]
    s = reduce(x0, f0, g0)
    r = integrate_reduced(s.rho, math.log(x1), s.y, s.z, rtol).y[:, -1]
    _, f, g = unreduce(ReducedState(math.log(x1), r[0], r[1]))
    return (float(p[0]), float(p[1])), (f, g)


# --------------------------------------------------------------------------
# atom separatrix by marching shooting
# --------------------------------------------------------------------------

_OVERSHOOT, _UNDERSHOOT = -1, 1

# left eigenvector of the reduced Jacobian at the saddle for its unstable
# eigenvalue, oriented so that positive values lie on the undershoot side
_LAM_UP = 0.5 * (7.0 + math.sqrt(73.0))
_W_UP = np.array([18.0, _LAM_UP - 3.0])


def _side(y, z):
    """Side of the saddle's stable manifold, from its tangent line (valid near the saddle)."""
    c = _W_UP @ np.array([y - SOMMERFELD[0], z - SOMMERFELD[1]])
    return _OVERSHOOT if c < 0 else _UNDERSHOOT


def _shoot_root(slope, t_end):
    """Outcome of the f(0) = 1 trajectory with initial slope ``slope``."""
    sol = solve_ivp(_root, (0.0, t_end), [1.0, slope], method="DOP853", rtol=RTOL, atol=ATOL,
                    events=[_event(0, -1), _event(1, 1)], dense_output=True)
    if sol.t_events[0].size:
        return _OVERSHOOT, sol
    if sol.t_events[1].size:
        return _UNDERSHOOT, sol
    x = sol.t[-1] ** 2
    return _side(x**3 * sol.y[0, -1], x**4 * sol.y[1, -1]), sol


def _shoot_reduced(rho0, y0, z0, rho_end, overrun=40.0):
    # integrating past rho_end lets the unstable mode decide the outcome
    atol = ATOL * max(1.0, abs(y0), abs(z0))
    sol = solve_ivp(_red, (rho0, rho_end + overrun), [y0, z0], method="DOP853", rtol=RTOL, atol=atol,
                    events=[_event(0, -1), _event(1, 1)], dense_output=True)
    if sol.t_events[0].size:
        return _OVERSHOOT, sol
    if sol.t_events[1].size:
        return _UNDERSHOOT, sol
    return _side(sol.y[0, -1], sol.y[1, -1]), sol


def _bisect(shoot, lo, hi, tolerance):
    """Bisect a shooting parameter; ``lo`` overshoots, ``hi`` undershoots."""
    out_lo, sol_lo = shoot(lo)
    out_hi, sol_hi = shoot(hi)
    if out_lo != _OVERSHOOT or out_hi != _UNDERSHOOT:
        return None
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        out, sol = shoot(mid)
        if out == _OVERSHOOT:
            lo, sol_lo = mid, sol
        else:
            hi, sol_hi = mid, sol
    return lo, hi, sol_lo, sol_hi


def _agreement_end(sol_a, sol_b, s0, s1, rel=1e-9, n=4000):
    """Last abscissa in [s0, s1] up to which two trajectories agree to ``rel``."""
    end = min(sol_a.t[-1], sol_b.t[-1], s1)
    grid = np.linspace(s0, end, n)
    a, b = sol_a.sol(grid), sol_b.sol(grid)
    scale = np.maximum(np.abs(a), 1e-300)
    ok = np.all(np.abs(a - b) <= rel * scale, axis=0)
    bad = np.flatnonzero(~ok)
    return grid[-1] if bad.size == 0 else grid[max(bad[0] - 1, 0)]


@dataclass
class AtomSolution:
    """Separatrix f(0) = 1, f -> 0 sampled on an increasing x grid."""

    slope: float
    bracket: tuple
    x: np.ndarray = field(repr=False)
    f: np.ndarray = field(repr=False)
    g: np.ndarray = field(repr=False)
    stages: int = 1

    @property
    def horizon(self) -> float:
        return float(self.x[-1])

    def reduced(self):
        return np.log(self.x[1:]), self.x[1:] ** 3 * self.f[1:], self.x[1:] ** 4 * self.g[1:]

    def asymptotic_ratio(self) -> float:
        """x^3 f / 144 at the far end."""
        return float(self.x[-1] ** 3 * self.f[-1] / 144.0)


def separatrix_atom(tolerance: float = 1e-12, horizon: float = 1e4,
                    slope_bracket=(-10.0, 0.0), samples_per_stage: int = 400) -> AtomSolution:
    """Shoot the f(0) = 1 solution that decays to zero.

    The initial slope is bisected until the bracket is narrower than
    ``tolerance``; too steep a slope drives f through zero, too shallow a
    slope turns f upward.  A single shot separates near x ~ 10^2 in double
    precision, so the solution is continued in stages: once two bracketing
    trajectories part, the reduced chart is re-shot from the last point
    where they still agreed, bisecting z at fixed y.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    t_end = math.sqrt(horizon)
    res = _bisect(lambda s: _shoot_root(s, t_end)[:2], slope_bracket[0], slope_bracket[1], tolerance)
    if res is None:
        raise ShootingError(f"no overshoot/undershoot bracket in slope interval {slope_bracket}")
    lo, hi, sol_lo, sol_hi = res
    if hi - lo > tolerance:
        raise ShootingError(f"slope bracket stalled at width {hi - lo:.3e} > {tolerance:.3e}")

    t_ok = _agreement_end(sol_lo, sol_hi, 0.0, t_end)
    t = np.linspace(0.0, t_ok, samples_per_stage)
    fg = 0.5 * (sol_lo.sol(t) + sol_hi.sol(t))
    xs, fs, gs = [t * t], [fg[0]], [fg[1]]
    stages = 1

    rho_end = math.log(horizon)
    rho = math.log(t_ok * t_ok)
    while rho < rho_end - 1e-12:
        x = math.exp(rho)
        y, z = x**3 * fs[-1][-1], x**4 * gs[-1][-1]
        # widen until the z interval brackets the separatrix again
        width = 1e-9 * abs(z)
        for _ in range(40):
            got = _bisect(lambda zz: _shoot_reduced(rho, y, zz, rho_end)[:2],
                          z - width, z + width, 0.0)
            if got is not None:
                break
            width *= 4.0
        else:
            raise ShootingError(f"lost the separatrix bracket at rho={rho:.6g}")
        _, _, s_lo, s_hi = got
        rho_ok = _agreement_end(s_lo, s_hi, rho, rho_end)
        if rho_ok <= rho + 1e-6:
            raise ShootingError(f"marching stalled at rho={rho:.6g}")
        grid = np.linspace(rho, rho_ok, samples_per_stage)[1:]
        yz = 0.5 * (s_lo.sol(grid) + s_hi.sol(grid))
        xg = np.exp(grid)
        xs.append(xg)
        fs.append(yz[0] / xg**3)
        gs.append(yz[1] / xg**4)
        rho = rho_ok
        stages += 1

    return AtomSolution(slope=0.5 * (lo + hi), bracket=(lo, hi), x=np.concatenate(xs),
                        f=np.concatenate(fs), g=np.concatenate(gs), stages=stages)


# --------------------------------------------------------------------------
# physical-units helpers
# --------------------------------------------------------------------------

def fermi_momentum(V, m: float = M_ELECTRON):
    """Maximal momentum sqrt(-2 m V) where V <= 0 (zero elsewhere)."""
    V = np.asarray(V, dtype=float)
    return np.sqrt(2.0 * m * np.clip(-V, 0.0, None))


def tf_electron_density(V, m: float = M_ELECTRON, hbar: float = HBAR):
    """Local electron density (2m)^{3/2} (-V)^{3/2} / (3 pi^2 hbar^3), zero where V > 0."""
    p0 = fermi_momentum(V, m)
    return p0**3 / (3.0 * math.pi**2 * hbar**3)


# --------------------------------------------------------------------------
# fireball boundary-value problem
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TFParams:
    """Fireball Thomas-Fermi parameters (Gaussian units by default).

    ``mu_e`` and ``rho_ion`` enter through the neutrality relation that ties
    the shielding factor to the cover width.
    """

    Q: float
    R: float
    zeta: float = field(default_factory=thermal_energy)
    b: float = B_DEFAULT
    e: float = E_CHARGE
    mu_e: float = 1.0
    rho_ion: float = 1.0

    def __post_init__(self):
        for name in ("Q", "R", "zeta", "b", "e", "mu_e", "rho_ion"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def rho0(self) -> float:
        return math.log(self.R / self.b)

    def rho1(self, r0: float) -> float:
        return math.log((self.R + r0) / self.b)

    @property
    def y0_target(self) -> float:
        return (self.R / self.b) ** 3

    def outer_state(self, r0: float, kappa: float):
        """(y, z) at rho1 fixed by the thermal boundary value and the shielded force."""
        r1 = self.R + r0
        c = r1**4 / (self.b**3 * self.Q * self.e**2)
        return c * self.zeta, c * (self.zeta - kappa * self.Q * self.e / r1)

    def outer_state_derivatives(self, r0: float, kappa: float):
        """d(y1, z1)/d(kappa) and d(y1, z1)/d(r0)."""
        r1 = self.R + r0
        d = self.b**3 * self.Q * self.e**2
        dk = (0.0, -r1**3 / (self.b**3 * self.e))
        dr = (4.0 * r1**3 * self.zeta / d,
              (4.0 * r1**3 * self.zeta - 3.0 * kappa * self.Q * self.e * r1**2) / d)
        return dk, dr

    def neutral_kappa(self, r0: float) -> float:
        """Shielding that makes a cover of width r0 neutral."""
        R = self.R
        return ((R + r0) ** 3 - R**3) * self.mu_e / (self.rho_ion * R**3)

    def neutral_kappa_slope(self, r0: float) -> float:
        return 3.0 * (self.R + r0) ** 2 * self.mu_e / (self.rho_ion * self.R**3)


def _var_rhs(rho, s):
    y = max(s[0], 0.0)
    dy = 3.0 * s[0] + s[1]
    dz = 4.0 * s[1] + y**1.5
    J = np.array([[3.0, 1.0], [1.5 * math.sqrt(y), 4.0]])
    Phi = s[2:].reshape(2, 2)
    return np.concatenate([[dy, dz], (J @ Phi).ravel()])


@dataclass(frozen=True)
class FireballResidual:
    """Residuals at trial (r0, kappa), scaled to be relative."""

    r0: float
    kappa: float
    y_inner: float
    z_inner: float
    residual: np.ndarray
    jacobian: np.ndarray | None = None

    @property
    def norm(self) -> float:
        return float(np.max(np.abs(self.residual)))


def fireball_bvp(params: TFParams, r0: float, kappa: float, jacobian: bool = False) -> FireballResidual:
    """Residuals of the fireball BVP at trial width ``r0`` and shielding ``kappa``.

    The outer state at rho1 is fixed by the thermal potential and the
    shielded force; the reduced system is integrated back to rho0, and the
    residuals are the mismatch with the Coulomb value there (relative to
    it) and the mismatch between ``kappa`` and the neutrality shielding.
    With ``jacobian=True`` the variational equations are integrated
    alongside and d(residual)/d(kappa, r0) is attached.
    """
    if not r0 > 0:
        raise ValueError("r0 must be positive")
    y1, z1 = params.outer_state(r0, kappa)
    rho1, rho0 = params.rho1(r0), params.rho0
    atol = ATOL * max(1.0, abs(y1), abs(z1))
    s1 = np.concatenate([[y1, z1], np.eye(2).ravel()])
    sol = solve_ivp(_var_rhs, (rho1, rho0), s1, method="DOP853", rtol=RTOL, atol=atol,
                    events=_event(0, 1))
    if sol.status == 1:
        raise ConeExitError("fireball trajectory left y >= 0", (sol.t_events[0][0], *sol.y_events[0][0][:2]))
    y0, z0 = sol.y[0, -1], sol.y[1, -1]
    Y = params.y0_target
    res = np.array([(y0 - Y) / Y, kappa - params.neutral_kappa(r0)])
    jac = None
    if jacobian:
        Phi = sol.y[2:, -1].reshape(2, 2)
        (dk_y, dk_z), (dr_y, dr_z) = params.outer_state_derivatives(r0, kappa)
        F1 = np.array([3.0 * y1 + z1, 4.0 * z1 + max(y1, 0.0) ** 1.5])
        d_kappa = Phi @ np.array([dk_y, dk_z])
        d_r0 = Phi @ np.array([dr_y, dr_z]) - Phi @ F1 / (params.R + r0)
        jac = np.array([[d_kappa[0] / Y, d_r0[0] / Y],
                        [1.0, -params.neutral_kappa_slope(r0)]])
    return FireballResidual(r0, kappa, float(y0), float(z0), res, jac)


def finite_difference_jacobian(params: TFParams, r0: float, kappa: float, step: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of the fireball residuals in (kappa, r0)."""
    cols = []
    for dk, dr in ((step * max(1.0, abs(kappa)), 0.0), (0.0, step * r0)):
        hi = fireball_bvp(params, r0 + dr, kappa + dk).residual
        lo = fireball_bvp(params, r0 - dr, kappa - dk).residual
        cols.append((hi - lo) / (2.0 * (dk + dr)))
    return np.column_stack(cols)


@dataclass
class ShieldingResult:
    kappa: float
    r0: float
    history: list
    iterations: int

    @property
    def residual_norms(self) -> np.ndarray:
        return np.array([h["residual"] for h in self.history])


def shielding_iteration(params: TFParams, kappa: float = 1.0, r0: float | None = None,
                        tol: float = 1e-12, max_iter: int = 50) -> ShieldingResult:
    """Newton iteration on (kappa, r0) for the fireball BVP.

    Starts from the unshielded seed kappa = 1, r0 = R/100 unless told
    otherwise.  Steps that leave the cone or fail to reduce the residual
    are halved; a singular Jacobian falls back to a damped least-squares
    step, and persistent failure raises :class:`ShootingError`.
    """
    if r0 is None:
        r0 = params.R / 100.0
    history = []
    cur = fireball_bvp(params, r0, kappa, jacobian=True)
    for it in range(max_iter):
        history.append({"iteration": it, "kappa": cur.kappa, "r0": cur.r0, "residual": cur.norm})
        if cur.norm <= tol:
            return ShieldingResult(cur.kappa, cur.r0, history, it)
        J = cur.jacobian
        if np.linalg.cond(J) < 1e14:
            step = np.linalg.solve(J, -cur.residual)
        else:
            lam = 1e-8 * np.abs(J).max() ** 2
            step = np.linalg.solve(J.T @ J + lam * np.eye(2), -J.T @ cur.residual)
        damp = 1.0
        for _ in range(30):
            k_new, r_new = cur.kappa + damp * step[0], cur.r0 + damp * step[1]
            if r_new > 0:
                try:
                    trial = fireball_bvp(params, r_new, k_new, jacobian=True)
                except ConeExitError:
                    trial = None
                if trial is not None and (trial.norm < cur.norm or damp == 1.0 and trial.norm < 2 * cur.norm):
                    break
            damp *= 0.5
        else:
            raise ShootingError("line search failed to reduce the residual", history)
        cur = trial
    history.append({"iteration": max_iter, "kappa": cur.kappa, "r0": cur.r0, "residual": cur.norm})
    if cur.norm <= tol:
        return ShieldingResult(cur.kappa, cur.r0, history, max_iter)
    raise ShootingError(f"no convergence after {max_iter} iterations (residual {cur.norm:.3e})", history)


@dataclass(frozen=True)
class ManufacturedProblem:
    params: TFParams
    kappa: float
    r0: float


def manufacture_problem(R: float = 10.0, r0: float = 0.125, z_inner: float = -2000.0,
                        kappa: float = 0.8, Q: float = 1.0, b: float = B_DEFAULT,
                        rho_ion: float = 1.0) -> ManufacturedProblem:
    """Fireball BVP whose exact solution is (kappa, r0).

    A reduced trajectory is started on the inner boundary line y = (R/b)^3
    with the chosen z, integrated to rho1, and the charge e, thermal
    potential and electron density are chosen so that its endpoint satisfies
    both outer conditions and neutrality.
    """
    y_in = (R / b) ** 3
    rho0, rho1 = math.log(R / b), math.log((R + r0) / b)
    y1, z1 = integrate_reduced(rho0, rho1, y_in, z_inner).y[:, -1]
    x1 = (R + r0) / b
    # kappa = (y1 - z1) e / x1^3 fixes e; then zeta follows from y1
    e = kappa * x1**3 / (y1 - z1)
    if e <= 0:
        raise ValueError("trajectory endpoint gives a nonpositive charge; choose another z_inner")
    zeta = y1 * b**3 * Q * e**2 / (R + r0) ** 4
    mu_e = kappa * rho_ion * R**3 / ((R + r0) ** 3 - R**3)
    params = TFParams(Q=Q, R=R, zeta=zeta, b=b, e=e, mu_e=mu_e, rho_ion=rho_ion)
    return ManufacturedProblem(params, kappa, r0)


# --------------------------------------------------------------------------
# phase portrait
# --------------------------------------------------------------------------

def portrait_samples(y_range=(0.0, 300.0), z_range=(-900.0, 100.0), n: int = 21):
    """Vector field samples on a regular (y, z) grid: rows (y, z, dy, dz)."""
    rows = []
    for y in np.linspace(*y_range, n):
        for z in np.linspace(*z_range, n):
            dy, dz = reduced_rhs(float(y), float(z))
            rows.append([float(y), float(z), float(dy), float(dz)])
    return rows


def phase_trajectory(y0: float, z0: float, rho_span=(0.0, 1.0), samples: int = 201):
    """Reduced trajectory from (y0, z0) sampled at ``samples`` points, stopped at cone exit."""
    sol = solve_ivp(_red, rho_span, [y0, z0], method="DOP853", rtol=RTOL,
                    atol=ATOL * max(1.0, abs(y0), abs(z0)),
                    events=_event(0, -1 if rho_span[1] >= rho_span[0] else 1), dense_output=True)
    rho = np.linspace(rho_span[0], sol.t[-1], samples)
    yz = sol.sol(rho)
    return rho, yz[0], yz[1]

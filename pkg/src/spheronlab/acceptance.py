"""Acceptance criteria, runnable from tests and from ``spheronlab selftest``.

Every check compares against its tolerance through :func:`Context.tol`.
Injecting a criterion replaces all of its tolerances by -inf, which must
make it fail; the self-test uses this to show the harness can fail.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import sympy

from . import fock, gap, geodesic, membrane, oracles, spectra
from . import thomas_fermi as tf


@dataclass
class Context:
    injected: bool = False
    notes: list = field(default_factory=list)
    ok: bool = True

    def tol(self, value: float) -> float:
        return -math.inf if self.injected else value

    def check(self, label: str, err: float, tol: float):
        tol = self.tol(tol)
        passed = bool(err <= tol)
        self.ok &= passed
        self.notes.append(f"{label}: {err:.3g} <= {tol:.3g}" if passed else f"{label}: {err:.3g} > {tol:.3g} FAIL")

    def require(self, label: str, cond: bool):
        passed = bool(cond) and not self.injected
        self.ok &= passed
        self.notes.append(label if passed else f"{label} FAIL")


@dataclass(frozen=True)
class Criterion:
    key: int
    name: str
    run: Callable[[Context], None]
    budget: float | None = None


@dataclass
class Outcome:
    key: int
    name: str
    passed: bool
    elapsed: float
    detail: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.key:2d} {self.name} ({self.elapsed:.2f} s): {self.detail}"


# --------------------------------------------------------------------------

def _c1(ctx):
    alpha = spectra.refined_eigenvalues(1.0, 4, node_count=1000)
    exact = np.array([2.0, 6.0, 12.0, 20.0])
    ctx.check("max relative eigenvalue error", float(np.max(np.abs(alpha - exact) / exact)), 1e-6)


def _c2(ctx):
    grid = spectra.PsiGrid(1000)
    modes = spectra.solve_spectrum(spectra.SpectralProblem(1.0, grid), 8)
    G = spectra.gram_matrix(modes, grid)
    off = G - np.diag(np.diag(G))
    ctx.check("max off-diagonal Gram entry", float(np.abs(off).max()), 1e-8)
    ctx.check("max diagonal defect", float(np.abs(np.diag(G) - 1.0).max()), 1e-8)


def _c3(ctx):
    R = 1.7
    grid = membrane.SphereGrid(64, 33)
    ones = np.ones((grid.n_psi, grid.n_phi))

    def lin(eps):
        f = membrane.DisplacementField(R, eps * ones, 0 * ones, 0 * ones, grid)
        return membrane.linearized_mean_curvature(f)

    eps = 1e-3
    ctx.check("|K - (-1+eps)/R| at eps=1e-3", float(np.abs(lin(eps) - (-1 + eps) / R).max()), 1e-8)
    d1 = float(np.abs(lin(eps) + 1.0 / (R * (1 + eps))).max())
    d2 = float(np.abs(lin(eps / 2) + 1.0 / (R * (1 + eps / 2))).max())
    ctx.check("|defect ratio - 4| on halving eps", abs(d1 / d2 - 4.0), 0.05)


def _c4(ctx):
    l_max = 12
    ev = membrane.first_order_eigenvalues(membrane.first_order_system(l_max))
    ctx.check("max |real part|", float(np.abs(ev.real).max()), 0.0)
    dense = np.linalg.eigvals(membrane.first_order_system(l_max))
    ctx.check("block roots vs dense eigvals", float(np.abs(np.sort(ev.imag) - np.sort(dense.imag)).max()), 1e-10)
    rng = np.random.default_rng(4)
    n = (l_max + 1) ** 2
    state = membrane.ModalState(l_max, rng.normal(size=n) + 1j * rng.normal(size=n),
                                rng.normal(size=n) + 1j * rng.normal(size=n))
    T = 100 * 2 * math.pi / math.sqrt(2.0)
    e0 = state.energy()
    worst = 0.0
    for t in np.linspace(0.0, T, 101):
        worst = max(worst, abs(membrane.evolve_membrane(state, t).energy() - e0) / e0)
    ctx.check("relative energy change over 100 periods", worst, 1e-12)


def _c5(ctx):
    n_max = 8
    alg = fock.ladder_matrices(n_max)
    comm = alg.exact_commutator()
    target = sympy.diag(*([1] * n_max + [-n_max]))
    ctx.require("exact truncated commutator = diag(1,...,1,-8)", comm == target)
    up, down = alg.exact()
    ctx.require("exact raise*lower = diag(0..8)", up * down == sympy.diag(*range(n_max + 1)))
    omega = math.sqrt(2.0)
    E = fock.oscillator_spectrum(omega, n_max)
    ctx.require("oscillator energies (n+1/2) omega bitwise", all(E[n] == (n + 0.5) * omega for n in range(n_max + 1)))
    spacing = np.diff(E)
    ctx.check("ladder spacing defect", float(np.abs(spacing - omega).max()), 1e-14)


def _c6(ctx):
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 65))
        op = fock.BlockOperator(rng.uniform(-10, 10, n), float(rng.uniform(0, 10)))
        dense = np.linalg.eigvalsh(op.assemble())
        worst = max(worst, float(np.abs(fock.block_spectrum(op) - dense).max()))
    ctx.check("max |block spectrum - dense eigvalsh|", worst, 1e-12)


GAP_CASES = [
    ([0.0, 1.0], 1.5),
    ([0.2, 0.7], 1.0),
    ([0.1, 0.5, 1.0], 1.0),
    ([0.0, 0.25, 0.5, 0.75], 0.6),
    ([0.0, 0.3, 0.6, 0.9, 1.2], 0.8),
]


def _c7(ctx):
    occ_err = e_err = 0.0
    floor_ok = True
    for eps, W in GAP_CASES:
        sol = gap.solve_gap_discrete(eps, W)
        t, e_min = oracles.brute_force_pairing(eps, W)
        occ_err = max(occ_err, float(np.abs(t - sol.occupations).max()))
        e_err = max(e_err, abs(sol.energy() - e_min) / abs(e_min))
        pen = gap.unpaired_penalty(sol.delta, sol.levels)
        floor_ok &= bool(np.all(pen >= sol.delta) and np.all(gap.pair_breaking_cost(sol.delta, sol.levels) >= 2 * sol.delta))
    ctx.check("(a) occupations vs brute force", occ_err, 1e-3)
    ctx.check("(a) energy vs brute force (relative)", e_err, 1e-6)
    ig = gap.solve_gap_integral(1.0, 1.0, 1.0)
    ctx.check("(b) closed form vs quadrature+bisection", ig.relative_difference, 1e-10)
    ctx.check("(b) |delta - 0.275721|", abs(ig.delta - 0.275721), 5e-7)
    ctx.require("(c) penalty >= delta and pair breaking >= 2 delta", floor_ok)


def _c8(ctx):
    y, z = sympy.Integer(144), sympy.Integer(-432)
    ctx.require("exact rational residual at (144, -432)",
                (3 * y + z, 4 * z + y ** sympy.Rational(3, 2)) == (0, 0))
    ctx.require("float residual at (0,0) and (144,-432) exactly zero",
                tf.reduced_rhs(0.0, 0.0) == (0.0, 0.0) and tf.reduced_rhs(144.0, -432.0) == (0.0, 0.0))
    origin = tf.classify_fixed_point(0.0, 0.0)
    saddle = tf.classify_fixed_point(144.0, -432.0)
    ctx.require("origin: unstable node with eigenvalues {3, 4}",
                origin.classification == "unstable node" and sorted(origin.eigenvalues) == [3.0, 4.0])
    ctx.check("saddle determinant + 6", abs(saddle.determinant + 6.0), 1e-12)
    ctx.require("A classified as saddle", saddle.classification == "saddle")
    x = np.linspace(0.5, 20.0, 20)
    f = 144.0 / x**3
    fpp = 1728.0 / x**5
    resid = np.abs(fpp - f**1.5 / np.sqrt(x)) / fpp
    ctx.check("Sommerfeld relative residual at 20 points", float(resid.max()), 1e-12)


def _c9(ctx):
    sol = tf.separatrix_atom()
    ctx.require("f positive on the span", bool(np.all(sol.f > 0)))
    ctx.require("f strictly decreasing", bool(np.all(np.diff(sol.f) < 0)))
    ctx.check("|x^3 f / 144 - 1| at the horizon", abs(sol.asymptotic_ratio() - 1.0), 0.05)
    (fp, gp), (fr, gr) = tf.dual_chart_endpoints(1.0, 2.0, 1.0, -1.0)
    ctx.check("dual-chart endpoint agreement", max(abs(fp - fr), abs(gp - gr)), 1e-8)
    ctx.notes.append(f"slope {sol.slope!r}, horizon {sol.horizon:g}")


def _c10(ctx):
    prob = tf.manufacture_problem()
    res = tf.shielding_iteration(prob.params)
    err = max(abs(res.kappa - prob.kappa), abs(res.r0 - prob.r0) / prob.r0)
    ctx.check("recovered (kappa, r0) error", err, 1e-8)
    # order from errors against the known solution, asymptotic regime and above round-off
    e = [max(abs(h["kappa"] - prob.kappa), abs(h["r0"] - prob.r0) / prob.r0) for h in res.history]
    orders = [math.log(e[k + 1] / e[k]) / math.log(e[k] / e[k - 1]) for k in range(1, len(e) - 1)
              if e[k - 1] < 0.05 and e[k + 1] > 1e-13]
    ctx.require(f"empirical convergence order {['%.2f' % o for o in orders]} >= 1.8",
                bool(orders) and min(orders) >= 1.8)


def _c11(ctx):
    grid = np.linspace(0.1, 0.5 * np.pi, 60)
    f_err = max(abs(geodesic.point_circle_force_quadrature(a) - geodesic.point_circle_force(a)) for a in grid)
    t_err = max(abs(geodesic.circle_circle_torque_quadrature(a) - geodesic.circle_circle_torque(a)) for a in grid)
    ctx.check("point-circle force quadrature", f_err, 1e-8)
    ctx.check("circle-circle torque quadrature", t_err, 1e-8)
    h = 1e-5
    fd_err = 0.0
    for th in np.linspace(0.1, 0.5 * np.pi - h, 60):
        fd = (1 / math.sin(th + h) - 1 / math.sin(th - h)) / (2 * h)
        fd_err = max(fd_err, abs(fd + math.cos(th) / math.sin(th) ** 2) / (math.cos(th) / math.sin(th) ** 2 + 1))
    ctx.check("finite difference of 1/sin vs -cos/sin^2", fd_err, 1e-6)


def _c12(ctx):
    drift = 0.0
    for seed in range(3):
        cfg = geodesic.RP2Configuration.random(3, seed=seed, speed=0.3)
        res = geodesic.simulate(cfg, geodesic.guarded_dt(cfg), 10_000)
        drift = max(drift, res.relative_drift)
    ctx.check("relative energy drift over 1e4 steps", drift, 1e-8)
    two = geodesic.RP2Configuration(np.eye(3)[:2], np.zeros((2, 3)))
    three = geodesic.RP2Configuration(np.eye(3), np.zeros((3, 3)))
    fmax = max(float(np.abs(geodesic.nbody_forces(c)).max()) for c in (two, three))
    ctx.check("force norm at orthogonal configurations", fmax, 1e-12)
    cfg = geodesic.RP2Configuration.random(4, seed=11, speed=0.2)
    flip = cfg.flipped([0, 2])
    same = (cfg.potential_energy() == flip.potential_energy()
            and np.array_equal(geodesic.nbody_forces(flip)[[0, 2]], -geodesic.nbody_forces(cfg)[[0, 2]])
            and np.array_equal(geodesic.nbody_forces(flip)[[1, 3]], geodesic.nbody_forces(cfg)[[1, 3]]))
    dt = geodesic.guarded_dt(cfg)
    a, b = geodesic.simulate(cfg, dt, 200), geodesic.simulate(flip, dt, 200)
    same &= bool(np.array_equal(a.energies, b.energies))
    same &= bool(np.array_equal(a.config.points[[0, 2]], -b.config.points[[0, 2]]))
    ctx.require("antipodal flips leave potential, forces and dynamics exactly invariant", same)


def _c13(ctx):
    rng = np.random.default_rng(13)
    worst = 0.0
    for _ in range(5):
        F = geodesic.harmonic_quadratic(rng.normal(size=9))
        q = rng.normal(size=3)
        val = F(q)
        worst = max(worst, abs(geodesic.laplace_beltrami_rp2(F, q) / val + 6.0))
    ctx.check("|D F / F + 6| on degree-2 harmonics", worst, 1e-6)
    levels = geodesic.free_spectrum(2.0, 10)
    ctx.require("free spectrum multiplicities 2l+1 on even l",
                all(mult == 2 * l + 1 and l % 2 == 0 for l, _, mult in levels))
    ctx.check("sigma(l=2, gamma=2) - 6", abs(levels[0][1] - 6.0), 0.0)


CLI_PROBES = [
    ["spectrum", "--U", "1", "--count", "4"],
    ["blockspec", "--diag", "1,2", "--W", "0.5"],
    ["gap", "integral", "--W", "1", "--nu", "1", "--eps-max", "1"],
    ["tf", "portrait", "--y", "100", "--z", "-300"],
    ["geo", "torque", "--theta", "0.7"],
]


def _c14(ctx):
    from .cli import run_capture

    same = True
    parsed = True
    for argv in CLI_PROBES:
        code1, out1 = run_capture(argv)
        code2, out2 = run_capture(argv)
        same &= code1 == 0 and code2 == 0 and out1 == out2
        try:
            import json
            json.loads(out1)
        except ValueError:
            parsed = False
    ctx.require("repeated CLI invocations byte-identical and exit 0", same)
    ctx.require("CLI JSON outputs re-readable", parsed)


CRITERIA = [
    Criterion(1, "eigenvalue oracle", _c1, 5.0),
    Criterion(2, "weighted orthogonality", _c2),
    Criterion(3, "curvature linearization", _c3),
    Criterion(4, "modal stability", _c4, 1.0),
    Criterion(5, "ladder algebra", _c5),
    Criterion(6, "block spectrum", _c6, 10.0),
    Criterion(7, "gap equation consistency", _c7, 30.0),
    Criterion(8, "Thomas-Fermi phase portrait", _c8),
    Criterion(9, "atom separatrix", _c9, 10.0),
    Criterion(10, "fireball BVP", _c10, 10.0),
    Criterion(11, "geodesic integrals", _c11),
    Criterion(12, "RP^2 N-body", _c12),
    Criterion(13, "RP^2 spectrum", _c13),
    Criterion(14, "CLI determinism", _c14),
]


def by_key(key) -> Criterion:
    for c in CRITERIA:
        if str(c.key) == str(key) or c.name == key:
            return c
    raise KeyError(f"unknown criterion {key!r}")


def run_criterion(crit: Criterion, inject: bool = False) -> Outcome:
    ctx = Context(injected=inject)
    start = time.perf_counter()
    try:
        crit.run(ctx)
    except Exception as exc:  # a crash is a failure, reported by name
        ctx.ok = False
        ctx.notes.append(f"{type(exc).__name__}: {exc}")
    elapsed = time.perf_counter() - start
    if crit.budget is not None:
        within = elapsed < crit.budget
        ctx.ok &= within
        ctx.notes.append(f"runtime {elapsed:.2f} s < {crit.budget:g} s" + ("" if within else " FAIL"))
    return Outcome(crit.key, crit.name, ctx.ok, elapsed, "; ".join(ctx.notes))


def run_all(only=None, inject=None) -> list[Outcome]:
    inject = {str(k) for k in (inject or [])}
    chosen = CRITERIA if not only else [by_key(k) for k in only]
    return [run_criterion(c, inject=str(c.key) in inject or c.name in inject) for c in chosen]

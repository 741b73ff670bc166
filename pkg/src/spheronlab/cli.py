"""Command-line entry point: ``spheronlab <command> [<subcommand>] [options]``.

Every solver is reachable as a subcommand.  Options may also come from a
``--config FILE`` (JSON object or ``key = value`` lines); explicit flags
override file values.  Output is JSON (default) or CSV on stdout or in
``--output``.  Errors are reported as a JSON record on stderr with a
nonzero exit status.
"""
from __future__ import annotations

import argparse
import contextlib
import io as _io
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from . import fock, gap, geodesic, membrane, spectra
from . import io as sio
from . import thomas_fermi as tf
from ._accel import apply_thread_cap


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class Output:
    record: object
    header: list | None = None
    rows: list | None = None


# --------------------------------------------------------------------------
# argument helpers
# --------------------------------------------------------------------------

def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _positive(value: float, name: str):
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")


def _common(parser):
    parser.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS,
                        help="output format (default json)")
    parser.add_argument("--output", default=argparse.SUPPRESS, help="write output to this file")
    parser.add_argument("--config", default=argparse.SUPPRESS,
                        help="JSON or key=value file with option values")


# --------------------------------------------------------------------------
# handlers
# --------------------------------------------------------------------------

def cmd_spectrum(a) -> Output:
    if a.n is not None:
        for name in ("beta", "R"):
            if getattr(a, name) is None:
                raise UsageError(f"--n requires --{name}")
        _positive(a.beta, "beta")
        _positive(a.R, "R")
        U = a.n * a.n * a.beta
    elif a.U is not None:
        U = a.U
    else:
        raise UsageError("give --U, or --n with --beta and --R")
    grid = spectra.PsiGrid(a.nodes)
    if a.no_refine:
        modes = spectra.solve_spectrum(spectra.SpectralProblem(U, grid), a.count)
    else:
        modes = spectra.refined_spectrum(U, a.count, a.nodes)
    records = []
    for m in modes:
        rec = m.to_record()
        if not a.samples:
            rec.pop("samples")
        records.append(rec)
    if a.n is not None:
        kappas = [math.sqrt(m.eigenvalue / (2.0 * a.n * a.n * a.R)) for m in modes]
        for rec, k in zip(records, kappas):
            rec["angular_speed"] = k
    if a.samples:
        header, rows = spectra.modes_to_rows(modes, grid)
    else:
        header = ["index", "eigenvalue", "parity"]
        rows = [[m.index, m.eigenvalue, m.parity] for m in modes]
    return Output(records, header, rows)


def _membrane_state(a) -> membrane.ModalState:
    if a.state:
        with open(a.state) as fh:
            return membrane.ModalState.from_records(json.load(fh))
    state = membrane.ModalState.zeros(a.l_max)
    if a.excite is None:
        return state
    l, m = a.excite
    return membrane.ModalState.from_dict(a.l_max, {(l, m): (complex(a.amplitude), 0.0)})


def cmd_membrane_evolve(a) -> Output:
    for name in ("beta", "R"):
        if getattr(a, name) is not None:
            _positive(getattr(a, name), name)
    state = _membrane_state(a)
    times = np.linspace(0.0, a.t, a.samples)
    rows = []
    for t in times:
        s = membrane.evolve_membrane(state, float(t), a.beta, a.R)
        rows.append([float(t), s.energy(a.beta, a.R), s.norm()])
    final = membrane.evolve_membrane(state, a.t, a.beta, a.R)
    record = {"t": a.t, "energy": [r[1] for r in rows], "times": [r[0] for r in rows],
              "final": final.to_records()}
    return Output(record, ["t", "energy", "norm"], rows)


def cmd_membrane_stability(a) -> Output:
    ev = membrane.first_order_eigenvalues(membrane.first_order_system(a.l_max))
    record = {"l_max": a.l_max, "max_abs_real_part": float(np.abs(ev.real).max()),
              "norm_bound": membrane.norm_bound_constant(a.l_max),
              "eigenvalues": [[float(z.real), float(z.imag)] for z in ev]}
    return Output(record, ["re", "im"], [[z.real, z.imag] for z in ev])


def cmd_membrane_curvature(a) -> Output:
    _positive(a.R, "R")
    grid = membrane.SphereGrid(a.n_phi, a.n_psi)
    ones = np.ones((grid.n_psi, grid.n_phi))
    field = membrane.DisplacementField(a.R, a.eps * ones, 0 * ones, 0 * ones, grid)
    lin = membrane.linearized_mean_curvature(field)
    exact = membrane.exact_mean_curvature(field)
    record = {"eps": a.eps, "R": a.R,
              "linearized": float(np.mean(lin)),
              "linearized_spread": float(np.ptp(lin)),
              "exact": float(np.nanmean(exact)),
              "target_linear": (-1.0 + a.eps) / a.R,
              "target_exact": -1.0 / (a.R * (1.0 + a.eps))}
    return Output(record, list(record), [list(record.values())])


def _mode(kind_l, m):
    return fock.ModeIndex(fock.SPHERON, m, kind_l)


def cmd_fock_ladder(a) -> Output:
    alg = fock.ladder_matrices(a.n_max)
    comm = alg.commutator()
    diag = np.diag(comm)
    record = {"n_max": a.n_max, "commutator_diagonal": diag,
              "off_diagonal_max": float(np.abs(comm - np.diag(diag)).max()),
              "number_operator": np.diag(fock.number_operator(alg))}
    return Output(record, ["n", "commutator"], [[k, v] for k, v in enumerate(diag)])


def cmd_fock_spectrum(a) -> Output:
    _positive(a.freq, "freq")
    E = fock.oscillator_spectrum(a.freq, a.n_max)
    return Output({"frequency": a.freq, "energies": E}, ["n", "energy"], [[k, v] for k, v in enumerate(E)])


def cmd_fock_hamiltonian(a) -> Output:
    modes = fock.spheron_modes(a.degrees)
    E0 = fock.field_hamiltonian(modes)
    record = {"degrees": a.degrees, "modes": len(modes), "ground_energy": E0,
              "frequencies": [m.frequency for m in modes]}
    return Output(record, ["m", "l", "frequency"], [[m.m, m.l, m.frequency] for m in modes])


def cmd_fock_interaction(a) -> Output:
    modes = [_mode(a.l1, a.m1), _mode(a.l2, a.m2)]
    H = fock.interaction_matrix(modes, a.n_max, a.W)
    H0 = np.diag(fock.product_energies(modes[0].frequency, modes[1].frequency, a.n_max))
    ev = np.linalg.eigvalsh(H0 + H)
    record = {"n_max": a.n_max, "W": a.W, "dimension": H.shape[0],
              "entries": fock.to_triplets(H), "eigenvalues": ev}
    trip = fock.to_triplets(H)
    return Output(record, ["row", "col", "value"], [[t["row"], t["col"], t["value"]] for t in trip])


def cmd_blockspec(a) -> Output:
    op = fock.BlockOperator(np.array(a.diag), a.W)
    ev = fock.block_spectrum(op)
    record = {"eigenvalues": ev}
    if a.polarize:
        plus, minus = fock.polarize(op)
        record["K1"] = plus
        record["K2"] = minus
        record["polarization_defect"] = fock.polarization_defect(op)
    return Output(record, ["k", "eigenvalue"], [[k, v] for k, v in enumerate(ev)])


def cmd_gap_discrete(a) -> Output:
    if (a.eps is None) == (a.levels is None):
        raise UsageError("give exactly one of --eps or --levels")
    eps = np.array(a.eps) if a.eps is not None else sio.read_levels(a.levels)
    sol = gap.solve_gap_discrete(eps, a.W)
    record = sol.to_record()
    record["energy"] = sol.energy()
    record["unpaired_penalty"] = gap.unpaired_penalty(sol.delta, eps)
    rows = [[e, t, E] for e, t, E in zip(eps, sol.occupations, sol.quasiparticle_energies)]
    return Output(record, ["eps", "occupation", "quasiparticle_energy"], rows)


def cmd_gap_integral(a) -> Output:
    res = gap.solve_gap_integral(a.W, a.nu, a.eps_max, verify=not a.no_verify)
    record = {"W": a.W, "nu": a.nu, "eps_max": a.eps_max, "delta": res.delta}
    if not a.no_verify:
        record["delta_quadrature"] = res.delta_quadrature
        record["relative_difference"] = res.relative_difference
    return Output(record, list(record), [list(record.values())])


def cmd_gap_langmuir(a) -> Output:
    kw = {k: v for k, v in (("e", a.e), ("m", a.m)) if v is not None}
    w = gap.langmuir_frequency(a.n, **kw)
    record = {"n": a.n, "omega": w, "penetration_depth": gap.penetration_depth(w)}
    return Output(record, list(record), [list(record.values())])


def cmd_tf_atom(a) -> Output:
    sol = tf.separatrix_atom(tolerance=a.tolerance, horizon=a.horizon)
    record = {"slope": sol.slope, "bracket": list(sol.bracket), "horizon": sol.horizon,
              "stages": sol.stages, "asymptotic_ratio": sol.asymptotic_ratio()}
    if a.profile:
        record["x"], record["f"], record["g"] = sol.x, sol.f, sol.g
    return Output(record, ["x", "f", "g"], [list(r) for r in zip(sol.x, sol.f, sol.g)])


def cmd_tf_portrait(a) -> Output:
    if (a.y is None) != (a.z is None):
        raise UsageError("--y and --z go together")
    fixed = [tf.classify_fixed_point(0.0, 0.0).to_record(),
             tf.classify_fixed_point(*tf.SOMMERFELD).to_record()]
    if a.y is None:
        rows = tf.portrait_samples(n=a.samples)
        return Output({"fixed_points": fixed, "field": rows}, ["y", "z", "dy", "dz"], rows)
    rho, y, z = tf.phase_trajectory(a.y, a.z, (0.0, a.rho), a.samples)
    rows = [list(r) for r in zip(rho, y, z)]
    return Output({"fixed_points": fixed, "start": [a.y, a.z], "rho": rho, "y": y, "z": z},
                  ["rho", "y", "z"], rows)


def _shielding_output(res, extra=None) -> Output:
    record = dict(extra or {})
    record.update({"kappa": res.kappa, "r0": res.r0, "iterations": res.iterations,
                   "history": res.history})
    rows = [[h["iteration"], h["kappa"], h["r0"], h["residual"]] for h in res.history]
    return Output(record, ["iteration", "kappa", "r0", "residual"], rows)


def cmd_tf_fireball(a) -> Output:
    kw = {k: getattr(a, k) for k in ("zeta", "b", "e", "mu_e", "rho_ion") if getattr(a, k) is not None}
    params = tf.TFParams(Q=a.Q, R=a.R, **kw)
    res = tf.shielding_iteration(params, kappa=a.kappa, r0=a.r0, tol=a.tol, max_iter=a.max_iter)
    return _shielding_output(res)


def cmd_tf_manufactured(a) -> Output:
    prob = tf.manufacture_problem(R=a.R, r0=a.r0, z_inner=a.z_inner, kappa=a.kappa)
    res = tf.shielding_iteration(prob.params)
    return _shielding_output(res, {"true_kappa": prob.kappa, "true_r0": prob.r0,
                                   "e": prob.params.e, "zeta": prob.params.zeta,
                                   "mu_e": prob.params.mu_e})


def cmd_geo_force(a) -> Output:
    record = {"psi": a.psi, "closed_form": geodesic.point_circle_force(a.psi),
              "quadrature": geodesic.point_circle_force_quadrature(a.psi, a.nodes)}
    return Output(record, list(record), [list(record.values())])


def cmd_geo_torque(a) -> Output:
    record = {"theta": a.theta, "closed_form": geodesic.circle_circle_torque(a.theta),
              "potential": geodesic.circle_circle_potential(a.theta),
              "quadrature": geodesic.circle_circle_torque_quadrature(a.theta, a.nodes)}
    return Output(record, list(record), [list(record.values())])


def cmd_geo_nbody(a) -> Output:
    if a.state:
        with open(a.state) as fh:
            cfg = geodesic.RP2Configuration.from_record(json.load(fh))
    else:
        cfg = geodesic.RP2Configuration.random(a.n, seed=a.seed, speed=a.speed, g=a.g, gamma=a.gamma)
    dt = a.dt if a.dt is not None else geodesic.guarded_dt(cfg)
    res = geodesic.simulate(cfg, dt, a.steps, order=a.order, record_every=a.record_every, mode=a.mode)
    record = {"dt": dt, "steps": a.steps, "relative_drift": res.relative_drift,
              "rejections": res.rejections, "initial": cfg.to_record(),
              "final": res.config.to_record(), "energy_first": res.energies[0],
              "energy_last": res.energies[-1]}
    header = ["t", "body", "x", "y", "z"]
    rows = [[t, i, *q] for t, frame in zip(res.traj_times, res.trajectory) for i, q in enumerate(frame)]
    return Output(record, header, rows)


def cmd_geo_spectrum(a) -> Output:
    levels = geodesic.free_spectrum(a.gamma, a.l_max)
    rows = [[l, s, m, math.sqrt(s)] for l, s, m in levels]
    record = [{"l": l, "sigma": s, "multiplicity": m, "frequency": w} for l, s, m, w in rows]
    return Output(record, ["l", "sigma", "multiplicity", "frequency"], rows)


def cmd_selftest(a) -> Output:
    from . import acceptance

    only = a.only or None
    outcomes = acceptance.run_all(only=only, inject=a.inject or [])
    record = {"passed": all(o.passed for o in outcomes),
              "criteria": [{"id": o.key, "name": o.name, "passed": o.passed,
                            "seconds": round(o.elapsed, 3), "detail": o.detail} for o in outcomes]}
    rows = [[o.key, o.name, "PASS" if o.passed else "FAIL", o.detail] for o in outcomes]
    return Output(record, ["id", "name", "status", "detail"], rows)


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def build_parser():
    """Return ``(parser, leaves)``; ``leaves`` maps command paths to their parsers."""
    p = _Parser(prog="spheronlab", description="Spectral, pairing, Thomas-Fermi and RP^2 solvers.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", default=None)
    p.add_argument("--config", default=None)
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    leaves = {}

    def leaf(parent, name, func, help_text):
        q = parent.add_parser(name, help=help_text, description=help_text)
        _common(q)
        q.set_defaults(func=func)
        return q

    s = leaf(sub, "spectrum", cmd_spectrum, "latitude eigenproblem and travelling-wave dispersion")
    s.add_argument("--U", type=float)
    s.add_argument("--n", type=int, help="azimuthal wave number (uses U = n^2 beta)")
    s.add_argument("--beta", type=float)
    s.add_argument("--R", type=float)
    s.add_argument("--count", type=int, default=4)
    s.add_argument("--nodes", type=int, default=1000)
    s.add_argument("--no-refine", action="store_true", help="skip two-grid extrapolation")
    s.add_argument("--samples", action="store_true", help="include eigenfunction samples")
    leaves[("spectrum",)] = s

    mem = sub.add_parser("membrane", help="membrane curvature, modal dynamics and stability")
    msub = mem.add_subparsers(dest="sub", metavar="subcommand", parser_class=_Parser)
    m = leaf(msub, "evolve", cmd_membrane_evolve, "closed-form modal evolution")
    m.add_argument("--l-max", type=int, default=4)
    m.add_argument("--t", type=float, default=1.0)
    m.add_argument("--samples", type=int, default=11)
    m.add_argument("--beta", type=float)
    m.add_argument("--R", type=float)
    m.add_argument("--state", help="JSON file with a modal state")
    m.add_argument("--excite", type=_ints, help="l,m of a single excited mode")
    m.add_argument("--amplitude", type=float, default=1.0)
    leaves[("membrane", "evolve")] = m
    m = leaf(msub, "stability", cmd_membrane_stability, "eigenvalues of the truncated first-order system")
    m.add_argument("--l-max", type=int, default=8)
    leaves[("membrane", "stability")] = m
    m = leaf(msub, "curvature", cmd_membrane_curvature, "linearized vs exact curvature of an inflated sphere")
    m.add_argument("--eps", type=float, default=1e-3)
    m.add_argument("--R", type=float, default=1.0)
    m.add_argument("--n-phi", type=int, default=32)
    m.add_argument("--n-psi", type=int, default=17)
    leaves[("membrane", "curvature")] = m

    fk = sub.add_parser("fock", help="ladder algebra, oscillator spectra, interaction matrices")
    fsub = fk.add_subparsers(dest="sub", metavar="subcommand", parser_class=_Parser)
    f = leaf(fsub, "ladder", cmd_fock_ladder, "truncated commutator defect")
    f.add_argument("--n-max", type=int, default=8)
    leaves[("fock", "ladder")] = f
    f = leaf(fsub, "spectrum", cmd_fock_spectrum, "oscillator ladder (n + 1/2) omega")
    f.add_argument("--freq", type=float, default=1.0)
    f.add_argument("--n-max", type=int, default=8)
    leaves[("fock", "spectrum")] = f
    f = leaf(fsub, "hamiltonian", cmd_fock_hamiltonian, "free field ground energy over even degrees")
    f.add_argument("--degrees", type=_ints, default=[2])
    leaves[("fock", "hamiltonian")] = f
    f = leaf(fsub, "interaction", cmd_fock_interaction, "switch-back exchange between two modes")
    f.add_argument("--l1", type=int, default=2)
    f.add_argument("--m1", type=int, default=0)
    f.add_argument("--l2", type=int, default=2)
    f.add_argument("--m2", type=int, default=1)
    f.add_argument("--n-max", type=int, default=3)
    f.add_argument("--W", type=float, default=0.1)
    leaves[("fock", "interaction")] = f

    b = leaf(sub, "blockspec", cmd_blockspec, "spectrum of [[diag(b), -W], [-W, diag(b)]]")
    b.add_argument("--diag", type=_floats, required=True)
    b.add_argument("--W", type=float, required=True)
    b.add_argument("--polarize", action="store_true")
    leaves[("blockspec",)] = b

    gp = sub.add_parser("gap", help="pairing gap and plasma frequency")
    gsub = gp.add_subparsers(dest="sub", metavar="subcommand", parser_class=_Parser)
    g = leaf(gsub, "discrete", cmd_gap_discrete, "gap of a finite level set")
    g.add_argument("--eps", type=_floats)
    g.add_argument("--levels", help="CSV or text file of level energies")
    g.add_argument("--W", type=float, required=True)
    leaves[("gap", "discrete")] = g
    g = leaf(gsub, "integral", cmd_gap_integral, "gap of a constant density of levels")
    g.add_argument("--W", type=float, required=True)
    g.add_argument("--nu", type=float, required=True)
    g.add_argument("--eps-max", type=float, required=True)
    g.add_argument("--no-verify", action="store_true", help="skip the quadrature check")
    leaves[("gap", "integral")] = g
    g = leaf(gsub, "langmuir", cmd_gap_langmuir, "plasma frequency and penetration depth (cgs)")
    g.add_argument("--n", type=float, required=True, help="electron density in cm^-3")
    g.add_argument("--e", type=float)
    g.add_argument("--m", type=float)
    leaves[("gap", "langmuir")] = g

    tp = sub.add_parser("tf", help="Thomas-Fermi atom, phase portrait and fireball")
    tsub = tp.add_subparsers(dest="sub", metavar="subcommand", parser_class=_Parser)
    t = leaf(tsub, "atom", cmd_tf_atom, "separatrix f(0) = 1, f -> 0 by shooting")
    t.add_argument("--horizon", type=float, default=1e4)
    t.add_argument("--tolerance", type=float, default=1e-12)
    t.add_argument("--profile", action="store_true", help="include x, f, g samples in JSON")
    leaves[("tf", "atom")] = t
    t = leaf(tsub, "portrait", cmd_tf_portrait, "fixed points, vector field or a trajectory")
    t.add_argument("--y", type=float)
    t.add_argument("--z", type=float)
    t.add_argument("--rho", type=float, default=1.0, help="log-radius span of the trajectory")
    t.add_argument("--samples", type=int, default=21)
    leaves[("tf", "portrait")] = t
    t = leaf(tsub, "fireball", cmd_tf_fireball, "self-consistent shielding of a charged kernel")
    for name in ("Q", "R"):
        t.add_argument(f"--{name}", type=float, required=True)
    for name in ("zeta", "b", "e", "mu-e", "rho-ion"):
        t.add_argument(f"--{name}", type=float)
    t.add_argument("--kappa", type=float, default=1.0)
    t.add_argument("--r0", type=float)
    t.add_argument("--tol", type=float, default=1e-12)
    t.add_argument("--max-iter", type=int, default=50)
    leaves[("tf", "fireball")] = t
    t = leaf(tsub, "manufactured", cmd_tf_manufactured, "fireball problem with a known solution")
    t.add_argument("--R", type=float, default=10.0)
    t.add_argument("--r0", type=float, default=0.125)
    t.add_argument("--z-inner", type=float, default=-2000.0)
    t.add_argument("--kappa", type=float, default=0.8)
    leaves[("tf", "manufactured")] = t

    gg = sub.add_parser("geo", help="geodesic interactions and RP^2 dynamics")
    ggsub = gg.add_subparsers(dest="sub", metavar="subcommand", parser_class=_Parser)
    q = leaf(ggsub, "force", cmd_geo_force, "point-circle force")
    q.add_argument("--psi", type=float, required=True)
    q.add_argument("--nodes", type=int, default=2048)
    leaves[("geo", "force")] = q
    q = leaf(ggsub, "torque", cmd_geo_torque, "circle-circle torque and potential")
    q.add_argument("--theta", type=float, required=True)
    q.add_argument("--nodes", type=int, default=2048)
    leaves[("geo", "torque")] = q
    q = leaf(ggsub, "nbody", cmd_geo_nbody, "N quasi-particles on RP^2")
    q.add_argument("--state", help="JSON file with points, velocities, g, gamma")
    q.add_argument("--n", type=int, default=3)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--speed", type=float, default=0.1)
    q.add_argument("--g", type=float, default=1.0)
    q.add_argument("--gamma", type=float, default=1.0)
    q.add_argument("--dt", type=float)
    q.add_argument("--steps", type=int, default=1000)
    q.add_argument("--order", type=int, choices=(2, 4), default=4)
    q.add_argument("--record-every", type=int, default=100)
    q.add_argument("--mode", choices=("hamiltonian", "gradient"), default="hamiltonian")
    leaves[("geo", "nbody")] = q
    q = leaf(ggsub, "spectrum", cmd_geo_spectrum, "free quasi-particle levels")
    q.add_argument("--gamma", type=float, default=1.0)
    q.add_argument("--l-max", type=int, default=10)
    leaves[("geo", "spectrum")] = q

    st = leaf(sub, "selftest", cmd_selftest, "run the acceptance criteria")
    st.add_argument("--only", type=_ints, help="comma-separated criterion ids")
    st.add_argument("--inject", type=_ints, help="force these criteria to fail (harness check)")
    leaves[("selftest",)] = st
    return p, leaves


# --------------------------------------------------------------------------
# config files
# --------------------------------------------------------------------------

def read_config(path: str) -> dict:
    with open(path) as fh:
        text = fh.read()
    stripped = text.strip()
    if stripped.startswith("{"):
        data = json.loads(stripped)
        if not isinstance(data, dict):
            raise UsageError("JSON config must be an object")
        return data
    data = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        data[key] = value
    return data


def _config_tokens(data: dict, parser) -> list[str]:
    known = {}
    for action in parser._actions:
        for opt in action.option_strings:
            if opt.startswith("--"):
                known[opt[2:]] = action
    tokens = []
    for key, value in data.items():
        name = str(key).replace("_", "-")
        if name in ("config", "help") or name not in known:
            raise UsageError(f"unknown config key {key!r}")
        action = known[name]
        if action.nargs == 0:
            flag = value if isinstance(value, bool) else str(value).lower() in ("1", "true", "yes", "on")
            if flag:
                tokens.append(f"--{name}")
            continue
        if isinstance(value, (list, tuple)):
            value = ",".join(str(v) for v in value)
        tokens.append(f"--{name}={value}")
    return tokens


def _split_config(argv: list[str]):
    out, path = [], None
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok == "--config":
            if i + 1 >= len(argv):
                raise UsageError("--config needs a file name")
            path = argv[i + 1]
            i += 2
            continue
        if tok.startswith("--config="):
            path = tok.split("=", 1)[1]
        else:
            out.append(tok)
        i += 1
    return out, path


def _command_path(argv: list[str], leaves) -> tuple[tuple, int]:
    """Locate the command path tokens; returns (path, index after the path)."""
    firsts = {k[0] for k in leaves}
    for i, tok in enumerate(argv):
        if tok in firsts:
            if (tok,) in leaves:
                return (tok,), i + 1
            if i + 1 < len(argv) and (tok, argv[i + 1]) in leaves:
                return (tok, argv[i + 1]), i + 2
            return (tok,), i + 1
    return (), len(argv)


def parse(argv: list[str]):
    parser, leaves = build_parser()
    argv, config_path = _split_config(list(argv))
    if config_path is not None:
        path, end = _command_path(argv, leaves)
        if path not in leaves:
            raise UsageError("--config needs a complete command")
        tokens = _config_tokens(read_config(config_path), leaves[path])
        argv = argv[:end] + tokens + argv[end:]
    args = parser.parse_args(argv)
    if not getattr(args, "func", None):
        raise UsageError("missing command; see --help")
    return args


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

def _emit(out: Output, fmt: str) -> str:
    if fmt == "json":
        return sio.dumps(out.record)
    if out.header is None:
        raise UsageError("this command has no CSV form")
    return sio.csv_text(out.header, out.rows)


def _error(kind: str, exc: BaseException) -> None:
    rec = {"error": kind, "type": type(exc).__name__, "message": str(exc)}
    sys.stderr.write(json.dumps(rec) + "\n")


def main(argv=None) -> int:
    apply_thread_cap()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse(argv)
    except UsageError as exc:
        _error("usage", exc)
        return 2
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    except (OSError, ValueError) as exc:
        _error("config", exc)
        return 2
    try:
        out = args.func(args)
        text = _emit(out, args.format)
    except UsageError as exc:
        _error("usage", exc)
        return 2
    except Exception as exc:  # solver diagnostics pass through verbatim
        _error("solver", exc)
        return 1
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.command == "selftest":
        # human-readable table on stderr; the machine record went to stdout
        for row in out.rows:
            sys.stderr.write(f"[{row[2]}] {row[0]:2d} {row[1]}\n")
        return 0 if out.record["passed"] else 1
    return 0


def run_capture(argv) -> tuple[int, str]:
    """Run :func:`main` in-process; returns ``(exit code, stdout text)``."""
    buf, err = _io.StringIO(), _io.StringIO()
    with contextlib.redirect_stdout(buf), contextlib.redirect_stderr(err):
        code = main(argv)
    return code, buf.getvalue()

"""Time the numba kernels against their pure-numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5] [--bodies 8] [--steps 2000]

Each kernel is run with SPHERONLAB_NUMBA=1 and =0 on identical inputs; the
first numba call (compilation) is excluded.  Outputs of the two backends are
compared so a speedup is never reported for diverging results.
"""
from __future__ import annotations

import argparse
import os
import timeit

import numpy as np

from spheronlab import kernels
from spheronlab._accel import HAVE_NUMBA


def _inputs(bodies: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    q = rng.normal(size=(bodies, 3))
    q /= np.linalg.norm(q, axis=1)[:, None]
    v = rng.normal(size=(bodies, 3)) * 0.05
    v -= np.einsum("ij,ij->i", v, q)[:, None] * q
    t = rng.uniform(size=(20000, 5))
    eps = np.linspace(0.0, 1.0, 5)
    return q, v, t, eps


def _cases(bodies: int, steps: int):
    q, v, t, eps = _inputs(bodies)
    dt = 1e-4
    return {
        "rp2_forces": lambda: kernels.rp2_forces(q, 1.0),
        "rattle_run": lambda: kernels.rattle_run(q, v, 1.0, 1.0, dt, steps, 4, 1e-3, 1e-6, steps),
        "pairing_energy_batch": lambda: kernels.pairing_energy_batch(t, eps, 0.8),
    }


def _first_array(result):
    return np.asarray(result[0] if isinstance(result, tuple) else result, dtype=float)


def run(repeat: int = 5, bodies: int = 8, steps: int = 2000):
    rows = []
    for name in _cases(bodies, steps):
        timings, outputs = {}, {}
        for backend in ("numba", "numpy"):
            if backend == "numba" and not HAVE_NUMBA:
                continue
            os.environ["SPHERONLAB_NUMBA"] = "1" if backend == "numba" else "0"
            fn = _cases(bodies, steps)[name]
            outputs[backend] = _first_array(fn())  # warm-up / compile
            number = 1 if name == "rattle_run" and backend == "numpy" else 3
            timings[backend] = min(timeit.repeat(fn, number=number, repeat=repeat)) / number
        agree = (float(np.max(np.abs(outputs["numba"] - outputs["numpy"])))
                 if len(outputs) == 2 else float("nan"))
        rows.append((name, timings.get("numba", float("nan")), timings["numpy"], agree))
    os.environ.pop("SPHERONLAB_NUMBA", None)
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--bodies", type=int, default=8)
    ap.add_argument("--steps", type=int, default=2000)
    a = ap.parse_args()
    print(f"{'kernel':<22}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}{'max |diff|':>12}")
    for name, t_nb, t_np, diff in run(a.repeat, a.bodies, a.steps):
        print(f"{name:<22}{t_nb:>12.3e}{t_np:>12.3e}{t_np / t_nb:>10.1f}{diff:>12.2e}")


if __name__ == "__main__":
    main()

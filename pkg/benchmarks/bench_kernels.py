"""Timing comparison of the propagation backends.

Runs the same fixed-step propagation through the compiled engine and the numpy
reference engine, checks that they produce the same state, and reports steps
per second plus the speedup.  The compiled backend is skipped with a notice
when the extension is not built.

Usage:
    python3 benchmarks/bench_kernels.py [--atoms N] [--cutoff NMAX]
                                        [--steps K] [--repeats R] [--decay]
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from cavitas.hilbert import FockCutoff, coherent_field_state, product_state
from cavitas.kernels import COMPILED, _pure
from cavitas.su2 import SpinQuantum

if COMPILED:
    from cavitas.kernels import _core


def build_engine(module, args: argparse.Namespace, dt: float, decay: np.ndarray):
    spin = SpinQuantum(args.atoms)
    return module.StepEngine(spin.ladder_coupling(), decay, 1.0, dt)


def initial_amps(args: argparse.Namespace) -> np.ndarray:
    spin = SpinQuantum(args.atoms)
    cut = FockCutoff(args.cutoff)
    atomic = np.zeros(spin.dim)
    atomic[-1] = 1.0
    # Coherent tail stays well inside the truncation at nbar = cutoff / 4.
    field = coherent_field_state(math.sqrt(0.25 * args.cutoff), cut)
    return product_state(atomic, field, spin, cut).amps


def time_run(module, args: argparse.Namespace, dt: float, decay: np.ndarray, amps: np.ndarray):
    best = math.inf
    final = None
    for _ in range(args.repeats):
        eng = build_engine(module, args, dt, decay)
        eng.set_state(amps)
        t0 = time.perf_counter()
        eng.run(args.steps)
        best = min(best, time.perf_counter() - t0)
        final = eng.get_state()
    return best, final


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--atoms", type=int, default=2, help="atom count (default 2)")
    parser.add_argument("--cutoff", type=int, default=56, help="Fock truncation (default 56)")
    parser.add_argument("--steps", type=int, default=20000, help="propagation steps (default 20000)")
    parser.add_argument("--repeats", type=int, default=3, help="timing repeats, best kept (default 3)")
    parser.add_argument("--decay", action="store_true", help="include a nonzero decay vector")
    args = parser.parse_args()

    dt = 0.04 / math.sqrt(args.cutoff)
    fock_dim = FockCutoff(args.cutoff).dim
    decay = 0.002 * np.arange(fock_dim, dtype=float) if args.decay else np.zeros(fock_dim)
    amps = initial_amps(args)
    dim = amps.size

    print(f"atoms={args.atoms} cutoff={args.cutoff} dim={dim} steps={args.steps} dt={dt:.5f}")
    t_pure, y_pure = time_run(_pure, args, dt, decay, amps)
    print(f"pure:     {t_pure:8.3f} s   {args.steps / t_pure:12.0f} steps/s")
    if not COMPILED:
        print("compiled: not built (install with the Cython extension to compare)")
        return 0
    t_core, y_core = time_run(_core, args, dt, decay, amps)
    print(f"compiled: {t_core:8.3f} s   {args.steps / t_core:12.0f} steps/s")
    diff = float(np.abs(y_core - y_pure).max())
    print(f"speedup:  {t_pure / t_core:8.2f} x   max state difference {diff:.2e}")
    return 0 if diff < 1e-10 else 1


if __name__ == "__main__":
    raise SystemExit(main())

"""Time the compiled and numpy W_{n,m} fill kernels on the same inputs.

    python benchmarks/bench_wfill.py --repeat 5
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from relphase import _wfill_py
from relphase.phasespace import build_kernels, qudit_torus, sphere
from relphase.phasespace.functional import rotated_kernels
from relphase.coherence import SystemModel
from relphase.histories import TemporalGrid
from relphase.sampling import random_density, random_hamiltonian

try:
    from relphase import _wfill as _compiled
except ImportError:
    _compiled = None


def inputs(space, n: int, m: int, seed: int):
    rng = np.random.default_rng(seed)
    d = space.dim
    grid = TemporalGrid(tuple(0.3 * i for i in range(max(n, m, 1))))
    model = SystemModel(random_density(rng, d), random_hamiltonian(rng, d), grid)
    k = build_kernels(space)

    def stack(c):
        if not c:
            return np.zeros((0, space.size, d, d), dtype=complex)
        return np.stack([rotated_kernels(model, k, t) for t in grid.times[:c]])

    return stack(n), np.ascontiguousarray(model.rho.matrix), stack(m)


def best_of(fn, args, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    cases = [
        (sphere("1/2"), 1, 1), (sphere("1/2"), 2, 2), (sphere(1), 2, 1),
        (sphere(1), 2, 2), (qudit_torus(3), 2, 2), (qudit_torus(5), 2, 1),
    ]
    print(f"{'space':<20} {'n':>2} {'m':>2} {'entries':>9} {'numpy_s':>10} {'cython_s':>10} {'speedup':>8} {'max_diff':>9}")
    for space, n, m in cases:
        a = inputs(space, n, m, args.seed)
        t_py = best_of(_wfill_py.fill_w, a, args.repeat)
        ref = _wfill_py.fill_w(*a)
        if _compiled is not None:
            t_cy = best_of(_compiled.fill_w, a, args.repeat)
            diff = float(np.max(np.abs(np.asarray(_compiled.fill_w(*a)) - ref)))
            tail = f"{t_cy:>10.4f} {t_py / t_cy:>8.2f} {diff:>9.1e}"
        else:
            tail = f"{'n/a':>10} {'n/a':>8} {'n/a':>9}"
        print(f"{space.label():<20} {n:>2} {m:>2} {ref.size:>9} {t_py:>10.4f} {tail}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

"""Compare the numba and numpy kernel backends on representative workloads.

Run with ``python -m greenline.bench``.  Both backends are called directly,
so the ``GREENLINE_NUMBA`` flag does not matter here.  The first numba call
of each kernel is a warm-up (JIT compile or cache load) and is not timed.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from . import _kernels


def _best(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _workloads(grid: int, atoms: int, iters: int, rng):
    # z^2 - 1 as a homogeneous lift (F0 = p0^2, F1 = p1^2 - p0^2)
    f0 = np.array([1, 0, 0], dtype=np.complex128)
    f1 = np.array([-1, 0, 1], dtype=np.complex128)
    xs = np.linspace(-2, 2, grid)
    zz = (xs[None, :] + 1j * xs[:, None]).ravel()
    p0 = np.ones_like(zz)
    a = rng.standard_normal(atoms) + 1j * rng.standard_normal(atoms)
    m = np.full(atoms, 1.0 / atoms)
    probes = rng.standard_normal(atoms) + 1j * rng.standard_normal(atoms)
    return {
        f"escape grid {grid}x{grid}, {iters} iterations": (
            lambda: _kernels.escape_sum_numba(f0, f1, p0, zz, iters),
            lambda: _kernels.escape_sum_numpy(f0, f1, p0, zz, iters),
            lambda r: r[0]),
        f"pair energy {atoms} atoms": (
            lambda: _kernels.pair_energy_numba(a, m),
            lambda: _kernels.pair_energy_numpy(a, m),
            lambda r: np.array([r[0]])),
        f"log potential {atoms} x {atoms}": (
            lambda: _kernels.log_potential_numba(a, m, probes, False),
            lambda: _kernels.log_potential_numpy(a, m, probes, False),
            lambda r: r[0]),
    }


def run(grid: int = 512, atoms: int = 4096, iters: int = 40, repeat: int = 3, seed: int = 0) -> list[dict]:
    if _kernels.numba is None:
        raise RuntimeError("numba is not installed")
    rng = np.random.default_rng(seed)
    rows = []
    for name, (fast, slow, key) in _workloads(grid, atoms, iters, rng).items():
        r_fast = fast()  # warm-up
        r_slow = slow()
        diff = float(np.max(np.abs(key(r_fast) - key(r_slow))))
        t_fast = _best(fast, repeat)
        t_slow = _best(slow, repeat)
        rows.append({"workload": name, "numba_s": t_fast, "numpy_s": t_slow,
                     "speedup": t_slow / t_fast, "max_abs_diff": diff})
    return rows


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="python -m greenline.bench", description=__doc__.splitlines()[0])
    ap.add_argument("--grid", type=int, default=512)
    ap.add_argument("--atoms", type=int, default=4096)
    ap.add_argument("--iters", type=int, default=40)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    rows = run(args.grid, args.atoms, args.iters, args.repeat)
    print(f"{'workload':<40} {'numba [s]':>10} {'numpy [s]':>10} {'speedup':>8} {'max|diff|':>10}")
    for r in rows:
        print(f"{r['workload']:<40} {r['numba_s']:>10.4f} {r['numpy_s']:>10.4f} "
              f"{r['speedup']:>8.2f} {r['max_abs_diff']:>10.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

"""Compare the numba and numpy versions of the hot kernels.

Both implementations are called directly (the env flag only picks the
default), on inputs sized like the acceptance runs, and their outputs are
checked against each other before timing.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from boundstate_lab import _backend as kb
from boundstate_lab.fockspace import LatticeConfig, PairPotential, enumerate_basis


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--sites", type=int, default=12)
    args = ap.parse_args()
    if not kb.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    L = args.sites
    cfg = LatticeConfig(L, PairPotential.square_well(L, 8.0, 1, repulsion=1.0))
    states = np.ascontiguousarray(enumerate_basis(cfg, 2, 2).basis, dtype=np.int64)
    pot = cfg.potential
    rng = np.random.default_rng(0)
    w = rng.random((800, 800))
    w[w < 0.3] = 0.0
    ea = np.sort(rng.uniform(-0.5, 100.0, 800))
    eb = ea.copy()

    cases = {
        "fermion_entries": (
            lambda: kb._fermion_entries_jit(states, L + 3, True),
            lambda: kb._fermion_entries_np(states, L + 3, True),
        ),
        "density_energy": (
            lambda: kb._density_energy_jit(states, L, pot.v11, pot.v22, pot.v12),
            lambda: kb._density_energy_np(states, L, pot.v11, pot.v22, pot.v12),
        ),
        "gap_weighted_sum": (
            lambda: kb._gap_sum_jit(w, ea, eb, -1.0, 0, 0),
            lambda: kb._gap_sum_np(w, ea, eb, -1.0, 0, 0),
        ),
    }
    print(f"basis size {states.size}, sum size {w.size}")
    print(f"{'kernel':<18}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for name, (fast, slow) in cases.items():
        a, b = fast(), slow()  # also triggers compilation
        a = a if isinstance(a, tuple) else (a,)
        b = b if isinstance(b, tuple) else (b,)
        for x, y in zip(a, b):
            np.testing.assert_allclose(np.asarray(x, dtype=float), np.asarray(y, dtype=float), rtol=1e-10, atol=1e-14)
        tf, ts = best_of(fast, args.repeat), best_of(slow, args.repeat)
        print(f"{name:<18}{tf * 1e3:>12.3f}{ts * 1e3:>12.3f}{ts / tf:>10.1f}")


if __name__ == "__main__":
    main()

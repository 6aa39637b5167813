#!/usr/bin/env python3
"""Benchmark the compiled queue kernel against the pure-Python fallback.

Runs the same scenarios through both kernels, checks that the trajectories
are bit-identical, and reports wall time and jump throughput.

    python3 benchmarks/bench_queue.py [--horizon 1e6] [--repeat 3]
"""

import argparse
import math
import time

import numpy as np

from ecomp.queueing import QueueScenario, simulate

SCENARIOS = [
    ("id", 0.5, 1.0),
    ("ratio:1.0", 0.5, 1.0),
    ("power:2.0", 2.0, 1.0),
]


def _time(sc: QueueScenario, kernel: str, repeat: int):
    best = math.inf
    res = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        res = simulate(sc, kernel=kernel)
        best = min(best, time.perf_counter() - t0)
    return best, res


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--horizon", type=float, default=1e6)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()

    try:
        from ecomp import _queue_kernel  # noqa: F401
        have_compiled = True
    except ImportError:
        have_compiled = False
        print("compiled extension not built; timing the python kernel only\n")

    header = f"{'scenario':24s} {'kernel':9s} {'time':>9s} {'jumps':>10s} {'Mjumps/s':>9s}"
    print(header)
    print("-" * len(header))
    for sid, lam, mu in SCENARIOS:
        sc = QueueScenario(lam, mu, sid, horizon=args.horizon, seed=args.seed)
        label = f"{sid} rho={lam / mu:g}"
        t_py, res_py = _time(sc, "python", args.repeat)
        rate = res_py.jumps / t_py / 1e6
        print(f"{label:24s} {'python':9s} {t_py:8.3f}s {res_py.jumps:10d} {rate:9.2f}")
        if have_compiled:
            t_c, res_c = _time(sc, "compiled", args.repeat)
            rate = res_c.jumps / t_c / 1e6
            print(f"{label:24s} {'compiled':9s} {t_c:8.3f}s {res_c.jumps:10d} {rate:9.2f}")
            identical = (
                np.array_equal(res_py.occupancy, res_c.occupancy)
                and res_py.jumps == res_c.jumps
                and res_py.final_states == res_c.final_states
            )
            if not identical:
                print(f"{label}: KERNELS DISAGREE")
                return 1
            print(f"{label:24s} parity ok, speedup {t_py / t_c:.1f}x")
        print()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Runs identical workloads through both backends, reports per-path timings and
the speedup, and cross-checks that both produce the same trajectories (they
consume identical random streams).

Usage:  python benchmarks/compare_backends.py [--paths 64] [--steps 20000]
"""

import argparse
import time

import numpy as np

from dopocim._backend import kernels
from dopocim.continuous import sample_initial_state
from dopocim.discrete import ring_coupling
from dopocim.streams import derive_stream


def _gens(seed, n):
    return [derive_stream(seed, i, "path").generator for i in range(n)]


def _a0(seed, n, modes, g):
    return np.array(
        [sample_initial_state("wigner", modes, g, derive_stream(seed, i, "init")) for i in range(n)]
    )


def workloads(paths, steps):
    e = 1.5 * np.arange(steps) / 200_000.0
    samples = np.arange(0, steps + 1, max(1, steps // 10), dtype=np.int64)
    rounds = max(10, steps // 40)
    sample_rounds = np.arange(0, rounds + 1, max(1, rounds // 5), dtype=np.int64)
    return [
        (
            "wigner_two (xi=0.6)",
            "run_wigner_two",
            lambda: (_gens(1, paths), _a0(1, paths, 2, 0.01)),
            (e, 0.6, 0.01, 1e-3, 1.0, 1.0, -1.0, samples, 1e3),
        ),
        (
            "positive_p_two",
            "run_positive_p_two",
            lambda: (_gens(2, paths), np.zeros((paths, 4), complex)),
            (e, 0.6, 0.01, 1e-3, -1.0, samples, 1e3),
        ),
        (
            "wigner_ring (N=16)",
            "run_wigner_ring",
            lambda: (_gens(3, paths), _a0(3, paths, 16, 0.01)),
            (e, 0.4, 0.01, 1e-3, 1.0, 1.0, -1.0, samples, 1e3),
        ),
        (
            "discrete (N=16)",
            "run_discrete",
            lambda: (_gens(4, paths), _a0(4, paths, 16, 0.01)),
            (0.04, 0.01, 0.1, 1e-4, 1, False, 0.25, 0.25, ring_coupling(16), rounds, sample_rounds, -1, -1, 1.0, 1e3),
        ),
    ]


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--paths", type=int, default=64)
    parser.add_argument("--steps", type=int, default=20_000)
    args = parser.parse_args()

    try:
        kc = kernels("c")
    except RuntimeError:
        raise SystemExit("compiled kernels are not built; nothing to compare")
    kp = kernels("python")

    print(f"{'model':24s} {'compiled':>12s} {'fallback':>12s} {'speedup':>8s}  agreement")
    for name, fn, make_inputs, params in workloads(args.paths, args.steps):
        results = {}
        times = {}
        for label, kern in (("c", kc), ("py", kp)):
            gens, a0 = make_inputs()
            t0 = time.perf_counter()
            results[label] = getattr(kern, fn)(gens, a0, *params)
            times[label] = time.perf_counter() - t0
        sc, sp = results["c"][0], results["py"][0]
        agree = np.allclose(np.nan_to_num(sc), np.nan_to_num(sp), rtol=0.0, atol=1e-7)
        per_path_c = times["c"] / args.paths * 1e3
        per_path_p = times["py"] / args.paths * 1e3
        print(
            f"{name:24s} {per_path_c:9.2f} ms {per_path_p:9.2f} ms "
            f"{times['py'] / times['c']:7.1f}x  {'ok' if agree else 'MISMATCH'}"
        )


if __name__ == "__main__":
    main()

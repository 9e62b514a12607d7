#!/usr/bin/env python3
"""Benchmark the JIT-compiled feature kernels against the pure-numpy path.

The workload mirrors a redesign search: one features_batch call per axis
permutation (56 candidate groups each). The pure path is the identical
source with numba disabled (GROUPSENSE_NUMBA=0), measured in a subprocess
so the whole kernel stack, inner helpers included, runs uncompiled.

    python3 benchmarks/bench_kernels.py [--perms 720] [--repeat 3]
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def build_workload(perms: int):
    from groupsense.chart import generate_random_chart, layout
    from groupsense.diagnose import enumerate_candidates
    from groupsense.geometry import group_masks

    chart = generate_random_chart(6, seed=0)
    lay = layout(chart)
    masks = group_masks(chart, enumerate_candidates(chart))
    rng = np.random.default_rng(1)
    ys_variants = [rng.permutation(lay.ys) for _ in range(perms)]
    return lay.xs, ys_variants, masks


def measure(perms: int, repeat: int) -> float:
    from groupsense import kernels

    xs, ys_variants, masks = build_workload(perms)
    kernels.features_batch(xs, ys_variants[0], masks, 400.0, 300.0)  # warmup/compile

    def one_pass() -> float:
        t0 = time.perf_counter()
        sink = 0.0
        for ys in ys_variants:
            sink += kernels.features_batch(xs, ys, masks, 400.0, 300.0)[0, 0]
        elapsed = time.perf_counter() - t0
        assert np.isfinite(sink)
        return elapsed

    return min(one_pass() for _ in range(repeat))


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--perms", type=int, default=720,
                        help="feature-batch calls per pass (default: one full 6-point search)")
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.child:
        print(json.dumps(measure(args.perms, args.repeat)))
        return

    from groupsense import kernels

    groups_per_pass = args.perms * 56
    rows = []
    if kernels.NUMBA_ENABLED:
        rows.append(("numba @njit", measure(args.perms, args.repeat)))
    else:
        print("numba disabled in this process; measuring the pure path only\n")

    child_env = dict(os.environ, GROUPSENSE_NUMBA="0")
    out = subprocess.run(
        [sys.executable, __file__, "--child",
         "--perms", str(args.perms), "--repeat", str(args.repeat)],
        env=child_env, capture_output=True, text=True, check=True,
    )
    rows.append(("pure numpy", float(json.loads(out.stdout))))

    print(f"workload: {args.perms} permutations x 56 groups = "
          f"{groups_per_pass} feature vectors per pass (best of {args.repeat})\n")
    print(f"{'path':<12} {'total':>9} {'per group':>11} {'speedup':>9}")
    base = rows[-1][1]
    for name, secs in rows:
        print(f"{name:<12} {secs:>8.3f}s {secs / groups_per_pass * 1e6:>9.1f}us "
              f"{base / secs:>8.1f}x")


if __name__ == "__main__":
    main()

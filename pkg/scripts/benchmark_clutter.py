#!/usr/bin/env python3
"""Time the clutter filter on a large synthetic cloud.

Reports per-run wall times and the median for classify + intensity decision,
the real-time path of the pipeline.

    python scripts/benchmark_clutter.py --points 120000 --runs 9
"""

from __future__ import annotations

import argparse
import time

from envlabel.pointcloud import LidarSpec, classify_clutter, precipitation_intensity
from envlabel.synthetic import make_scene


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=120_000)
    parser.add_argument("--fraction", type=float, default=0.05)
    parser.add_argument("--runs", type=int, default=9)
    parser.add_argument("--seed", type=int, default=77)
    args = parser.parse_args()

    spec = LidarSpec()
    started = time.perf_counter()
    scene = make_scene(args.points, args.fraction, seed=args.seed)
    print(f"scene: {args.points} points, {scene.clutter_fraction:.3f} injected "
          f"({time.perf_counter() - started:.1f}s to generate)")

    classify_clutter(scene.cloud, spec)  # warm-up pays the one-time JIT
    timings = []
    for run in range(args.runs):
        t0 = time.perf_counter()
        result = classify_clutter(scene.cloud, spec)
        intensity = precipitation_intensity(result, spec)
        timings.append(time.perf_counter() - t0)
        print(f"run {run}: {timings[-1] * 1e3:7.1f} ms")
    timings.sort()
    print(f"median {timings[len(timings) // 2] * 1e3:.1f} ms, "
          f"fraction {result.fraction:.4f} -> {intensity.value}")


if __name__ == "__main__":
    main()

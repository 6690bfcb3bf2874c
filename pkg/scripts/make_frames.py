#!/usr/bin/env python3
"""Generate a synthetic frame dataset: clouds, images, and a manifest.

Each frame's point cloud is a structured scene with a known injected clutter
fraction, so downstream suggestions have a ground truth to compare against.

    python scripts/make_frames.py out/demo --frames 6 --points 20000
"""

from __future__ import annotations

import argparse

import numpy as np

from envlabel.synthetic import write_dataset_fixture


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("root", help="output directory")
    parser.add_argument("--frames", type=int, default=6)
    parser.add_argument("--points", type=int, default=20_000, help="points per cloud")
    parser.add_argument("--max-fraction", type=float, default=0.2,
                        help="largest injected clutter fraction")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    fractions = {}
    for index in range(args.frames):
        # Spread fractions across the range, boundary cases included.
        if index == 0:
            fraction = 0.0
        elif index == 1:
            fraction = 0.08
        else:
            fraction = round(float(rng.uniform(0.01, args.max_fraction)), 3)
        fractions[f"frame-{index:04d}"] = fraction

    manifest = write_dataset_fixture(
        args.root, fractions, n_points=args.points, seed=args.seed
    )
    print(f"wrote {len(fractions)} frames under {args.root}")
    for frame_id, fraction in sorted(fractions.items()):
        print(f"  {frame_id}: injected clutter {fraction:.3f}")
    print(f"manifest: {manifest}")


if __name__ == "__main__":
    main()

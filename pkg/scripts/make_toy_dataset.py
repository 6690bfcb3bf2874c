#!/usr/bin/env python3
"""Generate a separable synthetic dataset for the six-head toy trainer.

    python scripts/make_toy_dataset.py out/toy.jsonl --samples 600
"""

from __future__ import annotations

import argparse

from envlabel.trainer import make_separable_dataset, save_samples


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out", help="output JSONL path")
    parser.add_argument("--samples", type=int, default=600)
    parser.add_argument("--input-dim", type=int, default=16)
    parser.add_argument("--clusters", type=int, default=12)
    parser.add_argument("--noise", type=float, default=0.25)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    samples = make_separable_dataset(
        args.samples,
        input_dim=args.input_dim,
        n_clusters=args.clusters,
        noise=args.noise,
        seed=args.seed,
    )
    save_samples(samples, args.out)
    print(f"wrote {len(samples)} samples to {args.out}")


if __name__ == "__main__":
    main()

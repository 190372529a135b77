#!/usr/bin/env python3
"""Sweep the true failure rate across the threshold and tally verdicts.

Each grid cell feeds the sequential test synthetic Bernoulli batches at a
known rate, so the wrong-verdict frequency can be compared against alpha
directly. Rates well below kappa should land on w1, rates well above on
w0, and the band in between is allowed to stay inconclusive or split.
"""

import argparse
import sys

import numpy as np

from probcert import Observation, RobustnessSpec, sequential_decision

MULTIPLIERS = [0.0, 0.1, 0.2, 0.5, 0.8, 1.0, 1.25, 2.0, 5.0, 10.0]


def run_cell(p: float, spec: RobustnessSpec, streams: int, seed: int):
    counts = {obs: 0 for obs in Observation}
    total_samples = 0
    for i in range(streams):
        rng = np.random.default_rng((seed, int(round(p * 1e9)), i))
        obs, used, _, _, _ = sequential_decision(
            lambda m: int(rng.binomial(m, p)), spec
        )
        counts[obs] += 1
        total_samples += used
    return counts, total_samples / streams


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--kappa", type=float, default=0.01)
    parser.add_argument("--alpha", type=float, default=0.05)
    parser.add_argument("--streams", type=int, default=500)
    parser.add_argument("--batch-size", type=int, default=100)
    parser.add_argument("--max-samples", type=int, default=100_000)
    parser.add_argument("--strict-alpha", action="store_true")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    spec = RobustnessSpec(
        kappa=args.kappa,
        alpha=args.alpha,
        epsilon=0.1,
        batch_size=args.batch_size,
        max_samples=args.max_samples,
        strict_alpha=args.strict_alpha,
    )
    print(
        f"kappa={args.kappa} alpha={args.alpha} streams={args.streams} "
        f"batch={args.batch_size} max={args.max_samples} strict={args.strict_alpha}"
    )
    print(f"{'p_x/kappa':>10} {'p_x':>10} {'w1':>7} {'w0':>7} {'inconcl':>8} "
          f"{'wrong':>7} {'avg n':>10}")
    for mult in MULTIPLIERS:
        p = mult * args.kappa
        counts, avg_n = run_cell(p, spec, args.streams, args.seed)
        # a verdict is wrong when it lands on the far side of the threshold
        if p <= args.kappa:
            wrong = counts[Observation.W0]
        else:
            wrong = counts[Observation.W1]
        print(
            f"{mult:>10.2f} {p:>10.5f} {counts[Observation.W1]:>7} "
            f"{counts[Observation.W0]:>7} {counts[Observation.INCONCLUSIVE]:>8} "
            f"{wrong / args.streams:>7.4f} {avg_n:>10.1f}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())

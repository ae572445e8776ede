"""Time the baselines at 1200x1800 and extrapolate to a 64 MP sensor."""

import argparse

from quadremosaic.bench import extrapolate_seconds, render_runtime_table, time_algorithm
from quadremosaic.cli import bench_input
from quadremosaic.config import RunConfig
from quadremosaic.remosaic import registry_lookup


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--target-mp", type=float, default=64.0)
    args = ap.parse_args()

    cfg = RunConfig()
    quad = bench_input(1200, 1800, cfg)
    stats = [time_algorithm(registry_lookup(a), quad, args.reps, args.threads) for a in ("swap", "interp", "joint")]
    print(render_runtime_table(stats, args.target_mp), end="")

    # sanity line for the scaling rule itself
    print(f"\n1.0 s at 1200x1800 scales to {extrapolate_seconds(1.0, 1200 * 1800, args.target_mp):.2f} s")


if __name__ == "__main__":
    main()

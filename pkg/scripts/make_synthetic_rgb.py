"""Write a folder of synthetic gradient/texture scenes as 16-bit PNGs."""

import argparse
from pathlib import Path

from quadremosaic.io import write_png16
from quadremosaic.sim import synthetic_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out_dir", type=Path)
    ap.add_argument("--count", type=int, default=10)
    ap.add_argument("--size", type=int, nargs=2, default=(256, 256), metavar=("H", "W"))
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    for name, rgb in synthetic_suite(args.count, *args.size, seed=args.seed):
        write_png16(rgb, args.out_dir / f"{name}.png")
        print(args.out_dir / f"{name}.png")


if __name__ == "__main__":
    main()

"""simulate -> remosaic (every baseline) -> evaluate, driven through the CLI.

Example:
    python3 scripts/make_synthetic_rgb.py work/rgb --count 3
    python3 scripts/run_pipeline.py work/rgb work/run
"""

import argparse
import sys
import time
from pathlib import Path

from quadremosaic.cli import main as cli


def run(argv):
    t0 = time.perf_counter()
    rc = cli(argv)
    print(f"# {' '.join(argv[:1])}: {time.perf_counter() - t0:.2f}s", file=sys.stderr)
    if rc != 0:
        sys.exit(rc)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("rgb_dir", type=Path)
    ap.add_argument("work_dir", type=Path)
    ap.add_argument("--algos", nargs="+", default=["swap", "interp", "joint"])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--lpips", type=Path, default=None)
    args = ap.parse_args()

    work = args.work_dir
    run(["--seed", str(args.seed), "simulate", str(args.rgb_dir), str(work / "sim")])
    for algo in args.algos:
        run(["remosaic", str(work / "sim" / "input"), str(work / "pred" / algo), "--algo", algo])
    extra = ["--lpips", str(args.lpips)] if args.lpips else []
    run(["evaluate", *[str(work / "pred" / a) for a in args.algos], "--gt", str(work / "sim" / "gt"),
         "--report", str(work / "report.json"), *extra])


if __name__ == "__main__":
    main()

"""Command-line front end: simulate | remosaic | isp | evaluate | bench."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import io
from .bench import render_runtime_table, stats_json, time_algorithm
from .cfa import QUAD, PatternMismatchError, RawImage
from .config import RunConfig
from .isp import IspConfig, RgbImage, run_isp
from .metrics import aggregate, evaluate_scene, rank_reports, render_metrics_table
from .remosaic import AlgorithmNotFoundError, registry_lookup
from .sim import generate_scene, mosaic, add_noise, synthetic_rgb

log = logging.getLogger("quadremosaic")


class CommandError(Exception):
    """A user-facing failure; printed without a traceback."""


def _pmap(fn, items, jobs: int):
    if jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _crop_to_period(rgb: RgbImage, period: int = 4) -> RgbImage:
    h = rgb.height // period * period
    w = rgb.width // period * period
    if h == 0 or w == 0:
        raise ValueError(f"image {rgb.height}x{rgb.width} is smaller than one {period}x{period} CFA unit")
    return RgbImage(rgb.data[:h, :w], rgb.domain)


def cmd_simulate(rgb_dir: Path, out_dir: Path, cfg: RunConfig, jobs: int = 1) -> int:
    inputs = sorted(p for p in Path(rgb_dir).glob("*.png"))
    if not inputs:
        raise CommandError(f"no scenes: {rgb_dir} contains no .png files")

    def one(path: Path):
        try:
            rgb = _crop_to_period(io.read_png(path))
            pairs = generate_scene(rgb, cfg.noise.gains, cfg.noise.seed, path.stem,
                                   cfg.noise.k_shot, cfg.noise.k_read)
            for pair in pairs:
                io.save_container(pair.input_quad, Path(out_dir) / "input" / f"{path.stem}_{pair.gain_db:g}db")
            if pairs:
                io.save_container(pairs[0].gt_bayer, Path(out_dir) / "gt" / path.stem)
            log.info("simulated %s: %dx%d, %d gains", path.stem, rgb.height, rgb.width, len(pairs))
            return None
        except (OSError, ValueError) as exc:
            return f"{path}: {exc}"

    errors = [e for e in _pmap(one, inputs, jobs) if e]
    for e in errors:
        print(f"error: {e}", file=sys.stderr)
    return 1 if errors else 0


def _parse_options(pairs: list[str]) -> dict:
    opts = {}
    for item in pairs or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise CommandError(f"option {item!r} must look like key=value")
        try:
            opts[key] = json.loads(value)
        except json.JSONDecodeError:
            opts[key] = value
    return opts


def cmd_remosaic(in_dir: Path, out_dir: Path, algo: str, options: dict, cfg: RunConfig, jobs: int = 1) -> int:
    algorithm = registry_lookup(algo)
    files = io.list_containers(in_dir)
    if not files:
        raise CommandError(f"no raw containers found in {in_dir}")
    if algorithm.name == "joint":
        options = {"k_shot": cfg.noise.k_shot, "k_read": cfg.noise.k_read, **options}

    def one(path: Path):
        try:
            quad = io.load_container(path)
            bayer = algorithm.run(quad, **options)
            io.save_container(bayer, Path(out_dir) / path.stem)
            return None
        except (OSError, ValueError, TypeError) as exc:
            msg = str(exc)
            return msg if str(path) in msg or str(path.with_suffix(".raw")) in msg else f"{path}: {msg}"

    errors = [e for e in _pmap(one, files, jobs) if e]
    for e in errors:
        print(f"error: {e}", file=sys.stderr)
    return 1 if errors else 0


def cmd_isp(bayer_file: Path, png_out: Path, isp: IspConfig) -> int:
    raw = io.load_container(bayer_file)
    if raw.pattern == QUAD:
        raise CommandError(f"{bayer_file} holds a quad4 mosaic; the ISP needs Bayer input. "
                           f"Run `quadremosaic remosaic` on it first.")
    io.write_png16(run_isp(raw, isp), png_out)
    return 0


def _evaluate_dir(pred_dir: Path, gt: dict[str, tuple[Path, RawImage]], lpips: dict, cfg: RunConfig, jobs: int):
    preds = io.list_containers(pred_dir)
    if not preds:
        raise CommandError(f"no predictions found in {pred_dir}")
    loaded = [(p, io.load_container(p)) for p in preds]
    unmatched = [str(p) for p, raw in loaded if raw.scene_id not in gt]
    if unmatched:
        raise CommandError("no ground truth for: " + ", ".join(unmatched))

    def one(item):
        path, pred = item
        if pred.pattern == QUAD:
            raise PatternMismatchError(f"{path} is still a quad4 mosaic")
        value = lpips.get(path.stem, lpips.get(pred.scene_id))
        return evaluate_scene(pred, gt[pred.scene_id][1], cfg.isp, value, cfg.metrics)

    records = _pmap(one, loaded, jobs)
    return aggregate(records, cfg.fingerprint(), cfg.to_dict())


def cmd_evaluate(pred_dirs: list[Path], gt_dir: Path, lpips_sidecar: Path | None, report_path: Path,
                 cfg: RunConfig, jobs: int = 1) -> int:
    gt = {}
    for p in io.list_containers(gt_dir):
        raw = io.load_container(p)
        gt[raw.scene_id] = (p, raw)
    if not gt:
        raise CommandError(f"no ground-truth containers in {gt_dir}")
    lpips = io.load_lpips_sidecar(lpips_sidecar)
    report_path = Path(report_path)
    reports = {}
    for pred_dir in pred_dirs:
        label = Path(pred_dir).name
        report = _evaluate_dir(Path(pred_dir), gt, lpips, cfg, jobs)
        reports[label] = report
        target = report_path if len(pred_dirs) == 1 else report_path.with_name(f"{report_path.stem}.{label}.json")
        io.atomic_write_bytes(target, report.to_json().encode())
        table = render_metrics_table(report, title=f"[{label}] config {report.fingerprint}")
        io.atomic_write_bytes(target.with_suffix(".txt"), table.encode())
        print(table, end="")
    if len(reports) > 1:
        ranking = rank_reports(reports)
        lines = ["Rank  Method                 mean M4"]
        lines += [f"{i:>4}  {label:<22} {score:>7.2f}" for i, (label, score) in enumerate(ranking, 1)]
        text = "\n".join(lines) + "\n"
        io.atomic_write_bytes(report_path.with_name(f"{report_path.stem}.ranking.json"),
                              (json.dumps([{"method": m, "m4": s} for m, s in ranking], indent=2) + "\n").encode())
        io.atomic_write_bytes(report_path.with_name(f"{report_path.stem}.ranking.txt"), text.encode())
        print(text, end="")
    return 0


def bench_input(height: int, width: int, cfg: RunConfig) -> RawImage:
    """Deterministic textured Quad frame at 24 dB for timing."""
    rgb = synthetic_rgb("blobs", height, width, cfg.noise.seed)
    quad = mosaic(rgb, QUAD, scene_id="bench")
    return add_noise(quad, cfg.noise.params(24.0))


def _parse_size(text: str) -> tuple[int, int]:
    try:
        h, w = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"size must look like HEIGHTxWIDTH, got {text!r}") from None
    if h <= 0 or w <= 0 or h % 4 or w % 4:
        raise argparse.ArgumentTypeError("size must be positive multiples of 4")
    return h, w


def cmd_bench(algos: list[str], size: tuple[int, int], reps: int, report_path: Path | None, cfg: RunConfig,
              threads: int = 1) -> int:
    if reps < 3:
        raise CommandError(f"--reps must be at least 3, got {reps}")
    quad = bench_input(*size, cfg)
    stats = []
    for name in algos:
        algorithm = registry_lookup(name)
        opts = {"k_shot": cfg.noise.k_shot, "k_read": cfg.noise.k_read} if algorithm.name == "joint" else {}
        stats.append(time_algorithm(algorithm, quad, reps, threads, **opts))
    table = render_runtime_table(stats)
    print(table, end="")
    if report_path:
        report_path = Path(report_path)
        io.atomic_write_bytes(report_path, stats_json(stats).encode())
        io.atomic_write_bytes(report_path.with_suffix(".txt"), table.encode())
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=argparse.SUPPRESS, help="run config JSON")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="noise seed (u64)")
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS, help="scenes processed concurrently")
    common.add_argument("--verbose", "-v", action="store_true", default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="quadremosaic", parents=[common],
                                     description="Quad-Bayer simulation, remosaic, ISP and evaluation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="RGB PNGs -> noisy Quad inputs + GT Bayer")
    p.add_argument("rgb_dir", type=Path)
    p.add_argument("out_dir", type=Path)
    p.add_argument("--gains", type=float, nargs="+", help="gains in dB (default from config: 0 24 42)")

    p = sub.add_parser("remosaic", parents=[common], help="Quad containers -> Bayer containers")
    p.add_argument("in_dir", type=Path)
    p.add_argument("out_dir", type=Path)
    p.add_argument("--algo", default=None, help="swap | interp | joint (default from config)")
    p.add_argument("--opt", action="append", default=[], metavar="KEY=VALUE", help="algorithm option")

    p = sub.add_parser("isp", parents=[common], help="render a Bayer container to 16-bit PNG")
    p.add_argument("bayer_file", type=Path)
    p.add_argument("png_out", type=Path)
    p.add_argument("--demosaic", choices=["bilinear", "malvar"])
    p.add_argument("--gamma", help="srgb or power:<g>")
    p.add_argument("--wb", type=float, nargs=3, metavar=("R", "G", "B"))

    p = sub.add_parser("evaluate", parents=[common], help="score predictions against ground truth")
    p.add_argument("pred_dirs", type=Path, nargs="+")
    p.add_argument("--gt", type=Path, required=True, dest="gt_dir")
    p.add_argument("--lpips", type=Path, default=None, help="sidecar JSON {scene_id: lpips}")
    p.add_argument("--report", type=Path, required=True)

    p = sub.add_parser("bench", parents=[common], help="time remosaic algorithms")
    p.add_argument("--algo", nargs="+", default=["swap", "interp", "joint"])
    p.add_argument("--size", type=_parse_size, default=(1200, 1800), metavar="HxW")
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--report", type=Path, default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    jobs = getattr(args, "jobs", 1)
    try:
        cfg = RunConfig.load(getattr(args, "config", None))
        if hasattr(args, "seed"):
            cfg = dataclasses.replace(cfg, noise=dataclasses.replace(cfg.noise, seed=args.seed))
        if args.command == "simulate":
            if args.gains is not None:
                cfg = dataclasses.replace(cfg, noise=dataclasses.replace(cfg.noise, gains=tuple(args.gains)))
            return cmd_simulate(args.rgb_dir, args.out_dir, cfg, jobs)
        if args.command == "remosaic":
            options = {**cfg.options, **_parse_options(args.opt)} if args.algo in (None, cfg.algorithm) \
                else _parse_options(args.opt)
            return cmd_remosaic(args.in_dir, args.out_dir, args.algo or cfg.algorithm, options, cfg, jobs)
        if args.command == "isp":
            isp = cfg.isp
            changes = {k: v for k, v in (("demosaic", args.demosaic), ("gamma", args.gamma),
                                         ("wb_gains", tuple(args.wb) if args.wb else None)) if v is not None}
            return cmd_isp(args.bayer_file, args.png_out, dataclasses.replace(isp, **changes))
        if args.command == "evaluate":
            return cmd_evaluate(args.pred_dirs, args.gt_dir, args.lpips, args.report, cfg, jobs)
        return cmd_bench(args.algo, args.size, args.reps, args.report, cfg, args.threads)
    except (CommandError, AlgorithmNotFoundError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Wall-clock timing of remosaic algorithms and linear-in-pixels extrapolation."""

from __future__ import annotations

import hashlib
import json
import platform
import statistics
import time
from dataclasses import asdict, dataclass

from threadpoolctl import threadpool_limits

from .cfa import RawImage
from .remosaic import RemosaicAlgorithm

MIN_REPS = 3


@dataclass(frozen=True)
class RuntimeStats:
    algorithm: str
    width: int
    height: int
    reps: int
    median_seconds: float
    mean_seconds: float
    stddev_seconds: float
    threads: int
    samples: tuple[float, ...] = ()
    output_sha256: str = ""

    @property
    def pixels(self) -> int:
        return self.width * self.height

    def to_dict(self, target_megapixels: float | None = 64.0) -> dict:
        d = asdict(self)
        d["samples"] = list(self.samples)
        d["includes_io"] = False
        d["host"] = platform.machine()
        if target_megapixels is not None:
            d[f"estimated_seconds_{target_megapixels:g}mp"] = extrapolate(self, target_megapixels)
        return d


def output_digest(raw: RawImage) -> str:
    return hashlib.sha256(raw.data.tobytes()).hexdigest()


def time_algorithm(algo: RemosaicAlgorithm, quad: RawImage, reps: int = 5, threads: int = 1,
                   **options) -> RuntimeStats:
    """Median wall-clock of ``reps`` runs after one untimed warm-up.

    Every timed output is hashed and compared with the warm-up result so a
    run that silently changes its output aborts the measurement.
    """
    if reps < MIN_REPS:
        raise ValueError(f"need at least {MIN_REPS} repetitions, got {reps}")
    if threads < 1:
        raise ValueError("threads must be >= 1")
    samples = []
    with threadpool_limits(limits=threads):
        reference = output_digest(algo.run(quad, **options))
        for _ in range(reps):
            t0 = time.perf_counter()
            out = algo.run(quad, **options)
            samples.append(time.perf_counter() - t0)
            if output_digest(out) != reference:
                raise RuntimeError(f"{algo.name} produced a different output on a repeated run")
    return RuntimeStats(
        algorithm=algo.name, width=quad.width, height=quad.height, reps=reps,
        median_seconds=statistics.median(samples), mean_seconds=statistics.fmean(samples),
        stddev_seconds=statistics.stdev(samples), threads=threads,
        samples=tuple(samples), output_sha256=reference,
    )


def extrapolate_seconds(seconds: float, measured_pixels: int, target_megapixels: float) -> float:
    if measured_pixels <= 0:
        raise ValueError("measured pixel count must be positive")
    return seconds * (target_megapixels * 1e6) / measured_pixels


def extrapolate(stats: RuntimeStats, target_megapixels: float = 64.0) -> float:
    """Median time scaled linearly by pixel count."""
    return extrapolate_seconds(stats.median_seconds, stats.pixels, target_megapixels)


def render_runtime_table(stats: list[RuntimeStats], target_megapixels: float = 64.0) -> str:
    rows = [(s.algorithm, f"{s.height}x{s.width}", s.median_seconds, extrapolate(s, target_megapixels))
            for s in stats]
    sizes = sorted({r[1] for r in rows})
    measured = f"{'/'.join(sizes)} (measured)"
    head = f"{'Algorithm':<12} {measured:>24} {f'{target_megapixels:g}M (estimated)':>18}"
    lines = [head, "-" * len(head)]
    for name, _, med, est in rows:
        lines.append(f"{name:<12} {_secs(med):>24} {_secs(est):>18}")
    lines.append("timings exclude file I/O; median of repetitions, CPU wall-clock")
    return "\n".join(lines) + "\n"


def _secs(t: float) -> str:
    return f"{t * 1000:.1f}ms" if t < 1 else f"{t:.2f}s"


def stats_json(stats: list[RuntimeStats], target_megapixels: float = 64.0) -> str:
    return json.dumps([s.to_dict(target_megapixels) for s in stats], indent=2, sort_keys=True) + "\n"

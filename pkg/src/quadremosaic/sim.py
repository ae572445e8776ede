"""Synthetic Quad/Bayer pair generation with a shot + read noise model."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .cfa import QUAD, RGGB, CfaPattern, InvalidImageError, PatternMismatchError, RawImage
from .isp import RgbImage, demosaic

DEFAULT_K_SHOT = 2.5e-4
DEFAULT_K_READ = 1.0e-3
DEFAULT_GAINS = (0.0, 24.0, 42.0)


@dataclass(frozen=True)
class NoiseParams:
    gain_db: float = 0.0
    k_shot: float = DEFAULT_K_SHOT
    k_read: float = DEFAULT_K_READ
    seed: int = 0

    def __post_init__(self):
        if self.gain_db < 0:
            raise ValueError(f"gain_db must be >= 0, got {self.gain_db}")
        if self.k_shot < 0 or self.k_read < 0:
            raise ValueError("noise coefficients must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")

    @property
    def linear_gain(self) -> float:
        return 10.0 ** (self.gain_db / 20.0)

    def variance(self, x):
        """Noise variance at normalized signal level ``x``."""
        g = self.linear_gain
        return self.k_shot * g * np.asarray(x) + (self.k_read * g) ** 2

    def sigma_at(self, x: float = 0.5) -> float:
        return float(np.sqrt(self.variance(x)))


@dataclass(frozen=True, eq=False)
class ScenePair:
    input_quad: RawImage
    gt_bayer: RawImage
    gain_db: float
    scene_id: str


def mosaic(rgb: RgbImage, pattern: CfaPattern, **meta) -> RawImage:
    """Sample one channel per pixel according to ``pattern``."""
    if rgb.domain != "linear":
        raise InvalidImageError("mosaic expects linear RGB")
    h, w = rgb.height, rgb.width
    p = pattern.period
    if h % p or w % p:
        raise InvalidImageError(f"RGB size {h}x{w} not divisible by CFA period {p}")
    channel = pattern.color_map(h, w)
    data = np.take_along_axis(rgb.data, channel[..., None], axis=2)[..., 0]
    return RawImage(np.clip(data, 0.0, 1.0), pattern, **meta)


def qbin(quad: RawImage) -> RawImage:
    """Average each same-colour 2x2 Quad block into a half-resolution RGGB frame."""
    if quad.pattern != QUAD:
        raise PatternMismatchError(f"qbin needs a canonical quad4 mosaic, got {quad.pattern.name}")
    h, w = quad.data.shape
    binned = quad.data.reshape(h // 2, 2, w // 2, 2).mean(axis=(1, 3))
    return quad.with_data(binned, RGGB)


def _noise_key(seed: int, scene_id: str, gain_db: float) -> np.random.SeedSequence:
    scene = int.from_bytes(hashlib.sha256(scene_id.encode()).digest()[:8], "little")
    gain = int(round(gain_db * 1000))
    return np.random.SeedSequence([seed, scene, gain])


def noise_field(shape: tuple[int, int], params: NoiseParams, scene_id: str = "") -> np.ndarray:
    """Standard normal draws, one per pixel index in row-major order."""
    rng = np.random.Generator(np.random.PCG64(_noise_key(params.seed, scene_id, params.gain_db)))
    return rng.standard_normal(shape)


def sample_noisy(raw: RawImage, params: NoiseParams) -> np.ndarray:
    """Noisy samples before sensor saturation, as a plain array."""
    z = noise_field(raw.data.shape, params, raw.scene_id)
    return raw.data + z * np.sqrt(params.variance(raw.data))


def add_noise(raw: RawImage, params: NoiseParams) -> RawImage:
    """Heteroscedastic Gaussian noise, var = k_shot*G*x + (k_read*G)**2, clipped to [0, 1]."""
    if raw.gain_db != 0:
        raise InvalidImageError(f"noise must be synthesized on a clean 0 dB frame, got {raw.gain_db} dB")
    if params.gain_db == 0:
        return raw
    noisy = sample_noisy(raw, params)
    return raw.with_data(np.clip(noisy, 0.0, 1.0), gain_db=float(params.gain_db))


def generate_scene(rgb: RgbImage, gains=DEFAULT_GAINS, seed: int = 0, scene_id: str = "scene",
                   k_shot: float = DEFAULT_K_SHOT, k_read: float = DEFAULT_K_READ) -> list[ScenePair]:
    """One aligned (noisy Quad, clean Bayer) pair per gain."""
    if not gains:
        return []
    gt = mosaic(rgb, RGGB, scene_id=scene_id)
    clean_quad = mosaic(rgb, QUAD, scene_id=scene_id)
    pairs = []
    for g in gains:
        params = NoiseParams(float(g), k_shot, k_read, seed)
        pairs.append(ScenePair(add_noise(clean_quad, params), gt, float(g), scene_id))
    return pairs


def replicate_capture_chain(captured_quad: RawImage, method: str = "malvar") -> tuple[RawImage, RawImage]:
    """Captured Quad -> Qbin Bayer -> demosaiced RGB -> (Quad input, Bayer GT) at half resolution."""
    binned = qbin(captured_quad)
    if binned.height % 4 or binned.width % 4:
        raise InvalidImageError(f"binned size {binned.height}x{binned.width} is not a multiple of 4")
    rgb = demosaic(binned, method)
    meta = dict(scene_id=captured_quad.scene_id, black_level=captured_quad.black_level,
                white_level=captured_quad.white_level)
    return mosaic(rgb, QUAD, **meta), mosaic(rgb, RGGB, **meta)


def synthetic_rgb(kind: str, height: int, width: int, seed: int = 0) -> RgbImage:
    """Deterministic linear test scenes: ramps, gratings, blobs and soft edges."""
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:height, 0:width].astype(np.float64)
    yn, xn = y / max(height - 1, 1), x / max(width - 1, 1)
    tint = rng.uniform(0.6, 1.0, size=3)
    if kind == "flat":
        base = np.ones((height, width))
    elif kind == "hramp":
        base = 0.1 + 0.8 * xn
    elif kind == "ramp":
        angle = rng.uniform(0, np.pi)
        base = 0.1 + 0.8 * (np.cos(angle) * xn + np.sin(angle) * yn + 1) / 2.5
    elif kind == "grating":
        period = rng.uniform(12, 32)
        angle = rng.uniform(0, np.pi)
        phase = np.cos(angle) * x + np.sin(angle) * y
        base = 0.5 + 0.3 * np.sin(2 * np.pi * phase / period)
    elif kind == "blobs":
        base = np.full((height, width), 0.2)
        for _ in range(6):
            cy, cx = rng.uniform(0, height), rng.uniform(0, width)
            s = rng.uniform(0.05, 0.2) * min(height, width)
            base += 0.25 * np.exp(-((y - cy) ** 2 + (x - cx) ** 2) / (2 * s * s))
    elif kind == "edge":
        angle = rng.uniform(0, np.pi)
        d = np.cos(angle) * (x - width / 2) + np.sin(angle) * (y - height / 2)
        base = 0.25 + 0.5 / (1 + np.exp(-d / 3.0))
    else:
        raise ValueError(f"unknown synthetic scene kind {kind!r}")
    chroma = np.stack([base * tint[0], base * tint[1], base * tint[2]], axis=-1)
    if kind not in ("flat", "hramp"):
        # slow per-channel colour drift so channels are not perfectly correlated
        drift = 0.08 * np.sin(2 * np.pi * (xn[..., None] * rng.uniform(0.5, 2, 3) + rng.uniform(0, 1, 3)))
        chroma = chroma + drift * base[..., None]
    return RgbImage(np.clip(chroma, 0.0, 1.0), "linear")


def synthetic_suite(n: int, height: int = 64, width: int = 64, seed: int = 0) -> list[tuple[str, RgbImage]]:
    """``n`` named gradient/texture scenes cycling through the non-flat kinds."""
    kinds = ("ramp", "grating", "blobs", "edge", "hramp")
    return [(f"synth{i:02d}_{kinds[i % len(kinds)]}",
             synthetic_rgb(kinds[i % len(kinds)], height, width, seed + i)) for i in range(n)]

"""Classical Quad -> Bayer remosaic baselines behind a small name registry."""

from __future__ import annotations

import difflib
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .cfa import QUAD, RGGB, PatternMismatchError, RawImage, decompose_planes, quad_swap, recompose_planes
from .sim import NoiseParams


class AlgorithmNotFoundError(LookupError):
    pass


@dataclass(frozen=True)
class DenoiseConfig:
    strength: float = 0.0
    window: int = 5
    range_sigma: float = 2.0
    spatial_sigma: float = 1.5

    def __post_init__(self):
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError(f"denoise window must be an odd integer >= 3, got {self.window}")
        if self.strength < 0:
            raise ValueError("denoise strength must be >= 0")
        if self.range_sigma <= 0 or self.spatial_sigma <= 0:
            raise ValueError("denoise sigmas must be positive")

    @classmethod
    def for_noise(cls, params: NoiseParams, **kw) -> DenoiseConfig:
        """Strength from the noise model's sigma at mid-grey."""
        return cls(strength=params.sigma_at(0.5), **kw)


def _require_quad(raw: RawImage, what: str):
    if raw.pattern != QUAD:
        raise PatternMismatchError(f"{what} needs a canonical quad4 mosaic, got {raw.pattern.name}")


def remosaic_swap(quad: RawImage) -> RawImage:
    """Row/column swap inside each 4x4 unit; no interpolation."""
    return quad_swap(quad)


# Neighbourhood searched for same-colour samples; 3 px reaches every phase's
# nearest samples on the 4-periodic Quad lattice.
_REACH = 3
_MAX_SAMPLES = 4


@lru_cache(maxsize=None)
def interp_stencils() -> dict:
    """Per 4x4 phase: None to copy, else ((dy, dx), ...) offsets and 1/d weights."""
    stencils = {}
    for r in range(4):
        for c in range(4):
            want = RGGB.color_at(r, c)
            if QUAD.color_at(r, c) == want:
                stencils[(r, c)] = None
                continue
            by_dist: dict[float, list] = {}
            for dy in range(-_REACH, _REACH + 1):
                for dx in range(-_REACH, _REACH + 1):
                    if QUAD.color_at(r + dy, c + dx) == want:
                        d = math.hypot(dy, dx)
                        by_dist.setdefault(round(d, 9), []).append((dy, dx, d))
            chosen = []
            for d in sorted(by_dist):
                ring = by_dist[d]
                # a tie ring that would overflow the cap is dropped whole, keeping stencils symmetric
                if chosen and len(chosen) + len(ring) > _MAX_SAMPLES:
                    break
                chosen.extend(sorted(ring))
            inv = np.array([1.0 / d for _, _, d in chosen])
            weights = inv / inv.sum()
            stencils[(r, c)] = tuple(((dy, dx), float(wt)) for (dy, dx, _), wt in zip(chosen, weights))
    return stencils


def _quad_mirror_index(n: int, pad: int) -> np.ndarray:
    # Reflect about the centre of the first/last 2-pixel colour block, which
    # keeps the Quad colour sequence intact across the border.
    idx = np.arange(-pad, n + pad)
    while idx.min() < 0 or idx.max() >= n:
        idx = np.where(idx < 0, 1 - idx, idx)
        idx = np.where(idx >= n, 2 * n - 3 - idx, idx)
    return idx


def quad_pad(data: np.ndarray, pad: int = _REACH) -> np.ndarray:
    h, w = data.shape
    return data[np.ix_(_quad_mirror_index(h, pad), _quad_mirror_index(w, pad))]


def remosaic_interp(quad: RawImage) -> RawImage:
    """Copy co-located colours, estimate the rest from the nearest same-colour samples."""
    _require_quad(quad, "remosaic_interp")
    src = quad.data
    h, w = src.shape
    padded = quad_pad(src)
    out = np.empty_like(src)
    for (r, c), stencil in interp_stencils().items():
        if stencil is None:
            out[r::4, c::4] = src[r::4, c::4]
            continue
        views = [padded[_REACH + r + dy:_REACH + r + dy + h:4, _REACH + c + dx:_REACH + c + dx + w:4]
                 for (dy, dx), _ in stencil]
        # anchor on the nearest sample so flat regions come out bit-exact
        anchor = views[0]
        acc = np.zeros_like(anchor)
        for view, (_, wt) in zip(views[1:], stencil[1:]):
            acc += wt * (view - anchor)
        out[r::4, c::4] = anchor + acc
    return quad.with_data(np.clip(out, 0.0, 1.0), RGGB)


def bilateral_planes(planes: np.ndarray, cfg: DenoiseConfig) -> np.ndarray:
    """Bilateral filter applied independently to each plane of a (k, h, w) stack."""
    rad = cfg.window // 2
    sr = cfg.range_sigma * cfg.strength
    padded = np.pad(planes, ((0, 0), (rad, rad), (rad, rad)), mode="symmetric")
    _, h, w = planes.shape
    num = np.zeros_like(planes)
    den = np.zeros_like(planes)
    for dy in range(-rad, rad + 1):
        for dx in range(-rad, rad + 1):
            ws = math.exp(-(dy * dy + dx * dx) / (2 * cfg.spatial_sigma ** 2))
            diff = padded[:, rad + dy:rad + dy + h, rad + dx:rad + dx + w] - planes
            wt = ws * np.exp(-(diff * diff) / (2 * sr * sr))
            num += wt * diff
            den += wt
    return planes + num / den


def denoise_quad(quad: RawImage, cfg: DenoiseConfig) -> RawImage:
    """Bilateral-filter each of the 16 Quad phase planes separately."""
    _require_quad(quad, "denoise_quad")
    if cfg.strength == 0:
        return quad
    ps = decompose_planes(quad)
    filtered = np.clip(bilateral_planes(ps.planes, cfg), 0.0, 1.0)
    return recompose_planes(type(ps)(filtered, ps.origin_offsets, ps.pattern, ps.meta))


def remosaic_joint(quad: RawImage, cfg: DenoiseConfig) -> RawImage:
    """Denoise in the Quad domain, then remosaic."""
    return remosaic_interp(denoise_quad(quad, cfg))


def auto_denoise_config(quad: RawImage, k_shot: float | None = None, k_read: float | None = None,
                        **kw) -> DenoiseConfig:
    """Denoise configuration derived from the frame's gain tag."""
    extra = {}
    if k_shot is not None:
        extra["k_shot"] = k_shot
    if k_read is not None:
        extra["k_read"] = k_read
    return DenoiseConfig.for_noise(NoiseParams(gain_db=quad.gain_db, **extra), **kw)


def _run_joint(quad: RawImage, strength: float | str | None = "auto", window: int = 5, range_sigma: float = 2.0,
               spatial_sigma: float = 1.5, k_shot: float | None = None, k_read: float | None = None) -> RawImage:
    shape = dict(window=int(window), range_sigma=float(range_sigma), spatial_sigma=float(spatial_sigma))
    if strength is None or strength == "auto":
        cfg = auto_denoise_config(quad, k_shot, k_read, **shape)
    else:
        cfg = DenoiseConfig(strength=float(strength), **shape)
    return remosaic_joint(quad, cfg)


@dataclass(frozen=True)
class RemosaicAlgorithm:
    name: str
    func: Callable[..., RawImage]
    options: dict = field(default_factory=dict)

    def run(self, quad: RawImage, **overrides) -> RawImage:
        return self.func(quad, **{**self.options, **overrides})


REGISTRY = {
    "swap": RemosaicAlgorithm("swap", remosaic_swap),
    "interp": RemosaicAlgorithm("interp", remosaic_interp),
    "joint": RemosaicAlgorithm("joint", _run_joint, {"strength": "auto", "window": 5, "range_sigma": 2.0}),
}


def registry_lookup(name: str) -> RemosaicAlgorithm:
    key = name.strip().lower()
    try:
        return REGISTRY[key]
    except KeyError:
        close = difflib.get_close_matches(key, REGISTRY, n=1)
        hint = f" Did you mean {close[0]!r}?" if close else ""
        raise AlgorithmNotFoundError(
            f"unknown remosaic algorithm {name!r}; available: {', '.join(REGISTRY)}.{hint}"
        ) from None

"""Minimal reference ISP: demosaic -> white balance -> gamma."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Literal

import numpy as np

from .cfa import RGGB, PatternMismatchError, RawImage


class DomainError(ValueError):
    """Raised when an operation receives an image in the wrong (linear/gamma) domain."""


@dataclass(frozen=True, eq=False)
class RgbImage:
    """(height, width, 3) float image. Range is not enforced; the ISP clips when asked."""

    data: np.ndarray
    domain: Literal["linear", "gamma"] = "linear"

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 3 or data.shape[2] != 3:
            raise ValueError(f"RGB data must have shape (H, W, 3), got {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("RGB data contains non-finite values")
        if self.domain not in ("linear", "gamma"):
            raise ValueError(f"unknown domain {self.domain!r}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class IspConfig:
    demosaic: Literal["bilinear", "malvar"] = "malvar"
    wb_gains: tuple[float, float, float] = (1.0, 1.0, 1.0)
    gamma: str = "srgb"  # "srgb" or "power:<gamma>"
    clip: bool = True

    def __post_init__(self):
        if self.demosaic not in DEMOSAIC_METHODS:
            raise ValueError(f"unknown demosaic method {self.demosaic!r}")
        gains = tuple(float(g) for g in self.wb_gains)
        if len(gains) != 3 or min(gains) <= 0:
            raise ValueError(f"white-balance gains must be three positive numbers, got {self.wb_gains!r}")
        object.__setattr__(self, "wb_gains", gains)
        parse_gamma(self.gamma)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["wb_gains"] = list(self.wb_gains)
        return d


def parse_gamma(curve: str) -> float | None:
    """None for sRGB, else the power-law exponent."""
    if curve == "srgb":
        return None
    kind, _, value = curve.partition(":")
    if kind != "power":
        raise ValueError(f"gamma curve must be 'srgb' or 'power:<g>', got {curve!r}")
    g = float(value)
    if not g > 0:
        raise ValueError("power gamma must be positive")
    return g


# Stencils are (dy, dx, weight) with the centre tap left implicit. Taps landing
# on the channel being estimated sum to 1; the remaining taps sample the
# centre's own channel and, together with the centre, sum to 0.
_BILINEAR = {
    "cross": [(-1, 0, 0.25), (1, 0, 0.25), (0, -1, 0.25), (0, 1, 0.25)],
    "horiz": [(0, -1, 0.5), (0, 1, 0.5)],
    "vert": [(-1, 0, 0.5), (1, 0, 0.5)],
    "diag": [(-1, -1, 0.25), (-1, 1, 0.25), (1, -1, 0.25), (1, 1, 0.25)],
}


def _malvar_stencils() -> dict:
    # Malvar-He-Cutler 5x5 kernels, in eighths, centre excluded.
    g_at_rb = [(-2, 0, -1), (2, 0, -1), (0, -2, -1), (0, 2, -1),
               (-1, 0, 2), (1, 0, 2), (0, -1, 2), (0, 1, 2)]
    # colour at green, colour present in the same row
    horiz = [(0, -1, 4), (0, 1, 4), (0, -2, -1), (0, 2, -1),
             (-1, -1, -1), (-1, 1, -1), (1, -1, -1), (1, 1, -1),
             (-2, 0, 0.5), (2, 0, 0.5)]
    vert = [(dx, dy, w) for dy, dx, w in horiz]
    diag = [(-1, -1, 2), (-1, 1, 2), (1, -1, 2), (1, 1, 2),
            (-2, 0, -1.5), (2, 0, -1.5), (0, -2, -1.5), (0, 2, -1.5)]
    scale = lambda st: [(dy, dx, w / 8.0) for dy, dx, w in st]  # noqa: E731
    return {"cross": scale(g_at_rb), "horiz": scale(horiz), "vert": scale(vert), "diag": scale(diag)}


_MALVAR = _malvar_stencils()
DEMOSAIC_METHODS = {"bilinear": _BILINEAR, "malvar": _MALVAR}

# For RGGB phase (r, c): which stencil estimates each missing channel.
_PLAN = {
    (0, 0): {1: "cross", 2: "diag"},   # R site
    (0, 1): {0: "horiz", 2: "vert"},   # G in R row
    (1, 0): {0: "vert", 2: "horiz"},   # G in B row
    (1, 1): {0: "diag", 1: "cross"},   # B site
}
_OWN = {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 2}


def demosaic_array(bayer: np.ndarray, method: str = "malvar") -> np.ndarray:
    """Unclipped linear demosaic of an RGGB array, mirrored borders.

    Estimates are formed as t0 + sum(w * (t - t0)) + sum(c * (s - centre)) so
    that per-colour constant input reproduces its values bit-exactly.
    """
    stencils = DEMOSAIC_METHODS[method]
    pad = 2
    padded = np.pad(bayer, pad, mode="reflect")  # reflect keeps the period-2 phase
    h, w = bayer.shape
    out = np.empty((h, w, 3), dtype=np.float64)

    def tap(r, c, dy, dx):
        return padded[pad + r + dy:pad + r + dy + h:2, pad + c + dx:pad + c + dx + w:2]

    for (r, c), plan in _PLAN.items():
        centre = bayer[r::2, c::2]
        out[r::2, c::2, _OWN[(r, c)]] = centre
        for ch, key in plan.items():
            near = [t for t in stencils[key] if _OWN[((r + t[0]) % 2, (c + t[1]) % 2)] == ch]
            far = [t for t in stencils[key] if _OWN[((r + t[0]) % 2, (c + t[1]) % 2)] != ch]
            anchor = tap(r, c, near[0][0], near[0][1])
            acc = np.zeros_like(centre)
            for dy, dx, wt in near[1:]:
                acc += wt * (tap(r, c, dy, dx) - anchor)
            for dy, dx, wt in far:
                acc += wt * (tap(r, c, dy, dx) - centre)
            out[r::2, c::2, ch] = anchor + acc
    return out


def demosaic(bayer: RawImage, method: str = "malvar") -> RgbImage:
    """Linear RGB from an RGGB mosaic, clipped to [0, 1]."""
    if bayer.pattern != RGGB:
        raise PatternMismatchError(f"demosaic needs an rggb mosaic, got {bayer.pattern.name}")
    if method not in DEMOSAIC_METHODS:
        raise ValueError(f"unknown demosaic method {method!r}; choose from {sorted(DEMOSAIC_METHODS)}")
    return RgbImage(np.clip(demosaic_array(bayer.data, method), 0.0, 1.0), "linear")


def white_balance(rgb: RgbImage, gains=(1.0, 1.0, 1.0), clip: bool = True) -> RgbImage:
    if rgb.domain != "linear":
        raise DomainError("white balance applies to linear RGB")
    gains = np.asarray(gains, dtype=np.float64)
    if gains.shape != (3,) or np.any(gains <= 0):
        raise ValueError(f"white-balance gains must be three positive numbers, got {gains.tolist()}")
    out = rgb.data * gains
    if clip:
        out = np.clip(out, 0.0, 1.0)
    return RgbImage(out, "linear")


def srgb_encode(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    lo = x <= 0.0031308
    out = np.empty_like(x)
    out[lo] = 12.92 * x[lo]
    out[~lo] = 1.055 * np.power(x[~lo], 1.0 / 2.4) - 0.055
    return out


def gamma_encode(rgb: RgbImage, curve: str = "srgb") -> RgbImage:
    if rgb.domain != "linear":
        raise DomainError("image is already gamma encoded")
    g = parse_gamma(curve)
    if g is None:
        out = srgb_encode(rgb.data)
    elif g == 1.0:
        out = rgb.data
    else:
        out = np.power(np.maximum(rgb.data, 0.0), 1.0 / g)
    return RgbImage(out, "gamma")


def run_isp(bayer: RawImage, cfg: IspConfig | None = None) -> RgbImage:
    cfg = cfg or IspConfig()
    rgb = demosaic(bayer, cfg.demosaic)
    rgb = white_balance(rgb, cfg.wb_gains, clip=cfg.clip)
    return gamma_encode(rgb, cfg.gamma)
